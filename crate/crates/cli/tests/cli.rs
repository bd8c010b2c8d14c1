mod common;

use common::{cyclosc, parse_csv, sweep};

fn assert_single_line_error(stderr: &str) {
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    assert!(lines[0].starts_with("error: "), "{stderr}");
}

#[test]
fn info_prints_tables_and_energies() {
    let r = cyclosc(&["info", "--lambda", "2", "--alpha", "0.5,-0.5"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("E_0 = 0.75"));
    assert!(r.stdout.contains("beta_bar"));
    assert!(r.stdout.contains("E_5 = 5.75"));
    assert!(!r.stdout.contains("E_6 ="));
    assert!(r.stdout.contains("mu = 0: var_x var_p >= 0.5625"));
}

#[test]
fn info_validation_failures() {
    let r = cyclosc(&["info", "--lambda", "2", "--alpha", "-1,1"]);
    assert_eq!(r.code, 1);
    assert_single_line_error(&r.stderr);
    assert!(r.stderr.contains("alpha_0 > -1"));

    let r = cyclosc(&["info", "--lambda", "1", "--alpha", "0"]);
    assert_eq!(r.code, 1);
    assert_single_line_error(&r.stderr);

    for alpha in ["0.1,0.2", "0.1,x", "0.3,0.1", "auto,0.1"] {
        let r = cyclosc(&["info", "--lambda", "2", "--alpha", alpha]);
        assert_eq!(r.code, 1, "{alpha}");
        assert_single_line_error(&r.stderr);
    }

    let r = cyclosc(&["info", "--lambda", "2"]);
    assert_eq!(r.code, 1);
    assert_single_line_error(&r.stderr);
}

#[test]
fn auto_alpha_closes_the_sum() {
    let r = cyclosc(&["info", "--lambda", "3", "--alpha", "0.1,0.2,auto"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("alpha = 0.1, 0.2, -0.3"));
}

#[test]
fn sga_lambda2_f_row() {
    let r = cyclosc(&["sga", "--lambda", "2", "--alpha", "0.7,auto"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("s = 0, -2"));
    assert!(r.stdout.contains("t = 0, -1, -1"));
    assert!(r.stdout.contains("max deviation from closed form"));
}

#[test]
fn sga_lambda3_undeformed_casimir_csv() {
    let r = cyclosc(&["sga", "--lambda", "3", "--alpha", "0,0,0", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("quantity,mu,index,fitted,closed_form"));
    let c: Vec<f64> = r
        .stdout
        .lines()
        .filter(|l| l.starts_with("c,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(c.len(), 3);
    for v in c {
        assert!((v - 5.0 / 24.0).abs() < 1e-9);
    }
}

#[test]
fn sga_lambda4_residuals_small() {
    let r = cyclosc(&[
        "sga",
        "--lambda",
        "4",
        "--alpha",
        "0.31,-0.22,0.17,auto",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, 0);
    for l in r.stdout.lines().filter(|l| l.starts_with("residual_")) {
        let v: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(v < 1e-8, "{l}");
    }
    assert!(!r.stdout.contains("max_deviation"));
}

#[test]
fn sweep_mandel_q_even_states_bunch() {
    let rows = sweep(&[
        "--lambda",
        "2",
        "--alpha",
        "0,0",
        "--mu",
        "0",
        "--quantity",
        "mandel-q",
        "--r-from",
        "0.1",
        "--r-to",
        "4",
    ]);
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| r[3] > 0.0));
    assert!((rows[0][2] - 0.1).abs() < 1e-15 && (rows[120][2] - 4.0).abs() < 1e-15);
}

#[test]
fn sweep_squeezing_examples() {
    let rows = sweep(&[
        "--lambda",
        "2",
        "--alpha",
        "1,-1",
        "--quantity",
        "X",
        "--z-from",
        "-6",
        "--z-to",
        "0",
    ]);
    assert!(rows[..120].iter().all(|r| r[3] < 1.0));
    let rows = sweep(&[
        "--lambda",
        "3",
        "--alpha",
        "0,0,0",
        "--quantity",
        "X",
        "--z-from",
        "-4",
        "--z-to",
        "0",
    ]);
    let min = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    assert!(min >= 1.0 - 1e-10);
}

#[test]
fn sweep_phase_path_and_file_output() {
    let dir = std::env::temp_dir().join(format!("cyclosc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("q.csv");
    let r = cyclosc(&[
        "sweep",
        "--lambda",
        "3",
        "--alpha",
        "0.2,-0.1,auto",
        "--mu",
        "2",
        "--photons",
        "real",
        "--quantity",
        "var-p",
        "--r-from",
        "0",
        "--r-to",
        "2",
        "--phase",
        "1.0",
        "--steps",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let rows = parse_csv(&text);
    assert_eq!(rows.len(), 5);
    let last = rows[4];
    assert!((last[0] - 2.0 * 1f64.cos()).abs() < 1e-15);
    assert!((last[1] - 2.0 * 1f64.sin()).abs() < 1e-15);
    // 17 significant digits per field
    let field = text.lines().nth(2).unwrap().split(',').next().unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_flag_errors() {
    let base = ["sweep", "--lambda", "2", "--alpha", "0,0", "--quantity", "X"];
    for extra in [
        vec!["--steps", "1"],
        vec!["--z-from", "1", "--z-to", "1"],
        vec!["--z-from", "-1", "--r-to", "2"],
        vec!["--mu", "2"],
        vec!["--r-from", "-1", "--r-to", "1"],
    ] {
        let mut args = base.to_vec();
        args.extend(extra.iter());
        let r = cyclosc(&args);
        assert_eq!(r.code, 1, "{extra:?}");
        assert_single_line_error(&r.stderr);
    }
    let r = cyclosc(&["sweep", "--lambda", "2", "--alpha", "0,0", "--quantity", "nope"]);
    assert_eq!(r.code, 1);
    assert_single_line_error(&r.stderr);
}

#[test]
fn sweep_truncation_failure_exit_code() {
    let r = cyclosc(&[
        "sweep",
        "--lambda",
        "2",
        "--alpha",
        "0,0",
        "--quantity",
        "var-x",
        "--z-from",
        "-5000",
        "--z-to",
        "0",
        "--steps",
        "3",
    ]);
    assert_eq!(r.code, 3);
    assert_single_line_error(&r.stderr);
}

#[test]
fn verify_sga_passes() {
    let r = cyclosc(&["verify", "--suite", "sga"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains(", 0 failed"));
}

#[test]
fn verify_measure_lists_moments() {
    let r = cyclosc(&["verify", "--suite", "measure", "--tol", "1e-8"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for mu in 0..2 {
        for k in 0..=10 {
            let tag = format!("lambda=2 alpha=0.500000,-0.500000 mu={mu} k={k}]");
            assert!(
                r.stdout
                    .lines()
                    .any(|l| l.starts_with("PASS measure") && l.contains(&tag)),
                "{tag}"
            );
        }
    }
}

#[test]
fn verify_detects_structure_fault() {
    let r = cyclosc(&["verify", "--suite", "commutators", "--inject-structure-offset", "0.01"]);
    assert_eq!(r.code, 2);
    assert_single_line_error(&r.stderr);
    assert!(r.stderr.contains("commutator [a, a^dag]"));
    assert!(r.stderr.contains("lambda="));
}

#[test]
fn verify_rejects_unknown_suite() {
    let r = cyclosc(&["verify", "--suite", "bogus"]);
    assert_eq!(r.code, 1);
    assert_single_line_error(&r.stderr);
}

#[test]
fn verify_seed_is_printed() {
    let r = cyclosc(&["verify", "--suite", "commutators", "--seed", "99"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("seed = 99\n"));
}
