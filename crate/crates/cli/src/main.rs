use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use cyclosc::coherent::CoherentState;
use cyclosc::sga::{self, SgaRep};
use cyclosc::stats::{self, PhotonKind};
use cyclosc::verify::{self, Suite, VerifyOptions};
use cyclosc::{AlgebraParams, Error, FockRep};

/// Largest deviation from the closed-form SGA polynomials accepted by `sga`.
const SGA_DEVIATION_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "cyclosc", version, about = "C_lambda-extended oscillator numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the validated parameters, derived tables, energies and uncertainty bounds.
    Info(ParamArgs),
    /// Fit the spectrum-generating algebra polynomials and compare with closed forms.
    Sga {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate a coherent-state statistic along a path in the z plane and write CSV.
    Sweep(SweepArgs),
    /// Run invariant suites over built-in and random parameter sets.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Cyclic order lambda >= 2.
    #[arg(long)]
    lambda: usize,
    /// Comma-separated alpha_0..alpha_{lambda-1}; the last entry may be `auto`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    #[value(name = "mandel-q")]
    MandelQ,
    #[value(name = "var-x")]
    VarX,
    #[value(name = "var-p")]
    VarP,
    #[value(name = "x4-ratio")]
    X4Ratio,
    #[value(name = "p4-ratio")]
    P4Ratio,
    #[value(name = "X")]
    X,
    #[value(name = "P")]
    P,
    #[value(name = "Y")]
    Y,
    #[value(name = "Q4")]
    Q4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Photons {
    Dressed,
    Real,
}

impl From<Photons> for PhotonKind {
    fn from(p: Photons) -> Self {
        match p {
            Photons::Dressed => PhotonKind::Dressed,
            Photons::Real => PhotonKind::Real,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    mu: usize,
    #[arg(long, value_enum, default_value_t = Photons::Dressed)]
    photons: Photons,
    #[arg(long, value_enum)]
    quantity: Quantity,
    /// Start of a real-axis path.
    #[arg(long, allow_hyphen_values = true)]
    z_from: Option<f64>,
    /// End of a real-axis path.
    #[arg(long, allow_hyphen_values = true)]
    z_to: Option<f64>,
    /// Start of a modulus path at fixed phase.
    #[arg(long, allow_hyphen_values = true)]
    r_from: Option<f64>,
    /// End of a modulus path at fixed phase.
    #[arg(long, allow_hyphen_values = true)]
    r_to: Option<f64>,
    /// Phase of the modulus path in radians.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    phase: f64,
    #[arg(long, default_value_t = 121)]
    steps: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Tolerance overriding each suite's default.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the random parameter draws.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    inject_structure_offset: f64,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TruncationTooSmall { .. }
            | Error::TruncationInsufficient { .. }
            | Error::SeriesNonConvergence { .. }
            | Error::QuadratureNonConvergence { .. } => 3,
            Error::FitResidual { .. } | Error::NonConstantCasimir { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {first}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Info(p) => cmd_info(&p),
        Command::Sga { params, format } => cmd_sga(&params, format),
        Command::Sweep(s) => cmd_sweep(&s),
        Command::Verify(v) => cmd_verify(&v),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn parse_alpha(text: &str, lambda: usize) -> std::result::Result<Vec<f64>, Failure> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut alpha = Vec::with_capacity(fields.len());
    for (i, f) in fields.iter().enumerate() {
        if *f == "auto" {
            if i + 1 != fields.len() {
                return Err(Failure::validation("only the last alpha may be 'auto'"));
            }
            alpha.push(-alpha.iter().sum::<f64>());
        } else {
            let v: f64 = f
                .parse()
                .map_err(|_| Failure::validation(format!("cannot parse alpha entry '{f}'")))?;
            if !v.is_finite() {
                return Err(Failure::validation(format!("alpha entry '{f}' is not finite")));
            }
            alpha.push(v);
        }
    }
    if lambda >= 2 && alpha.len() != lambda {
        return Err(Error::AlphaLength {
            expected: lambda,
            got: alpha.len(),
        }
        .into());
    }
    Ok(alpha)
}

fn load_params(p: &ParamArgs) -> std::result::Result<AlgebraParams, Failure> {
    if p.lambda < 2 {
        return Err(Error::LambdaTooSmall(p.lambda).into());
    }
    let alpha = parse_alpha(&p.alpha, p.lambda)?;
    Ok(AlgebraParams::new(p.lambda, &alpha)?)
}

/// Shortest decimal rendering after rounding to 12 significant digits.
fn fmt_num(x: f64) -> String {
    if x.abs() < 1e-13 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")
}

fn cmd_info(args: &ParamArgs) -> CmdResult {
    let p = load_params(args)?;
    let lambda = p.lambda();
    let mut out = String::new();
    let _ = writeln!(out, "lambda = {lambda}");
    let _ = writeln!(out, "alpha = {}", join(p.alpha()));
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>4} {:>14} {:>14} {:>14} {:>14}",
        "mu", "alpha", "beta", "beta_bar", "gamma"
    );
    for mu in 0..=lambda {
        let (a, g) = if mu < lambda {
            (fmt_num(p.alpha()[mu]), fmt_num(p.gamma()[mu]))
        } else {
            ("-".into(), "-".into())
        };
        let _ = writeln!(
            out,
            "{:>4} {:>14} {:>14} {:>14} {:>14}",
            mu,
            a,
            fmt_num(p.beta()[mu]),
            fmt_num(p.beta_bar()[mu]),
            g
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "energies (H_0 eigenvalues):");
    for n in 0..3 * lambda {
        let _ = writeln!(
            out,
            "  E_{n} = {}   (F({n}) = {}, sector {})",
            fmt_num(p.energy(n)),
            fmt_num(p.structure_function(n)),
            p.sector(n)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "uncertainty bounds per sector (dressed quadratures):");
    for mu in 0..lambda {
        let _ = writeln!(
            out,
            "  mu = {mu}: var_x var_p >= {}   (vacuum dispersion {})",
            fmt_num(stats::uncertainty_rhs(&p, mu)),
            fmt_num(stats::vacuum_dispersion(&p, mu))
        );
    }
    print!("{out}");
    Ok(())
}

fn cmd_sga(args: &ParamArgs, format: Format) -> CmdResult {
    let p = load_params(args)?;
    let lambda = p.lambda();
    let fock = FockRep::new(&p, SgaRep::recommended_n_max(lambda))?;
    let rep = SgaRep::new(&fock)?;
    let fit = sga::extract_polynomials(&rep)?;
    let reference = sga::closed_form(&p);
    let deviation = reference.as_ref().map(|r| sga::max_deviation(&fit, r));

    let mut out = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(out, "lambda = {lambda}, alpha = {}", join(p.alpha()));
            let _ = writeln!(
                out,
                "f(J_0) = sum_i s[mu][i] J_0^i, h(J_0) = sum_i t[mu][i] J_0^i, C = c_mu"
            );
            for mu in 0..lambda {
                let _ = writeln!(out, "mu = {mu}");
                let _ = writeln!(out, "  s = {}", join(&fit.s[mu]));
                let _ = writeln!(out, "  t = {}", join(&fit.t[mu]));
                let _ = writeln!(out, "  c = {}", fmt_num(fit.c[mu]));
                if let Some(r) = &reference {
                    let _ = writeln!(out, "  closed form s = {}", join(&r.s[mu]));
                    let _ = writeln!(out, "  closed form t = {}", join(&r.t[mu]));
                    let _ = writeln!(out, "  closed form c = {}", fmt_num(r.c[mu]));
                }
            }
            let _ = writeln!(out, "residual f = {:.3e}", fit.f_residual);
            let _ = writeln!(out, "residual casimir = {:.3e}", fit.casimir_spread);
            if let Some(d) = deviation {
                let _ = writeln!(out, "max deviation from closed form = {d:.3e}");
            }
        }
        Format::Csv => {
            out.push_str("quantity,mu,index,fitted,closed_form\n");
            let rows = |name: &str, fitted: &[Vec<f64>], closed: Option<&Vec<Vec<f64>>>, out: &mut String| {
                for (mu, coeffs) in fitted.iter().enumerate() {
                    for (i, v) in coeffs.iter().enumerate() {
                        let c = closed.map(|c| format!("{:.16e}", c[mu][i] + 0.0)).unwrap_or_default();
                        let _ = writeln!(out, "{name},{mu},{i},{v:.16e},{c}");
                    }
                }
            };
            rows("s", &fit.s, reference.as_ref().map(|r| &r.s), &mut out);
            rows("t", &fit.t, reference.as_ref().map(|r| &r.t), &mut out);
            for (mu, v) in fit.c.iter().enumerate() {
                let c = reference
                    .as_ref()
                    .map(|r| format!("{:.16e}", r.c[mu] + 0.0))
                    .unwrap_or_default();
                let _ = writeln!(out, "c,{mu},0,{v:.16e},{c}");
            }
            let _ = writeln!(out, "residual_f,,,{:.16e},", fit.f_residual);
            let _ = writeln!(out, "residual_casimir,,,{:.16e},", fit.casimir_spread);
            if let Some(d) = deviation {
                let _ = writeln!(out, "max_deviation,,,{d:.16e},");
            }
        }
    }
    print!("{out}");
    match deviation {
        Some(d) if !(d <= SGA_DEVIATION_TOL) => Err(Failure::verification(format!(
            "fitted polynomials deviate from closed form by {d:.3e} > {SGA_DEVIATION_TOL:.0e}"
        ))),
        _ => Ok(()),
    }
}

fn sweep_grid(args: &SweepArgs) -> std::result::Result<Vec<Complex64>, Failure> {
    if args.steps < 2 {
        return Err(Failure::validation(format!(
            "--steps must be at least 2, got {}",
            args.steps
        )));
    }
    let real_axis = args.z_from.is_some() || args.z_to.is_some();
    let modulus = args.r_from.is_some() || args.r_to.is_some();
    if real_axis && modulus {
        return Err(Failure::validation(
            "give either --z-from/--z-to or --r-from/--r-to, not both",
        ));
    }
    let squeezing = !matches!(args.quantity, Quantity::MandelQ);
    let use_real = real_axis || (!modulus && squeezing);
    let (from, to) = if use_real {
        (args.z_from.unwrap_or(-6.0), args.z_to.unwrap_or(0.0))
    } else {
        (args.r_from.unwrap_or(0.0), args.r_to.unwrap_or(6.0))
    };
    if !from.is_finite() || !to.is_finite() || !args.phase.is_finite() {
        return Err(Failure::validation("path endpoints must be finite"));
    }
    if from == to {
        return Err(Failure::validation("path endpoints must differ"));
    }
    if !use_real && (from < 0.0 || to < 0.0) {
        return Err(Failure::validation(
            "modulus path needs non-negative --r-from and --r-to",
        ));
    }
    let last = (args.steps - 1) as f64;
    Ok((0..args.steps)
        .map(|i| {
            let t = from + (to - from) * i as f64 / last;
            if use_real {
                Complex64::new(t, 0.0)
            } else {
                Complex64::from_polar(t, args.phase)
            }
        })
        .collect())
}

fn evaluate(p: &AlgebraParams, mu: usize, kind: PhotonKind, quantity: Quantity, z: Complex64) -> cyclosc::Result<f64> {
    let cs = CoherentState::new(p, mu, z)?;
    let value = match quantity {
        Quantity::MandelQ => stats::mandel_q_series(&cs).unwrap_or(f64::NAN),
        Quantity::VarX => stats::quadrature_series(&cs, kind).var_x,
        Quantity::VarP => stats::quadrature_series(&cs, kind).var_p,
        _ => {
            // fourth powers of a quadrature reach four levels above the support
            let fock = FockRep::new(p, cs.n_max().max(p.lambda()) + 4)?;
            match quantity {
                Quantity::X4Ratio => {
                    let s = stats::quadrature_stats(&cs, &fock, kind)?;
                    s.central_x4 / (s.var_x * s.var_x)
                }
                Quantity::P4Ratio => {
                    let s = stats::quadrature_stats(&cs, &fock, kind)?;
                    s.central_p4 / (s.var_p * s.var_p)
                }
                Quantity::X => stats::squeeze_ratios(&cs, &fock, kind)?.x,
                Quantity::P => stats::squeeze_ratios(&cs, &fock, kind)?.p,
                Quantity::Y => stats::squeeze_ratios(&cs, &fock, kind)?.y,
                Quantity::Q4 => stats::squeeze_ratios(&cs, &fock, kind)?.q4,
                Quantity::MandelQ | Quantity::VarX | Quantity::VarP => unreachable!("handled above"),
            }
        }
    };
    Ok(value)
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let p = load_params(&args.params)?;
    if args.mu >= p.lambda() {
        return Err(Failure::validation(format!(
            "--mu must be below lambda = {}",
            p.lambda()
        )));
    }
    let grid = sweep_grid(args)?;
    let kind = PhotonKind::from(args.photons);
    let rows: Vec<cyclosc::Result<String>> = grid
        .par_iter()
        .map(|z| {
            let v = evaluate(&p, args.mu, kind, args.quantity, *z)?;
            Ok(format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", z.re, z.im, z.norm(), v))
        })
        .collect();
    let mut csv = String::from("z_re,z_im,abs_z,value\n");
    for row in rows {
        csv.push_str(&row?);
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Failure::validation(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let suite: Suite = args.suite.parse()?;
    let opts = VerifyOptions {
        suite,
        tol: args.tol,
        seed: args.seed,
        structure_offset: args.inject_structure_offset,
    };
    let report = verify::run(&opts)?;
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", report.seed);
    for c in &report.checks {
        let _ = writeln!(out, "{c}");
    }
    let failed = report.failures().count();
    let _ = writeln!(out, "{} checks, {} failed", report.checks.len(), failed);
    print!("{out}");
    let first_failure = report.failures().next().map(|first| {
        Failure::verification(format!(
            "{failed} checks failed; first: {} {} [{}]",
            first.suite, first.invariant, first.params
        ))
    });
    first_failure.map_or(Ok(()), Err)
}
