#![allow(dead_code)]

use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cyclosc(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclosc"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

/// `(z_re, z_im, abs_z, value)` rows of a sweep CSV.
pub fn parse_csv(text: &str) -> Vec<[f64; 4]> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z_re,z_im,abs_z,value"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|f| f.parse().expect("decimal field")).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

pub fn sweep(args: &[&str]) -> Vec<[f64; 4]> {
    let mut full = vec!["sweep"];
    full.extend_from_slice(args);
    let r = cyclosc(&full);
    assert_eq!(r.code, 0, "sweep {args:?} failed: {}", r.stderr);
    parse_csv(&r.stdout)
}
