//! Invariant suites over built-in and seeded random parameter sets.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{block_max_abs, commutator, AlgebraParams, FockRep};
use crate::coherent::{self, CoherentState};
use crate::error::{Error, Result};
use crate::measure::{moment_check, weights_for, MomentTarget};
use crate::sga::{self, SgaRep};

/// Number of random admissible draws added to the built-in sets.
pub const RANDOM_DRAWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Commutators,
    Sga,
    Cs,
    Measure,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Commutators, Suite::Sga, Suite::Cs, Suite::Measure],
            s => vec![s],
        }
    }

    /// Tolerance used when none is given.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Commutators => 1e-12,
            Suite::Sga => 1e-9,
            Suite::Cs => 1e-10,
            Suite::Measure | Suite::All => 1e-8,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Commutators => "commutators",
            Suite::Sga => "sga",
            Suite::Cs => "cs",
            Suite::Measure => "measure",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "commutators" => Ok(Suite::Commutators),
            "sga" => Ok(Suite::Sga),
            "cs" => Ok(Suite::Cs),
            "measure" => Ok(Suite::Measure),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub suite: Suite,
    /// Overrides every suite's default tolerance.
    pub tol: Option<f64>,
    pub seed: u64,
    /// Added to `F(n)` when building representations, to check that the
    /// suites detect a broken structure function.
    pub structure_offset: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            tol: None,
            seed: 2024,
            structure_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub invariant: String,
    pub params: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} [{}] value={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.invariant,
            self.params,
            self.value,
            self.tol
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn describe(params: &AlgebraParams) -> String {
    let alpha: Vec<String> = params.alpha().iter().map(|a| format!("{a:.6}")).collect();
    format!("lambda={} alpha={}", params.lambda(), alpha.join(","))
}

fn builtin_params() -> Vec<AlgebraParams> {
    let sets: [(usize, &[f64]); 8] = [
        (2, &[0.0, 0.0]),
        (2, &[0.5, -0.5]),
        (2, &[-0.5, 0.5]),
        (3, &[0.0, 0.0, 0.0]),
        (3, &[-0.1, 0.4, -0.3]),
        (4, &[0.0, 0.0, 0.0, 0.0]),
        (4, &[0.3, -0.2, 0.1, -0.2]),
        (5, &[0.2, -0.4, 0.1, 0.3, -0.2]),
    ];
    sets.iter()
        .map(|(l, a)| AlgebraParams::new(*l, a).expect("built-in set is admissible"))
        .collect()
}

fn random_params(rng: &mut ChaCha8Rng, lambdas: std::ops::RangeInclusive<usize>) -> Vec<AlgebraParams> {
    (0..RANDOM_DRAWS)
        .map(|_| {
            let lambda = rng.random_range(lambdas.clone());
            AlgebraParams::random_admissible(lambda, rng)
        })
        .collect()
}

struct Recorder<'a> {
    suite: Suite,
    tol: f64,
    out: &'a mut Vec<CheckOutcome>,
}

impl Recorder<'_> {
    fn check(&mut self, invariant: &str, params: String, value: f64) {
        self.check_with(invariant, params, value, self.tol);
    }

    fn check_with(&mut self, invariant: &str, params: String, value: f64, tol: f64) {
        self.out.push(CheckOutcome {
            suite: self.suite,
            invariant: invariant.to_string(),
            params,
            value,
            tol,
            passed: value.is_finite() && value < tol,
        });
    }

    fn error(&mut self, invariant: &str, params: String, err: &Error) {
        self.out.push(CheckOutcome {
            suite: self.suite,
            invariant: format!("{invariant} ({err})"),
            params,
            value: f64::NAN,
            tol: self.tol,
            passed: false,
        });
    }
}

fn commutator_suite(rec: &mut Recorder, sets: &[AlgebraParams], offset: f64) {
    for p in sets {
        let lambda = p.lambda();
        let n_max = 6 * lambda;
        let fock = match FockRep::with_structure_offset(p, n_max, offset) {
            Ok(f) => f,
            Err(e) => {
                rec.error("fock representation", describe(p), &e);
                continue;
            }
        };
        let interior = n_max;
        let c = commutator(fock.a(), fock.a_dag()) - fock.commutator_target();
        rec.check(
            "commutator [a, a^dag] = 1 + sum alpha_mu P_mu",
            describe(p),
            block_max_abs(&c, interior),
        );
        let c = commutator(fock.number(), fock.a_dag()) - fock.a_dag();
        rec.check(
            "commutator [N, a^dag] = a^dag",
            describe(p),
            block_max_abs(&c, interior),
        );
        let mut worst = 0.0_f64;
        for mu in 0..lambda {
            let next = fock.projector((mu + 1) % lambda);
            let d = fock.a_dag() * fock.projector(mu) - next * fock.a_dag();
            worst = worst.max(block_max_abs(&d, fock.dim()));
        }
        rec.check("a^dag P_mu = P_{mu+1} a^dag", describe(p), worst);
        let ada = fock.a_dag() * fock.a();
        let worst = (0..fock.dim())
            .map(|n| (ada[(n, n)] - p.structure_function(n)).abs() / p.structure_function(n).max(1.0))
            .fold(0.0, f64::max);
        rec.check("diag(a^dag a) = F(n)", describe(p), worst);
    }
}

fn sga_suite(rec: &mut Recorder, sets: &[AlgebraParams], offset: f64) {
    for p in sets {
        let lambda = p.lambda();
        let built = FockRep::with_structure_offset(p, SgaRep::recommended_n_max(lambda), offset)
            .and_then(|fock| SgaRep::new(&fock));
        let rep = match built {
            Ok(r) => r,
            Err(e) => {
                rec.error("sga representation", describe(p), &e);
                continue;
            }
        };
        let interior = rep.interior_limit();
        let scale = rep.j_zero()[(interior, interior)].max(1.0);
        let c0p = commutator(rep.j_zero(), rep.j_plus()) - rep.j_plus();
        let c0m = commutator(rep.j_zero(), rep.j_minus()) + rep.j_minus();
        let worst = block_max_abs(&c0p, interior).max(block_max_abs(&c0m, interior)) / scale;
        rec.check("commutator [J_0, J_pm] = pm J_pm", describe(p), worst);
        match sga::extract_polynomials(&rep) {
            Ok(fit) => {
                rec.check_with("f interpolation residual", describe(p), fit.f_residual, sga::FIT_TOL);
                rec.check_with(
                    "Casimir constant per sector",
                    describe(p),
                    fit.casimir_spread,
                    sga::FIT_TOL,
                );
                if let Some(reference) = sga::closed_form(p) {
                    rec.check("closed-form s, t, c", describe(p), sga::max_deviation(&fit, &reference));
                }
            }
            Err(e) => rec.error("polynomial extraction", describe(p), &e),
        }
    }
}

fn cs_suite(rec: &mut Recorder, sets: &[AlgebraParams]) {
    let labels = [
        Complex64::new(0.5, 0.0),
        Complex64::new(2.0, 1.0),
        Complex64::new(-3.0, 0.0),
    ];
    for p in sets {
        let lambda = p.lambda();
        for mu in 0..lambda {
            for z in labels {
                let tag = format!("{} mu={mu} z={z}", describe(p));
                let cs = match CoherentState::new(p, mu, z) {
                    Ok(c) => c,
                    Err(e) => {
                        rec.error("coherent state", tag, &e);
                        continue;
                    }
                };
                let n_max = cs.n_max().max(4 * lambda);
                let residual = FockRep::new(p, n_max)
                    .and_then(|f| SgaRep::new(&f))
                    .and_then(|s| coherent::eigen_residual(&cs, &s));
                match residual {
                    Ok(r) => rec.check("J_- |z;mu> = z |z;mu>", tag.clone(), r),
                    Err(e) => rec.error("J_- eigen residual", tag.clone(), &e),
                }
                match coherent::normalization(p, mu, z.norm()) {
                    Ok(n) => {
                        let rel = (cs.unnormalized_norm_sq() - n).abs() / n;
                        rec.check_with("norm^2 = 0F_{lambda-1}", tag.clone(), rel, 1e-11);
                    }
                    Err(e) => rec.error("normalization", tag.clone(), &e),
                }
                if p.is_undeformed() {
                    match coherent::photon_series_check(&cs) {
                        Ok(d) => rec.check_with("alpha = 0 photon-number series", tag.clone(), d, 1e-12),
                        Err(e) => rec.error("alpha = 0 photon-number series", tag.clone(), &e),
                    }
                    match coherent::mittag_leffler_check(&cs) {
                        Ok(d) => rec.check_with("alpha = 0 Mittag-Leffler form", tag.clone(), d, 1e-12),
                        Err(e) => rec.error("alpha = 0 Mittag-Leffler form", tag, &e),
                    }
                }
            }
        }
    }
}

fn measure_suite(rec: &mut Recorder, sets: &[AlgebraParams]) {
    for p in sets {
        let weights = match weights_for(p) {
            Ok(w) => w,
            Err(_) => continue,
        };
        for w in &weights {
            for k in 0..=10 {
                let target = MomentTarget::new(p, w.mu(), k);
                let tag = format!("{} mu={} k={k}", describe(p), w.mu());
                match moment_check(w.as_ref(), &target, rec.tol) {
                    Ok(m) => rec.check("moment of unity-resolving weight", tag, m.rel_error),
                    Err(e) => rec.error("moment of unity-resolving weight", tag, &e),
                }
            }
        }
    }
}

fn measure_params(rng: &mut ChaCha8Rng) -> Vec<AlgebraParams> {
    let mut sets: Vec<AlgebraParams> = [-0.5, 0.0, 0.5, 2.0]
        .iter()
        .map(|a| AlgebraParams::new(2, &[*a, -*a]).expect("admissible"))
        .collect();
    sets.extend((3..=4).map(|l| AlgebraParams::undeformed(l).expect("admissible")));
    sets.extend((0..RANDOM_DRAWS).map(|_| AlgebraParams::random_admissible(2, rng)));
    sets
}

/// Run the selected suites.
pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(t) = opts.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {t}")));
        }
    }
    let mut checks = Vec::new();
    let builtin = builtin_params();
    for suite in opts.suite.members() {
        // each suite draws from its own stream so results do not depend on which suites run
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ suite as u64);
        let tol = opts.tol.unwrap_or(suite.default_tol());
        let mut rec = Recorder {
            suite,
            tol,
            out: &mut checks,
        };
        match suite {
            Suite::Commutators => {
                let mut sets = builtin.clone();
                sets.extend(random_params(&mut rng, 2..=5));
                commutator_suite(&mut rec, &sets, opts.structure_offset);
            }
            Suite::Sga => {
                let mut sets = builtin.clone();
                sets.extend(random_params(&mut rng, 2..=5));
                sga_suite(&mut rec, &sets, opts.structure_offset);
            }
            Suite::Cs => {
                let mut sets: Vec<AlgebraParams> = builtin.iter().filter(|p| p.lambda() <= 4).cloned().collect();
                sets.extend(random_params(&mut rng, 2..=4));
                cs_suite(&mut rec, &sets);
            }
            Suite::Measure => {
                let sets = measure_params(&mut rng);
                measure_suite(&mut rec, &sets);
            }
            Suite::All => unreachable!("expanded by members()"),
        }
    }
    Ok(VerifyReport {
        seed: opts.seed,
        checks,
    })
}
