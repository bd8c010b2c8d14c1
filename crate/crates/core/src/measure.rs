//! Resolution of unity for the coherent states, checked through moments.
//!
//! With `d rho_mu = N_mu(|z|) h_mu(y) |z| d|z| d phi`, the diagonal matrix
//! element of `sum_mu int d rho_mu |z;mu><z;mu|` on `|k lambda + mu>` equals one
//! exactly when
//!
//! ```text
//! int_0^inf h_mu(y) y^k dy = k! prod_i (d_i)_k / (pi lambda^{lambda-2})
//! ```
//!
//! where `d_i` are the sector denominators of the normalization series.
//! Off-diagonal elements vanish by the angular integration.
//!
//! Closed-form weights are available for `lambda = 2` (Meijer G reducing to
//! Bessel K) and for `alpha = 0` with any `lambda`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::AlgebraParams;
use crate::coherent::{sector_denominators, CoherentState};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::specfun::{bessel_k, gamma, ln_gamma, pochhammer};

/// A radial weight `h_mu(y)` of the unity-resolving measure.
pub trait Weight {
    fn lambda(&self) -> usize;

    fn mu(&self) -> usize;

    fn value(&self, y: f64) -> Result<f64>;

    /// Power `m` of the substitution `y = u^m` that leaves a bounded
    /// integrand at `u = 0`.
    fn substitution_power(&self) -> f64;

    /// Upper bound on `int_{y_cut}^inf h(y) y^k dy`.
    fn tail_bound(&self, y_cut: f64, k: usize) -> f64;
}

/// Upper bound on the upper incomplete gamma function `Gamma(s, t)`.
pub fn upper_gamma_bound(s: f64, t: f64) -> f64 {
    assert!(t > 0.0);
    // t^{s-1} is non-increasing past t for s <= 1; otherwise bound it by an exponential
    let log_head = (s - 1.0) * t.ln() - t;
    if s <= 1.0 {
        log_head.exp()
    } else if t > s - 1.0 {
        log_head.exp() / (1.0 - (s - 1.0) / t)
    } else {
        f64::INFINITY
    }
}

/// `h_mu` for `alpha = 0`:
/// `lambda^{mu-lambda+2} (pi mu!)^{-1} y^{(mu-lambda+1)/lambda} exp(-lambda y^{1/lambda})`.
#[derive(Debug, Clone, Copy)]
pub struct PhotonWeight {
    lambda: usize,
    mu: usize,
}

impl PhotonWeight {
    pub fn new(lambda: usize, mu: usize) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::LambdaTooSmall(lambda));
        }
        if mu >= lambda {
            return Err(Error::InvalidParameter(format!(
                "sector {mu} out of range for lambda = {lambda}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    fn log_prefactor(&self) -> f64 {
        let l = self.lambda as f64;
        (self.mu as f64 - l + 2.0) * l.ln() - PI.ln() - ln_gamma(self.mu as f64 + 1.0)
    }
}

impl Weight for PhotonWeight {
    fn lambda(&self) -> usize {
        self.lambda
    }

    fn mu(&self) -> usize {
        self.mu
    }

    fn value(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("weight requires y > 0, got {y}")));
        }
        let l = self.lambda as f64;
        let power = (self.mu as f64 - l + 1.0) / l;
        Ok((self.log_prefactor() + power * y.ln() - l * y.powf(1.0 / l)).exp())
    }

    fn substitution_power(&self) -> f64 {
        self.lambda as f64
    }

    fn tail_bound(&self, y_cut: f64, k: usize) -> f64 {
        // t = lambda y^{1/lambda} turns the tail into C lambda^{-(s-1)} Gamma(s, T)
        let l = self.lambda as f64;
        let s = l * k as f64 + self.mu as f64 + 1.0;
        let t = l * y_cut.powf(1.0 / l);
        (self.log_prefactor() - (s - 1.0) * l.ln()).exp() * upper_gamma_bound(s, t)
    }
}

/// `h_mu` for `lambda = 2`:
/// `G^{20}_{02}(y | 0, a) / (pi Gamma(a + 1))` with `a = beta_bar_1 - 1` for
/// `mu = 0` and `a = beta_bar_1` for `mu = 1`, using
/// `G^{20}_{02}(y | 0, a) = 2 y^{a/2} K_a(2 sqrt y)`.
#[derive(Debug, Clone, Copy)]
pub struct Lambda2Weight {
    mu: usize,
    a: f64,
    log_prefactor: f64,
}

impl Lambda2Weight {
    pub fn new(params: &AlgebraParams, mu: usize) -> Result<Self> {
        if params.lambda() != 2 {
            return Err(Error::InvalidParameter(format!(
                "Bessel-K weight needs lambda = 2, got {}",
                params.lambda()
            )));
        }
        if mu > 1 {
            return Err(Error::InvalidParameter(format!(
                "sector {mu} out of range for lambda = 2"
            )));
        }
        let bb1 = params.beta_bar()[1];
        let a = if mu == 0 { bb1 - 1.0 } else { bb1 };
        Ok(Self {
            mu,
            a,
            log_prefactor: -PI.ln() - ln_gamma(a + 1.0),
        })
    }

    /// Second Meijer-G parameter.
    pub fn order(&self) -> f64 {
        self.a
    }

    // n with n + 1/2 >= |a|
    fn half_order_bound(&self) -> usize {
        (self.a.abs() - 0.5).max(0.0).ceil() as usize
    }
}

impl Weight for Lambda2Weight {
    fn lambda(&self) -> usize {
        2
    }

    fn mu(&self) -> usize {
        self.mu
    }

    fn value(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("weight requires y > 0, got {y}")));
        }
        let x = 2.0 * y.sqrt();
        let k = bessel_k(self.a, x)?;
        Ok(2.0 * (self.log_prefactor + 0.5 * self.a * y.ln()).exp() * k)
    }

    fn substitution_power(&self) -> f64 {
        // near 0 the weight behaves like y^{min(a, 0)} (log for a = 0)
        let p = self.a.min(0.0) - if self.a == 0.0 { 0.1 } else { 0.0 };
        2.0 * (1.0 / (2.0 * (1.0 + p))).ceil().max(1.0)
    }

    fn tail_bound(&self, y_cut: f64, k: usize) -> f64 {
        // K_a(x) <= K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_j (n+j)! / (j! (n-j)! (2x)^j)
        let n = self.half_order_bound();
        let x0 = 2.0 * y_cut.sqrt();
        let poly: f64 = (0..=n)
            .map(|j| {
                gamma((n + j) as f64 + 1.0)
                    / (gamma(j as f64 + 1.0) * gamma((n - j) as f64 + 1.0))
                    / (2.0 * x0).powi(j as i32)
            })
            .sum();
        // t = 2 sqrt y: pref C sqrt(pi) 2^{-(2k+a+1/2)} Gamma(2k + a + 3/2, 2 sqrt Y)
        let s = 2.0 * k as f64 + self.a + 1.5;
        let log_c = self.log_prefactor + 0.5 * PI.ln() - (2.0 * k as f64 + self.a + 0.5) * 2f64.ln();
        log_c.exp() * poly * upper_gamma_bound(s, x0)
    }
}

/// Required moment `int h_mu(y) y^k dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTarget {
    pub mu: usize,
    pub k: usize,
    pub target: f64,
}

impl MomentTarget {
    pub fn new(params: &AlgebraParams, mu: usize, k: usize) -> Self {
        let lambda = params.lambda();
        let d: f64 = sector_denominators(params, mu)
            .iter()
            .fold(gamma(k as f64 + 1.0), |acc, b| acc * pochhammer(*b, k));
        let target = d / (PI * (lambda as f64).powi(lambda as i32 - 2));
        Self { mu, k, target }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub mu: usize,
    pub k: usize,
    pub value: f64,
    pub target: f64,
    pub rel_error: f64,
    pub y_cut: f64,
}

impl MomentCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.rel_error < tol
    }
}

/// Integrate `h(y) y^k` over `(0, Y_cut)` with `Y_cut` chosen from the
/// weight's analytic tail bound, and compare with `target`.
pub fn moment_check(weight: &dyn Weight, target: &MomentTarget, quad_tol: f64) -> Result<MomentCheck> {
    if target.k > 12 {
        return Err(Error::InvalidParameter(format!("moment order {} exceeds 12", target.k)));
    }
    let k = target.k;
    let tail_goal = 1e-3 * quad_tol * target.target;
    let mut y_cut = 1.0;
    while weight.tail_bound(y_cut, k) > tail_goal {
        y_cut *= 2.0;
        if y_cut > 1e30 {
            return Err(Error::QuadratureNonConvergence {
                subdivisions: 0,
                error: weight.tail_bound(y_cut, k),
            });
        }
    }
    let m = weight.substitution_power();
    let u_cut = y_cut.powf(1.0 / m);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let y = u.powf(m);
        let h = weight.value(y).unwrap_or(f64::NAN);
        m * u.powf(m - 1.0) * h * y.powi(k as i32)
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: (1e-3 * quad_tol).max(1e-14),
        max_subdivisions: 4000,
    };
    let r = quadrature::integrate(integrand, 0.0, u_cut, opts)?;
    if !r.value.is_finite() {
        return Err(Error::Domain("weight evaluation failed inside quadrature".into()));
    }
    Ok(MomentCheck {
        mu: target.mu,
        k,
        value: r.value,
        target: target.target,
        rel_error: (r.value - target.target).abs() / target.target,
        y_cut,
    })
}

/// A weight multiplied by a constant, for exercising the harness.
pub struct ScaledWeight<W> {
    pub inner: W,
    pub factor: f64,
}

impl<W: Weight> Weight for ScaledWeight<W> {
    fn lambda(&self) -> usize {
        self.inner.lambda()
    }

    fn mu(&self) -> usize {
        self.inner.mu()
    }

    fn value(&self, y: f64) -> Result<f64> {
        Ok(self.factor * self.inner.value(y)?)
    }

    fn substitution_power(&self) -> f64 {
        self.inner.substitution_power()
    }

    fn tail_bound(&self, y_cut: f64, k: usize) -> f64 {
        self.factor.abs() * self.inner.tail_bound(y_cut, k)
    }
}

/// The available closed-form weights for `params`, one per sector.
pub fn weights_for(params: &AlgebraParams) -> Result<Vec<Box<dyn Weight>>> {
    let lambda = params.lambda();
    if lambda == 2 {
        (0..2)
            .map(|mu| Lambda2Weight::new(params, mu).map(|w| Box::new(w) as Box<dyn Weight>))
            .collect()
    } else if params.is_undeformed() {
        (0..lambda)
            .map(|mu| PhotonWeight::new(lambda, mu).map(|w| Box::new(w) as Box<dyn Weight>))
            .collect()
    } else {
        Err(Error::InvalidParameter(
            "closed-form weights exist only for lambda = 2 or alpha = 0".into(),
        ))
    }
}

/// Largest off-diagonal entry of `(1/2pi) int d phi |z;mu><z;mu|` at `|z| = r`,
/// by an equispaced angular rule with `points` nodes.
pub fn angular_offdiagonal_max(params: &AlgebraParams, mu: usize, r: f64, points: usize) -> Result<f64> {
    let states: Vec<CoherentState> = (0..points)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / points as f64;
            CoherentState::new(params, mu, Complex64::from_polar(r, phi))
        })
        .collect::<Result<_>>()?;
    let dim = states.iter().map(|s| s.n_max() + 1).max().unwrap_or(0);
    let padded: Vec<Vec<Complex64>> = states.iter().map(|s| s.padded(dim)).collect();
    let mut worst = 0.0_f64;
    for n in 0..dim {
        for m in 0..dim {
            if n == m {
                continue;
            }
            let avg: Complex64 = padded.iter().map(|v| v[n] * v[m].conj()).sum::<Complex64>() / points as f64;
            worst = worst.max(avg.norm());
        }
    }
    Ok(worst)
}

/// Truncated reconstruction of `sum_mu int d rho_mu |z;mu><z;mu|` on
/// levels `n < (max_k + 1) lambda`.
#[derive(Debug, Clone)]
pub struct ResolutionCheck {
    pub moments: Vec<MomentCheck>,
    /// Largest `|diag - 1|` of the reconstruction.
    pub diag_max_dev: f64,
    /// Largest off-diagonal entry found by angular quadrature.
    pub offdiag_max: f64,
}

pub fn resolution_of_unity(params: &AlgebraParams, max_k: usize, quad_tol: f64) -> Result<ResolutionCheck> {
    let weights = weights_for(params)?;
    let mut moments = Vec::new();
    for w in &weights {
        for k in 0..=max_k {
            let target = MomentTarget::new(params, w.mu(), k);
            moments.push(moment_check(w.as_ref(), &target, quad_tol)?);
        }
    }
    let diag_max_dev = moments
        .iter()
        .map(|m| (m.value / m.target - 1.0).abs())
        .fold(0.0, f64::max);
    let mut offdiag_max = 0.0_f64;
    for mu in 0..params.lambda() {
        for r in [0.5, 2.0] {
            offdiag_max = offdiag_max.max(angular_offdiagonal_max(params, mu, r, 64)?);
        }
    }
    Ok(ResolutionCheck {
        moments,
        diag_max_dev,
        offdiag_max,
    })
}
