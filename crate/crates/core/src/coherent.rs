//! Coherent states `|z; mu>`: eigenstates of `J_-` with eigenvalue `z`
//! supported on the sector `F_mu`.
//!
//! The unnormalized coefficient of `|k lambda + mu>` is
//!
//! ```text
//! (z / lambda^{(lambda-2)/2})^k / sqrt(k! prod_{nu=1}^{mu} (beta_bar_nu + 1)_k prod_{nu=mu+1}^{lambda-1} (beta_bar_nu)_k)
//! ```
//!
//! and its squared norm is `0F_{lambda-1}` of the same denominators at
//! `y = |z|^2 / lambda^{lambda-2}`. Magnitudes are accumulated in log space;
//! phases by repeated multiplication with `z / |z|`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{AlgebraParams, FockRep};
use crate::error::{Error, Result};
use crate::sga::SgaRep;
use crate::specfun;

/// Hard cap on adaptive truncation.
pub const DEFAULT_MAX_N: usize = 512;

/// Relative magnitude below which a coefficient counts as negligible.
pub const NEGLIGIBLE: f64 = 1e-16;

/// Tolerance on the last retained coefficient for a caller-fixed truncation.
pub const FIXED_TRUNCATION_TOL: f64 = 1e-15;

/// A normalized coherent state on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct CoherentState {
    params: AlgebraParams,
    mu: usize,
    z: Complex64,
    n_max: usize,
    coeffs: Vec<Complex64>,
    norm_factor: f64,
    unnormalized_norm_sq: f64,
    tail_bound: f64,
}

/// Denominator parameters of `0F_{lambda-1}` for sector `mu`.
pub fn sector_denominators(params: &AlgebraParams, mu: usize) -> Vec<f64> {
    let bb = params.beta_bar();
    (1..params.lambda())
        .map(|nu| if nu <= mu { bb[nu] + 1.0 } else { bb[nu] })
        .collect()
}

/// `y = |z|^2 / lambda^{lambda-2}`.
pub fn reduced_argument(lambda: usize, abs_z: f64) -> f64 {
    abs_z * abs_z / (lambda as f64).powi(lambda as i32 - 2)
}

/// `N_mu(|z|) = 0F_{lambda-1}(...; y)`.
pub fn normalization(params: &AlgebraParams, mu: usize, abs_z: f64) -> Result<f64> {
    check_sector(params, mu)?;
    if !(abs_z >= 0.0) {
        return Err(Error::Domain(format!("|z| must be nonnegative, got {abs_z}")));
    }
    let y = reduced_argument(params.lambda(), abs_z);
    Ok(specfun::hyper0f(&sector_denominators(params, mu), y)?.value)
}

fn check_sector(params: &AlgebraParams, mu: usize) -> Result<()> {
    if mu >= params.lambda() {
        return Err(Error::InvalidParameter(format!(
            "sector mu = {mu} out of range for lambda = {}",
            params.lambda()
        )));
    }
    Ok(())
}

// log of the k-th increment of k! prod (d)_k
fn log_denominator_step(denoms_shifted: &[f64], k: usize) -> f64 {
    let kf = k as f64;
    denoms_shifted.iter().fold(kf.ln(), |acc, d| acc + (d + kf - 1.0).ln())
}

impl CoherentState {
    /// Build with adaptive truncation, capped at [`DEFAULT_MAX_N`].
    pub fn new(params: &AlgebraParams, mu: usize, z: Complex64) -> Result<Self> {
        Self::adaptive(params, mu, z, DEFAULT_MAX_N)
    }

    /// Build with adaptive truncation: coefficients are added until one falls
    /// below [`NEGLIGIBLE`] times the accumulated norm; the basis then extends
    /// one full period past the last retained level.
    pub fn adaptive(params: &AlgebraParams, mu: usize, z: Complex64, max_n: usize) -> Result<Self> {
        check_sector(params, mu)?;
        let lambda = params.lambda();
        let denoms = sector_denominators(params, mu);
        let log_w = (z.norm() / (lambda as f64).powf(0.5 * (lambda as f64 - 2.0))).ln();
        let mut logs = vec![0.0_f64];
        if z.norm() > 0.0 {
            let mut k = 0usize;
            let mut peak = 0.0_f64;
            let mut acc = 1.0_f64; // sum of exp(2 (l - peak))
            loop {
                k += 1;
                let n = k * lambda + mu + lambda;
                if n > max_n {
                    return Err(Error::TruncationInsufficient {
                        n_max: max_n,
                        tail: (2.0 * (logs[k - 1] - peak)).exp() / acc,
                    });
                }
                let l = logs[k - 1] + log_w - 0.5 * log_denominator_step(&denoms, k);
                logs.push(l);
                if l > peak {
                    acc = acc * (2.0 * (peak - l)).exp() + 1.0;
                    peak = l;
                } else {
                    let rel_sq = (2.0 * (l - peak)).exp();
                    if rel_sq < NEGLIGIBLE * NEGLIGIBLE * acc {
                        break;
                    }
                    acc += rel_sq;
                }
            }
        }
        let last = logs.len() - 1;
        Self::assemble(params, mu, z, logs, last * lambda + mu + lambda, log_w, &denoms)
    }

    /// Build on the fixed basis `|0> .. |n_max>`; fails when the last
    /// retained coefficient is not negligible.
    pub fn with_truncation(params: &AlgebraParams, mu: usize, z: Complex64, n_max: usize) -> Result<Self> {
        check_sector(params, mu)?;
        if n_max < mu {
            return Err(Error::TruncationTooSmall {
                n_max,
                reason: format!("basis does not reach |{mu}>"),
            });
        }
        let lambda = params.lambda();
        let denoms = sector_denominators(params, mu);
        let log_w = (z.norm() / (lambda as f64).powf(0.5 * (lambda as f64 - 2.0))).ln();
        let kmax = (n_max - mu) / lambda;
        let mut logs = vec![0.0_f64];
        if z.norm() > 0.0 {
            for k in 1..=kmax {
                let l = logs[k - 1] + log_w - 0.5 * log_denominator_step(&denoms, k);
                logs.push(l);
            }
        }
        let state = Self::assemble(params, mu, z, logs, n_max, log_w, &denoms)?;
        let last = state.coeffs[kmax * lambda + mu].norm();
        if z.norm() > 0.0 && last >= FIXED_TRUNCATION_TOL {
            return Err(Error::TruncationInsufficient { n_max, tail: last });
        }
        Ok(state)
    }

    fn assemble(
        params: &AlgebraParams,
        mu: usize,
        z: Complex64,
        logs: Vec<f64>,
        n_max: usize,
        log_w: f64,
        denoms: &[f64],
    ) -> Result<Self> {
        let lambda = params.lambda();
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scaled_sq: f64 = logs.iter().map(|l| (2.0 * (l - peak)).exp()).sum();
        let inv_norm = 1.0 / scaled_sq.sqrt();
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };

        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut rot = Complex64::new(1.0, 0.0);
        for (k, l) in logs.iter().enumerate() {
            coeffs[k * lambda + mu] = rot * ((l - peak).exp() * inv_norm);
            rot *= phase;
        }

        // geometric bound on the dropped squared weight, relative to the norm
        let last = logs.len() - 1;
        let tail_bound = if z.norm() == 0.0 {
            0.0
        } else {
            let next = last + 1;
            let step = 2.0 * log_w - log_denominator_step(denoms, next);
            let r = step.exp();
            let head = (2.0 * (logs[last] - peak)).exp() * inv_norm * inv_norm;
            if r < 1.0 {
                head * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        };

        let norm_factor = normalization(params, mu, z.norm())?;
        Ok(Self {
            params: params.clone(),
            mu,
            z,
            n_max,
            coeffs,
            norm_factor,
            unnormalized_norm_sq: (2.0 * peak).exp() * scaled_sq,
            tail_bound,
        })
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Normalized amplitudes over `|0> .. |n_max>`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `N_mu(|z|)` from the hypergeometric series.
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    /// Squared norm of the retained unnormalized coefficients.
    pub fn unnormalized_norm_sq(&self) -> f64 {
        self.unnormalized_norm_sq
    }

    /// Bound on the squared weight of the dropped normalized coefficients.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Coefficients with `<mu|z;mu> = 1`.
    pub fn unnormalized_coeffs(&self) -> Vec<Complex64> {
        let s = self.unnormalized_norm_sq.sqrt();
        self.coeffs.iter().map(|c| c * s).collect()
    }

    /// Photon-number distribution `|<n|z;mu>|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &CoherentState) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    /// Euclidean distance between two states, padding the shorter one.
    pub fn distance(&self, other: &CoherentState) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(zero);
                let b = other.coeffs.get(i).copied().unwrap_or(zero);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// The state padded with zeros to `dim` basis states.
    pub fn padded(&self, dim: usize) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        v.resize(dim.max(v.len()), Complex64::new(0.0, 0.0));
        v
    }
}

/// `m v` for a real matrix and complex vector.
pub fn apply(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.ncols(), v.len());
    (0..m.nrows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(v)
                .filter(|(a, _)| **a != 0.0)
                .map(|(a, x)| x * *a)
                .sum()
        })
        .collect()
}

fn shadowed_residual(m: &DMatrix<f64>, v: &[Complex64], eigenvalue: Complex64, rows: usize) -> f64 {
    let mv = apply(m, v);
    mv.iter()
        .zip(v)
        .take(rows)
        .map(|(a, b)| (a - eigenvalue * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn check_dims(cs: &CoherentState, fock: &FockRep) -> Result<()> {
    if fock.params() != cs.params() {
        return Err(Error::InvalidParameter(
            "state and representation use different parameters".into(),
        ));
    }
    if fock.n_max() < cs.n_max() {
        return Err(Error::TruncationTooSmall {
            n_max: fock.n_max(),
            reason: format!("state needs n_max >= {}", cs.n_max()),
        });
    }
    Ok(())
}

/// `||J_- v - z v|| / max(|z|, 1)`, ignoring the top `lambda` levels of the
/// state's own truncation.
pub fn eigen_residual(cs: &CoherentState, sga: &SgaRep) -> Result<f64> {
    check_dims(cs, sga.fock())?;
    let v = cs.padded(sga.fock().dim());
    let rows = cs.n_max() + 1 - cs.params().lambda();
    Ok(shadowed_residual(sga.j_minus(), &v, cs.z(), rows) / cs.z().norm().max(1.0))
}

/// Same residual through `a^lambda v = lambda z v`, divided by `lambda`.
pub fn lowering_power_residual(cs: &CoherentState, fock: &FockRep) -> Result<f64> {
    check_dims(cs, fock)?;
    let lambda = cs.params().lambda();
    let mut m = DMatrix::identity(fock.dim(), fock.dim());
    for _ in 0..lambda {
        m = &m * fock.a();
    }
    let v = cs.padded(fock.dim());
    let rows = cs.n_max() + 1 - lambda;
    let lf = lambda as f64;
    Ok(shadowed_residual(&m, &v, cs.z() * lf, rows) / lf / cs.z().norm().max(1.0))
}

/// Unnormalized state `0F_{lambda-1}(...; z J_+ / lambda^{lambda-2}) |mu>`,
/// summed as a matrix series on the representation of `sga`.
pub fn hypergeometric_operator_form(sga: &SgaRep, mu: usize, z: Complex64, terms: usize) -> Result<Vec<Complex64>> {
    let params = sga.params();
    check_sector(params, mu)?;
    let lambda = params.lambda();
    let denoms = sector_denominators(params, mu);
    let w = z / (lambda as f64).powi(lambda as i32 - 2);
    let dim = sga.fock().dim();
    let mut basis = vec![Complex64::new(0.0, 0.0); dim];
    basis[mu] = Complex64::new(1.0, 0.0);
    let mut out = basis.clone();
    let mut power = basis;
    let mut coef = Complex64::new(1.0, 0.0);
    for k in 1..terms {
        if k * lambda + mu > sga.fock().n_max() {
            break;
        }
        power = apply(sga.j_plus(), &power);
        let kf = k as f64;
        let d = denoms.iter().fold(kf, |acc, b| acc * (b + kf - 1.0));
        coef = coef * w / d;
        for (o, p) in out.iter_mut().zip(&power) {
            *o += coef * p;
        }
    }
    Ok(out)
}

/// Maximum coefficient deviation between `cs` (with `alpha = 0`) and the
/// normalized number-state expansion `sqrt(mu! / (k lambda + mu)!) (lambda z)^k`.
pub fn photon_series_check(cs: &CoherentState) -> Result<f64> {
    let params = cs.params();
    if !params.is_undeformed() {
        return Err(Error::InvalidParameter(
            "photon-series reduction requires alpha = 0".into(),
        ));
    }
    let lambda = params.lambda();
    let mu = cs.mu();
    let lz = cs.z() * lambda as f64;
    let mut raw = vec![Complex64::new(0.0, 0.0); cs.n_max() + 1];
    let mut c = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k * lambda + mu <= cs.n_max() {
        if k > 0 {
            let hi = k * lambda + mu;
            let d: f64 = (hi + 1 - lambda..=hi).map(|j| j as f64).product();
            c = c * lz / d.sqrt();
        }
        raw[k * lambda + mu] = c;
        k += 1;
    }
    let norm = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    Ok(raw
        .iter()
        .zip(cs.coeffs())
        .map(|(r, c)| (r / norm - c).norm())
        .fold(0.0, f64::max))
}

/// Rebuild the `alpha = 0` state as
/// `sqrt(mu! / E_{lambda,mu+1}(lambda^2 |z|^2)) E_{lambda,mu+1}(lambda^2 z J_+) |mu>`
/// and return the largest coefficient deviation from `cs`.
pub fn mittag_leffler_check(cs: &CoherentState) -> Result<f64> {
    let params = cs.params();
    if !params.is_undeformed() {
        return Err(Error::InvalidParameter("Mittag-Leffler form requires alpha = 0".into()));
    }
    let lambda = params.lambda();
    let lf = lambda as f64;
    let mu = cs.mu();
    let fock = FockRep::new(params, cs.n_max().max(lambda))?;
    let mut jp = DMatrix::identity(fock.dim(), fock.dim());
    for _ in 0..lambda {
        jp = &jp * fock.a_dag();
    }
    let jp = jp / lf;

    let x = cs.z() * (lf * lf);
    let mut power = vec![Complex64::new(0.0, 0.0); fock.dim()];
    power[mu] = Complex64::new(1.0, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); fock.dim()];
    let mut xk = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k * lambda + mu <= cs.n_max() {
        if k > 0 {
            power = apply(&jp, &power);
            xk *= x;
        }
        let s = lf * k as f64 + mu as f64 + 1.0;
        let inv_gamma = if s < 170.0 {
            1.0 / specfun::gamma(s)
        } else {
            (-specfun::ln_gamma(s)).exp()
        };
        for (o, p) in out.iter_mut().zip(&power) {
            *o += xk * inv_gamma * p;
        }
        k += 1;
    }
    let ml = specfun::mittag_leffler(lf, mu as f64 + 1.0, lf * lf * cs.z().norm_sqr())?.value;
    let scale = (specfun::gamma(mu as f64 + 1.0) / ml).sqrt();
    Ok(out
        .iter()
        .zip(cs.coeffs())
        .map(|(o, c)| (o * scale - c).norm())
        .fold(0.0, f64::max))
}
