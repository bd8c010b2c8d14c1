//! Photon statistics and quadrature squeezing of coherent states.
//!
//! Quadratures are `x = (A† + A)/sqrt 2`, `p = i (A† - A)/sqrt 2` with
//! `A = a` ("dressed" photons) or `A = b` ("real" photons). Fourth-order
//! quantities are central moments `<(x - <x>)^4>`. Squeezing ratios compare
//! a state with the `z = 0` state of the same sector and photon kind.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{AlgebraParams, FockRep};
use crate::coherent::{apply, CoherentState};
use crate::error::{Error, Result};

/// `<N>` below which the Mandel parameter is reported as undefined.
pub const MEAN_N_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhotonKind {
    /// Deformed pair `(a, a†)`.
    Dressed,
    /// Canonical pair `(b, b†)`.
    Real,
}

impl fmt::Display for PhotonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhotonKind::Dressed => "dressed",
            PhotonKind::Real => "real",
        })
    }
}

impl FromStr for PhotonKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dressed" => Ok(PhotonKind::Dressed),
            "real" => Ok(PhotonKind::Real),
            other => Err(Error::InvalidParameter(format!("unknown photon kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStats {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub central_x4: f64,
    pub central_p4: f64,
}

/// `X`, `P` (second order) and `Y`, `Q4` (fourth order) squeezing ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeRatios {
    pub x: f64,
    pub p: f64,
    pub y: f64,
    pub q4: f64,
    /// `false` when the state is outside sector 0, where the reference state
    /// is not a minimum-uncertainty state.
    pub ground_sector: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub mean_n: f64,
    pub var_n: f64,
    pub mandel_q: Option<f64>,
    pub dressed: QuadratureStats,
    pub real: QuadratureStats,
    pub dressed_ratios: SqueezeRatios,
    pub real_ratios: SqueezeRatios,
    pub uncertainty_rhs: f64,
}

/// `(<N>, <(Delta N)^2>)` from the photon-number distribution.
pub fn number_moments(cs: &CoherentState) -> (f64, f64) {
    let probs = cs.probabilities();
    let mean: f64 = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let var: f64 = probs
        .iter()
        .enumerate()
        .map(|(n, p)| (n as f64 - mean).powi(2) * p)
        .sum();
    (mean, var)
}

fn q_from(mean: f64, var: f64) -> Option<f64> {
    (mean >= MEAN_N_FLOOR).then(|| (var - mean) / mean)
}

/// Mandel `Q` by direct summation over the coefficient series.
pub fn mandel_q_series(cs: &CoherentState) -> Option<f64> {
    let (mean, var) = number_moments(cs);
    q_from(mean, var)
}

/// Mandel `Q` from matrix expectation values of `N` and `N^2`;
/// `None` when `<N>` vanishes.
pub fn mandel_q(cs: &CoherentState, fock: &FockRep) -> Result<Option<f64>> {
    let v = prepared(cs, fock)?;
    let nv = apply(fock.number(), &v);
    let mean = expectation(&v, &nv).re;
    let n2 = nv.iter().map(|x| x.norm_sqr()).sum::<f64>();
    Ok(q_from(mean, n2 - mean * mean))
}

fn prepared(cs: &CoherentState, fock: &FockRep) -> Result<Vec<Complex64>> {
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
    Ok(cs.padded(fock.dim()))
}

fn expectation(v: &[Complex64], ov: &[Complex64]) -> Complex64 {
    v.iter().zip(ov).map(|(a, b)| a.conj() * b).sum()
}

fn ladder(fock: &FockRep, kind: PhotonKind) -> &DMatrix<f64> {
    match kind {
        PhotonKind::Dressed => fock.a(),
        PhotonKind::Real => fock.b(),
    }
}

// (mean, variance, fourth central moment) of a Hermitian operator given by
// its action on vectors
fn central_moments(v: &[Complex64], op: impl Fn(&[Complex64]) -> Vec<Complex64>) -> (f64, f64, f64) {
    let ov = op(v);
    let mean = expectation(v, &ov).re;
    let w: Vec<Complex64> = ov.iter().zip(v).map(|(a, b)| a - b * mean).collect();
    let var = w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let ow = op(&w);
    let w2: Vec<Complex64> = ow.iter().zip(&w).map(|(a, b)| a - b * mean).collect();
    let fourth = w2.iter().map(|x| x.norm_sqr()).sum::<f64>();
    (mean, var, fourth)
}

/// Quadrature moments of `cs` by matrix expectation values.
pub fn quadrature_stats(cs: &CoherentState, fock: &FockRep, kind: PhotonKind) -> Result<QuadratureStats> {
    let v = prepared(cs, fock)?;
    let lower = ladder(fock, kind);
    let raise = lower.transpose();
    let x_op = (&raise + lower) / SQRT_2;
    // p = i m with m real antisymmetric
    let m_op = (&raise - lower) / SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let (mean_x, var_x, central_x4) = central_moments(&v, |u| apply(&x_op, u));
    let (mean_p, var_p, central_p4) = central_moments(&v, |u| apply(&m_op, u).into_iter().map(|c| c * i).collect());
    Ok(QuadratureStats {
        mean_x,
        mean_p,
        var_x,
        var_p,
        central_x4,
        central_p4,
    })
}

/// First and second quadrature moments by direct series summation over the
/// coefficients, independent of any matrix representation. Fourth moments
/// are not computed on this path and are returned as `NaN`.
pub fn quadrature_series(cs: &CoherentState, kind: PhotonKind) -> QuadratureStats {
    let params = cs.params();
    let weight = |n: usize| match kind {
        PhotonKind::Dressed => params.structure_function(n),
        PhotonKind::Real => n as f64,
    };
    let c = cs.coeffs();
    let mut lower1 = Complex64::new(0.0, 0.0);
    let mut lower2 = Complex64::new(0.0, 0.0);
    let mut anti = 0.0;
    for n in 0..c.len() {
        if n >= 1 {
            lower1 += c[n - 1].conj() * c[n] * weight(n).sqrt();
        }
        if n >= 2 {
            lower2 += c[n - 2].conj() * c[n] * (weight(n) * weight(n - 1)).sqrt();
        }
        anti += c[n].norm_sqr() * (weight(n) + weight(n + 1));
    }
    let mean_x = SQRT_2 * lower1.re;
    let mean_p = SQRT_2 * lower1.im;
    let x2 = lower2.re + 0.5 * anti;
    let p2 = -lower2.re + 0.5 * anti;
    QuadratureStats {
        mean_x,
        mean_p,
        var_x: x2 - mean_x * mean_x,
        var_p: p2 - mean_p * mean_p,
        central_x4: f64::NAN,
        central_p4: f64::NAN,
    }
}

/// `|<[x, p]>|^2 / 4 = (lambda^2 / 4)(beta_bar_{mu+1} - beta_bar_mu)^2` for dressed
/// quadratures in sector `mu`; equals `(1 + alpha_mu)^2 / 4`.
pub fn uncertainty_rhs(params: &AlgebraParams, mu: usize) -> f64 {
    let bb = params.beta_bar();
    let l = params.lambda() as f64;
    0.25 * l * l * (bb[mu + 1] - bb[mu]).powi(2)
}

/// Dressed dispersion `<(Delta x)^2>_0 = <(Delta p)^2>_0` in the state `|mu>`.
pub fn vacuum_dispersion(params: &AlgebraParams, mu: usize) -> f64 {
    let bb = params.beta_bar();
    0.5 * params.lambda() as f64 * (bb[mu + 1] + bb[mu])
}

/// Squeezing ratios relative to the `z = 0` state of the same sector.
pub fn squeeze_ratios(cs: &CoherentState, fock: &FockRep, kind: PhotonKind) -> Result<SqueezeRatios> {
    let vacuum = CoherentState::new(cs.params(), cs.mu(), Complex64::new(0.0, 0.0))?;
    let s = quadrature_stats(cs, fock, kind)?;
    let s0 = quadrature_stats(&vacuum, fock, kind)?;
    Ok(ratios(&s, &s0, cs.mu()))
}

fn ratios(s: &QuadratureStats, s0: &QuadratureStats, mu: usize) -> SqueezeRatios {
    SqueezeRatios {
        x: s.var_x / s0.var_x,
        p: s.var_p / s0.var_p,
        y: s.central_x4 / s0.central_x4,
        q4: s.central_p4 / s0.central_p4,
        ground_sector: mu == 0,
    }
}

/// All diagnostics for one state, on a representation sized to the state.
pub fn report(cs: &CoherentState) -> Result<StatsReport> {
    let fock = FockRep::new(cs.params(), cs.n_max().max(cs.params().lambda()))?;
    report_with(cs, &fock)
}

pub fn report_with(cs: &CoherentState, fock: &FockRep) -> Result<StatsReport> {
    let (mean_n, var_n) = number_moments(cs);
    let vacuum = CoherentState::new(cs.params(), cs.mu(), Complex64::new(0.0, 0.0))?;
    let dressed = quadrature_stats(cs, fock, PhotonKind::Dressed)?;
    let real = quadrature_stats(cs, fock, PhotonKind::Real)?;
    let dressed0 = quadrature_stats(&vacuum, fock, PhotonKind::Dressed)?;
    let real0 = quadrature_stats(&vacuum, fock, PhotonKind::Real)?;
    Ok(StatsReport {
        mean_n,
        var_n,
        mandel_q: mandel_q(cs, fock)?,
        dressed,
        real,
        dressed_ratios: ratios(&dressed, &dressed0, cs.mu()),
        real_ratios: ratios(&real, &real0, cs.mu()),
        uncertainty_rhs: uncertainty_rhs(cs.params(), cs.mu()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fock_for(cs: &CoherentState) -> FockRep {
        FockRep::new(cs.params(), cs.n_max().max(cs.params().lambda())).unwrap()
    }

    #[test]
    fn number_state_has_q_minus_one() {
        let p = AlgebraParams::new(3, &[0.2, -0.4, 0.2]).unwrap();
        let cs = CoherentState::new(&p, 1, c(0.0, 0.0)).unwrap();
        let q = mandel_q(&cs, &fock_for(&cs)).unwrap().unwrap();
        assert!((q + 1.0).abs() < 1e-15);
        let vac = CoherentState::new(&p, 0, c(0.0, 0.0)).unwrap();
        assert_eq!(mandel_q(&vac, &fock_for(&vac)).unwrap(), None);
        assert_eq!(mandel_q_series(&vac), None);
    }

    #[test]
    fn even_and_odd_states_q_signs() {
        let p = AlgebraParams::undeformed(2).unwrap();
        let even = CoherentState::new(&p, 0, c(1.0, 0.0)).unwrap();
        let odd = CoherentState::new(&p, 1, c(1.0, 0.0)).unwrap();
        assert!(mandel_q(&even, &fock_for(&even)).unwrap().unwrap() > 0.0);
        let q_odd = mandel_q(&odd, &fock_for(&odd)).unwrap().unwrap();
        assert!(q_odd < 0.0);

        // independent oracle: 60-term series over p_k ~ (2z)^{2k} / (2k+1)!
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let mut w = 1.0;
        for k in 0..60 {
            let n = (2 * k + 1) as f64;
            s0 += w;
            s1 += n * w;
            s2 += n * n * w;
            w *= 4.0 / ((n + 1.0) * (n + 2.0));
        }
        let mean = s1 / s0;
        let var = s2 / s0 - mean * mean;
        let oracle = (var - mean) / mean;
        assert!((q_odd - oracle).abs() < 1e-12, "{q_odd} vs {oracle}");
        // odd cat state b^2 psi = beta^2 psi with beta^2 = 2z, r = |beta|^2
        let r = 2.0_f64;
        let closed = r * (r.tanh() - 1.0 / r.tanh());
        assert!((q_odd - closed).abs() < 1e-12);
    }

    #[test]
    fn matrix_and_series_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for lambda in 2..=5 {
            let p = AlgebraParams::random_admissible(lambda, &mut rng);
            for mu in 0..lambda {
                let cs = CoherentState::new(&p, mu, c(-1.1, 0.8)).unwrap();
                let fock = fock_for(&cs);
                let qm = mandel_q(&cs, &fock).unwrap().unwrap();
                let qs = mandel_q_series(&cs).unwrap();
                assert!((qm - qs).abs() < 1e-11);
                for kind in [PhotonKind::Dressed, PhotonKind::Real] {
                    let m = quadrature_stats(&cs, &fock, kind).unwrap();
                    let s = quadrature_series(&cs, kind);
                    for (a, b) in [
                        (m.mean_x, s.mean_x),
                        (m.mean_p, s.mean_p),
                        (m.var_x, s.var_x),
                        (m.var_p, s.var_p),
                    ] {
                        assert!((a - b).abs() < 1e-11, "lambda {lambda} mu {mu} {kind}: {a} vs {b}");
                    }
                    assert!(m.central_x4 >= m.var_x * m.var_x - 1e-10);
                    assert!(m.central_p4 >= m.var_p * m.var_p - 1e-10);
                }
            }
        }
    }

    #[test]
    fn support_separation_for_higher_lambda() {
        let p = AlgebraParams::new(3, &[0.3, 0.1, -0.4]).unwrap();
        for mu in 0..3 {
            let cs = CoherentState::new(&p, mu, c(1.4, -2.0)).unwrap();
            let fock = fock_for(&cs);
            let d = quadrature_stats(&cs, &fock, PhotonKind::Dressed).unwrap();
            let r = quadrature_stats(&cs, &fock, PhotonKind::Real).unwrap();
            for v in [d.mean_x, d.mean_p, r.mean_x, r.mean_p] {
                assert!(v.abs() < 1e-15);
            }
            // <x^2> is the F-weighted diagonal sum
            let diag: f64 = cs
                .probabilities()
                .iter()
                .enumerate()
                .map(|(n, w)| w * 0.5 * (p.structure_function(n) + p.structure_function(n + 1)))
                .sum();
            assert!((d.var_x - diag).abs() < 1e-12);
            assert!((d.var_p - diag).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda2_first_moments_vanish_but_second_order_terms_do_not() {
        let p = AlgebraParams::new(2, &[0.4, -0.4]).unwrap();
        let cs = CoherentState::new(&p, 0, c(0.7, 0.2)).unwrap();
        let fock = fock_for(&cs);
        let r = quadrature_stats(&cs, &fock, PhotonKind::Real).unwrap();
        assert!(r.mean_x.abs() < 1e-15 && r.mean_p.abs() < 1e-15);
        let v = cs.padded(fock.dim());
        let b2v = apply(&(fock.b() * fock.b()), &v);
        assert!(expectation(&v, &b2v).norm() > 0.1);
    }

    #[test]
    fn vacuum_dispersions() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for lambda in 2..=5 {
            let p = AlgebraParams::random_admissible(lambda, &mut rng);
            for mu in 0..lambda {
                let cs = CoherentState::new(&p, mu, c(0.0, 0.0)).unwrap();
                let d = quadrature_stats(&cs, &fock_for(&cs), PhotonKind::Dressed).unwrap();
                let expect = vacuum_dispersion(&p, mu);
                assert!((d.var_x - expect).abs() < 1e-14);
                assert!((d.var_p - expect).abs() < 1e-14);
            }
        }
        let p = AlgebraParams::new(3, &[0.5, 0.2, -0.7]).unwrap();
        let cs = CoherentState::new(&p, 0, c(0.0, 0.0)).unwrap();
        let r = quadrature_stats(&cs, &fock_for(&cs), PhotonKind::Real).unwrap();
        assert!((r.var_x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vacuum_dispersion_below_half_for_some_admissible_parameters() {
        // beta = [0, -0.9, -1.5, 0]; the top sector always has dispersion >= lambda / 2
        let p = AlgebraParams::new(3, &[-0.9, -0.6, 1.5]).unwrap();
        assert!(vacuum_dispersion(&p, 0) < 0.5);
        assert!(vacuum_dispersion(&p, 1) < 0.5);
        assert!(vacuum_dispersion(&p, 2) >= 0.5);
    }

    #[test]
    fn uncertainty_rhs_examples() {
        let u = AlgebraParams::undeformed(4).unwrap();
        for mu in 0..4 {
            assert!((uncertainty_rhs(&u, mu) - 0.25).abs() < 1e-15);
        }
        let p = AlgebraParams::new(2, &[-0.5, 0.5]).unwrap();
        assert!((uncertainty_rhs(&p, 0) - 1.0 / 16.0).abs() < 1e-15);
        let p = AlgebraParams::new(3, &[-0.1, 0.4, -0.3]).unwrap();
        assert!((uncertainty_rhs(&p, 1) - 0.49).abs() < 1e-14);
        for mu in 0..3 {
            assert!((uncertainty_rhs(&p, mu) - (1.0 + p.alpha()[mu]).powi(2) / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn uncertainty_relation_and_minimum_at_ground_sector() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for lambda in 2..=5 {
            let p = AlgebraParams::random_admissible(lambda, &mut rng);
            for mu in 0..lambda {
                for z in [c(0.0, 0.0), c(0.6, -1.2), c(-2.0, 0.0)] {
                    let cs = CoherentState::new(&p, mu, z).unwrap();
                    let d = quadrature_stats(&cs, &fock_for(&cs), PhotonKind::Dressed).unwrap();
                    let rhs = uncertainty_rhs(&p, mu);
                    assert!(d.var_x * d.var_p >= rhs - 1e-10);
                    if z.norm() == 0.0 {
                        let gap = d.var_x * d.var_p - rhs;
                        if mu == 0 {
                            assert!(gap.abs() < 1e-12);
                        } else {
                            assert!(gap > 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ratios_at_zero_label_are_one() {
        let p = AlgebraParams::new(2, &[0.3, -0.3]).unwrap();
        let cs = CoherentState::new(&p, 0, c(0.0, 0.0)).unwrap();
        for kind in [PhotonKind::Dressed, PhotonKind::Real] {
            let r = squeeze_ratios(&cs, &fock_for(&cs), kind).unwrap();
            assert_eq!((r.x, r.p, r.y, r.q4), (1.0, 1.0, 1.0, 1.0));
            assert!(r.ground_sector);
        }
    }

    #[test]
    fn lambda2_x_and_p_exchange_under_real_part_reflection() {
        let p = AlgebraParams::new(2, &[0.8, -0.8]).unwrap();
        for (re, im) in [(0.5, 0.3), (-1.5, 2.0), (3.0, -0.1)] {
            let a = CoherentState::new(&p, 0, c(re, im)).unwrap();
            let b = CoherentState::new(&p, 0, c(-re, im)).unwrap();
            let ra = squeeze_ratios(&a, &fock_for(&a), PhotonKind::Dressed).unwrap();
            let rb = squeeze_ratios(&b, &fock_for(&b), PhotonKind::Dressed).unwrap();
            assert!((ra.x - rb.p).abs() < 1e-10);
            assert!((ra.p - rb.x).abs() < 1e-10);
        }
    }

    #[test]
    fn report_is_consistent() {
        let p = AlgebraParams::new(2, &[1.0, -1.0]).unwrap();
        let cs = CoherentState::new(&p, 0, c(-2.0, 0.0)).unwrap();
        let r = report(&cs).unwrap();
        assert!(r.dressed_ratios.x < 1.0);
        assert!(r.var_n >= 0.0);
        assert_eq!(r.uncertainty_rhs, 1.0);
        assert!(r.mandel_q.is_some());
        assert_eq!("dressed".parse::<PhotonKind>().unwrap(), PhotonKind::Dressed);
        assert!("virtual".parse::<PhotonKind>().is_err());
    }
}
