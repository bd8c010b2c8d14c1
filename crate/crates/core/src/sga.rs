//! Spectrum generating algebra `J_+ = (a†)^lambda / lambda`,
//! `J_- = a^lambda / lambda`, `J_0 = H_0 / lambda`, and numerical extraction
//! of the deformation polynomials
//!
//! ```text
//! [J_+, J_-] = f(J_0)            (degree lambda - 1, per sector)
//! C = J_- J_+ + h(J_0) = c_mu    (degree lambda, per sector)
//! ```
//!
//! Both are obtained by exact Newton interpolation at the smallest interior
//! levels of each sector and then validated on the remaining interior levels.
//! `h` is only defined up to an additive constant; it is fixed by `h(0) = 0`,
//! which makes `c_mu` the constant term of `J_- J_+` written as a polynomial
//! in `J_0`.

use nalgebra::DMatrix;

use crate::algebra::{AlgebraParams, FockRep};
use crate::error::{Error, Result};

/// Relative tolerance for interpolation residuals on validation levels.
pub const FIT_TOL: f64 = 1e-8;

/// The three generators on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct SgaRep {
    fock: FockRep,
    j_plus: DMatrix<f64>,
    j_minus: DMatrix<f64>,
    j_zero: DMatrix<f64>,
}

impl SgaRep {
    /// Generators built from the deformed pair `(a, a†)`.
    pub fn new(fock: &FockRep) -> Result<Self> {
        Self::from_pair(fock, fock.a(), fock.a_dag(), fock.h0().clone())
    }

    /// Generators built from the canonical pair `(b, b†)`, with
    /// `J_0 = {b, b†} / (2 lambda)`. Coincides with [`SgaRep::new`] for `alpha = 0`.
    pub fn canonical(fock: &FockRep) -> Result<Self> {
        let h = (fock.b() * fock.b_dag() + fock.b_dag() * fock.b()) * 0.5;
        Self::from_pair(fock, fock.b(), fock.b_dag(), h)
    }

    fn from_pair(fock: &FockRep, lower: &DMatrix<f64>, raise: &DMatrix<f64>, h0: DMatrix<f64>) -> Result<Self> {
        let lambda = fock.params().lambda();
        if fock.n_max() < 4 * lambda {
            return Err(Error::TruncationTooSmall {
                n_max: fock.n_max(),
                reason: format!("spectrum generating algebra needs n_max >= 4 lambda = {}", 4 * lambda),
            });
        }
        let inv = 1.0 / lambda as f64;
        let j_plus = matrix_power(raise, lambda) * inv;
        let j_minus = matrix_power(lower, lambda) * inv;
        let j_zero = h0 * inv;
        Ok(Self {
            fock: fock.clone(),
            j_plus,
            j_minus,
            j_zero,
        })
    }

    /// Smallest truncation that supports fitting and validation on
    /// `k = 0 .. 3 lambda - 1` in every sector.
    pub fn recommended_n_max(lambda: usize) -> usize {
        3 * lambda * lambda + lambda
    }

    pub fn fock(&self) -> &FockRep {
        &self.fock
    }

    pub fn params(&self) -> &AlgebraParams {
        self.fock.params()
    }

    pub fn j_plus(&self) -> &DMatrix<f64> {
        &self.j_plus
    }

    pub fn j_minus(&self) -> &DMatrix<f64> {
        &self.j_minus
    }

    pub fn j_zero(&self) -> &DMatrix<f64> {
        &self.j_zero
    }

    /// Levels `n <= interior_limit()` are free of truncation artifacts for
    /// every product of two generators.
    pub fn interior_limit(&self) -> usize {
        self.fock.n_max() - self.params().lambda()
    }

    /// Number of sector levels `k` with `k lambda + mu` interior.
    pub fn interior_levels(&self, mu: usize) -> usize {
        let lambda = self.params().lambda();
        let limit = self.interior_limit();
        if mu > limit {
            0
        } else {
            (limit - mu) / lambda + 1
        }
    }
}

/// Per-sector coefficients of `f` (`s[mu][i]`, degree `lambda - 1`) and `h`
/// (`t[mu][i]`, degree `lambda`, `t[mu][0] = 0`), and Casimir eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SgaPolynomials {
    pub s: Vec<Vec<f64>>,
    pub t: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    /// Largest relative residual of `f` on validation levels.
    pub f_residual: f64,
    /// Largest spread of `J_- J_+ + h(J_0)` (and of `J_+ J_- + h - f`) within a sector.
    pub casimir_spread: f64,
}

/// Coefficients of `f` alone, before `h` is fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FPolynomial {
    pub s: Vec<Vec<f64>>,
    pub residual: f64,
}

/// Evaluate `sum_i coeffs[i] x^i`.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn matrix_power(m: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Monomial coefficients of the polynomial interpolating `(xs[i], ys[i])`,
/// via Newton divided differences.
pub fn interpolate(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    // Horner expansion of the Newton form
    let mut poly = vec![dd[n - 1]];
    for i in (0..n - 1).rev() {
        let mut next = vec![0.0; poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * xs[i];
        }
        next[0] += dd[i];
        poly = next;
    }
    poly
}

struct SectorDiagonals {
    j0: Vec<f64>,
    commutator: Vec<f64>,
    jm_jp: Vec<f64>,
    jp_jm: Vec<f64>,
}

fn sector_diagonals(sga: &SgaRep, mu: usize) -> SectorDiagonals {
    let lambda = sga.params().lambda();
    let levels = sga.interior_levels(mu).min(3 * lambda);
    let jp_jm = sga.j_plus() * sga.j_minus();
    let jm_jp = sga.j_minus() * sga.j_plus();
    let ns: Vec<usize> = (0..levels).map(|k| k * lambda + mu).collect();
    SectorDiagonals {
        j0: ns.iter().map(|&n| sga.j_zero()[(n, n)]).collect(),
        commutator: ns.iter().map(|&n| jp_jm[(n, n)] - jm_jp[(n, n)]).collect(),
        jm_jp: ns.iter().map(|&n| jm_jp[(n, n)]).collect(),
        jp_jm: ns.iter().map(|&n| jp_jm[(n, n)]).collect(),
    }
}

fn require_levels(sga: &SgaRep, needed: usize) -> Result<()> {
    let lambda = sga.params().lambda();
    for mu in 0..lambda {
        if sga.interior_levels(mu) < needed {
            return Err(Error::TruncationTooSmall {
                n_max: sga.fock().n_max(),
                reason: format!(
                    "sector {mu} has {} interior levels, fitting needs {needed}",
                    sga.interior_levels(mu)
                ),
            });
        }
    }
    Ok(())
}

/// Fit `f` per sector through `k = 0 .. lambda - 1` and validate on the rest.
pub fn extract_f_poly(sga: &SgaRep) -> Result<FPolynomial> {
    let lambda = sga.params().lambda();
    require_levels(sga, lambda)?;
    let mut s = Vec::with_capacity(lambda);
    let mut worst = 0.0_f64;
    for mu in 0..lambda {
        let d = sector_diagonals(sga, mu);
        let coeffs = interpolate(&d.j0[..lambda], &d.commutator[..lambda]);
        for (x, y) in d.j0.iter().zip(&d.commutator) {
            let r = (poly_eval(&coeffs, *x) - y).abs() / y.abs().max(1.0);
            worst = worst.max(r);
            if r > FIT_TOL {
                return Err(Error::FitResidual {
                    mu,
                    residual: r,
                    tol: FIT_TOL,
                });
            }
        }
        s.push(coeffs);
    }
    Ok(FPolynomial { s, residual: worst })
}

/// Fit `h` and the Casimir eigenvalues given `f`; checks both forms of the
/// Casimir on every interior level.
pub fn extract_h_poly_and_casimir(sga: &SgaRep, f: &FPolynomial) -> Result<SgaPolynomials> {
    let lambda = sga.params().lambda();
    require_levels(sga, lambda + 1)?;
    let mut t = Vec::with_capacity(lambda);
    let mut c = Vec::with_capacity(lambda);
    let mut spread = 0.0_f64;
    for mu in 0..lambda {
        let d = sector_diagonals(sga, mu);
        let g = interpolate(&d.j0[..=lambda], &d.jm_jp[..=lambda]);
        let casimir = g[0];
        let mut h: Vec<f64> = g.iter().map(|x| -x).collect();
        h[0] = 0.0;
        for k in 0..d.j0.len() {
            let x = d.j0[k];
            let scale = d.jm_jp[k].abs().max(1.0);
            let first = d.jm_jp[k] + poly_eval(&h, x);
            let second = d.jp_jm[k] + poly_eval(&h, x) - poly_eval(&f.s[mu], x);
            let dev = (first - casimir).abs().max((second - casimir).abs()) / scale;
            spread = spread.max(dev);
            if dev > FIT_TOL {
                return Err(Error::NonConstantCasimir { mu, spread: dev });
            }
        }
        t.push(h);
        c.push(casimir);
    }
    Ok(SgaPolynomials {
        s: f.s.clone(),
        t,
        c,
        f_residual: f.residual,
        casimir_spread: spread,
    })
}

/// Both extraction steps.
pub fn extract_polynomials(sga: &SgaRep) -> Result<SgaPolynomials> {
    let f = extract_f_poly(sga)?;
    extract_h_poly_and_casimir(sga, &f)
}

/// Known closed forms for `lambda = 2` (su(1,1)) and `lambda = 3`.
pub fn closed_form(params: &AlgebraParams) -> Option<SgaPolynomials> {
    let lambda = params.lambda();
    let a = |mu: usize| params.alpha_cyclic(mu);
    let (s, t, c): (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) = match lambda {
        2 => (0..2)
            .map(|mu| {
                let am = a(mu);
                (vec![0.0, -2.0], vec![0.0, -1.0, -1.0], (1.0 + am) * (3.0 - am) / 16.0)
            })
            .fold((vec![], vec![], vec![]), push3),
        3 => (0..3)
            .map(|mu| {
                let (am, an) = (a(mu), a(mu + 1));
                let s = vec![-(1.0 + am) * (5.0 - am) / 12.0, -(am + 2.0 * an), -9.0];
                let t = vec![
                    0.0,
                    -(23.0 + 10.0 * am + 12.0 * an - am * am) / 12.0,
                    -(9.0 + am + 2.0 * an) / 2.0,
                    -3.0,
                ];
                let c = (1.0 + am) * (5.0 - am) * (3.0 + am + 2.0 * an) / 72.0;
                (s, t, c)
            })
            .fold((vec![], vec![], vec![]), push3),
        _ => return None,
    };
    Some(SgaPolynomials {
        s,
        t,
        c,
        f_residual: 0.0,
        casimir_spread: 0.0,
    })
}

fn push3(
    mut acc: (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>),
    item: (Vec<f64>, Vec<f64>, f64),
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    acc.0.push(item.0);
    acc.1.push(item.1);
    acc.2.push(item.2);
    acc
}

/// Largest absolute coefficient difference between two sets of polynomials.
pub fn max_deviation(fit: &SgaPolynomials, reference: &SgaPolynomials) -> f64 {
    let coeff_dev = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .zip(y)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max)
    };
    let c_dev = fit
        .c
        .iter()
        .zip(&reference.c)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    coeff_dev(&fit.s, &reference.s)
        .max(coeff_dev(&fit.t, &reference.t))
        .max(c_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{block_max_abs, commutator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sga_for(params: &AlgebraParams) -> SgaRep {
        let fock = FockRep::new(params, SgaRep::recommended_n_max(params.lambda())).unwrap();
        SgaRep::new(&fock).unwrap()
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let coeffs = [0.5, -2.0, 0.25, 3.0];
        let xs: Vec<f64> = (0..4).map(|k| k as f64 + 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| poly_eval(&coeffs, *x)).collect();
        let fit = interpolate(&xs, &ys);
        for (a, b) in fit.iter().zip(coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn generators_by_construction() {
        let p = AlgebraParams::new(3, &[0.2, 0.3, -0.5]).unwrap();
        let sga = sga_for(&p);
        assert!(block_max_abs(&(sga.j_minus() - sga.j_plus().transpose()), sga.fock().dim()) < 1e-12);
        let fock = sga.fock();
        let replay = fock.a_dag() * fock.a_dag() * fock.a_dag() / 3.0;
        assert!(block_max_abs(&(replay - sga.j_plus()), fock.dim()) < 1e-12);
        assert!(block_max_abs(&(fock.h0() / 3.0 - sga.j_zero()), fock.dim()) < 1e-13);
    }

    #[test]
    fn sga_commutation_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lambda in 2..=5 {
            let p = AlgebraParams::random_admissible(lambda, &mut rng);
            let sga = sga_for(&p);
            let interior = sga.interior_limit() + 1;
            let up = commutator(sga.j_zero(), sga.j_plus()) - sga.j_plus();
            let down = commutator(sga.j_zero(), sga.j_minus()) + sga.j_minus();
            let scale = block_max_abs(sga.j_plus(), interior).max(1.0);
            assert!(block_max_abs(&up, interior) < 1e-12 * scale);
            assert!(block_max_abs(&down, interior) < 1e-12 * scale);
            for pm in sga.fock().projectors() {
                assert!(block_max_abs(&commutator(sga.j_zero(), pm), interior) < 1e-12);
                assert!(block_max_abs(&commutator(sga.j_plus(), pm), interior) < 1e-12);
                assert!(block_max_abs(&commutator(sga.j_minus(), pm), interior) < 1e-12);
            }
        }
    }

    #[test]
    fn su11_for_undeformed_lambda2() {
        let p = AlgebraParams::undeformed(2).unwrap();
        let sga = sga_for(&p);
        let c = commutator(sga.j_plus(), sga.j_minus()) + sga.j_zero() * 2.0;
        assert!(block_max_abs(&c, sga.interior_limit() + 1) < 1e-12);
    }

    #[test]
    fn lowering_generator_annihilates_sector_ground_states() {
        let p = AlgebraParams::new(4, &[0.1, -0.3, 0.5, -0.3]).unwrap();
        let sga = sga_for(&p);
        for mu in 0..4 {
            assert!(sga.j_minus().column(mu).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn truncation_checks() {
        let p = AlgebraParams::undeformed(3).unwrap();
        let fock = FockRep::new(&p, 11).unwrap();
        assert!(matches!(SgaRep::new(&fock), Err(Error::TruncationTooSmall { .. })));
        let fock = FockRep::new(&p, 12).unwrap();
        let sga = SgaRep::new(&fock).unwrap();
        // 12 - 3 = 9: levels 0,3,6,9 -> 4 in sector 0, 3 in sector 1
        assert_eq!(sga.interior_levels(0), 4);
        assert_eq!(sga.interior_levels(1), 3);
        assert!(extract_f_poly(&sga).is_ok());
        assert!(matches!(
            extract_polynomials(&sga),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn lambda2_closed_forms() {
        for a0 in [-0.7, 0.0, 0.5, 2.0] {
            let p = AlgebraParams::new(2, &[a0, -a0]).unwrap();
            let fit = extract_polynomials(&sga_for(&p)).unwrap();
            let reference = closed_form(&p).unwrap();
            assert!(max_deviation(&fit, &reference) < 1e-9, "alpha_0 = {a0}: {fit:?}");
        }
    }

    #[test]
    fn lambda3_undeformed_values() {
        let p = AlgebraParams::undeformed(3).unwrap();
        let fit = extract_polynomials(&sga_for(&p)).unwrap();
        for mu in 0..3 {
            assert!((fit.s[mu][0] + 5.0 / 12.0).abs() < 1e-9);
            assert!(fit.s[mu][1].abs() < 1e-9);
            assert!((fit.s[mu][2] + 9.0).abs() < 1e-9);
            assert!((fit.c[mu] - 5.0 / 24.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda3_closed_forms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let p = AlgebraParams::random_admissible(3, &mut rng);
            let fit = extract_polynomials(&sga_for(&p)).unwrap();
            let reference = closed_form(&p).unwrap();
            assert!(max_deviation(&fit, &reference) < 1e-9);
        }
    }

    #[test]
    fn lowest_j0_eigenvalue_per_sector() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for lambda in 2..=5 {
            let p = AlgebraParams::random_admissible(lambda, &mut rng);
            let sga = sga_for(&p);
            for mu in 0..lambda {
                let expect = (mu as f64 + p.gamma()[mu] + 0.5) / lambda as f64;
                let lowest = (0..sga.interior_levels(mu))
                    .map(|k| sga.j_zero()[(k * lambda + mu, k * lambda + mu)])
                    .fold(f64::INFINITY, f64::min);
                assert!((lowest - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn undeformed_fit_matches_canonical_generators() {
        for lambda in 2..=5 {
            let p = AlgebraParams::undeformed(lambda).unwrap();
            let fock = FockRep::new(&p, SgaRep::recommended_n_max(lambda)).unwrap();
            let fit = extract_polynomials(&SgaRep::new(&fock).unwrap()).unwrap();
            let canon = SgaRep::canonical(&fock).unwrap();
            let comm = commutator(canon.j_plus(), canon.j_minus());
            for n in 0..=canon.interior_limit() {
                let value = poly_eval(&fit.s[n % lambda], canon.j_zero()[(n, n)]);
                assert!((value - comm[(n, n)]).abs() < 1e-8 * comm[(n, n)].abs().max(1.0));
            }
        }
    }
}
