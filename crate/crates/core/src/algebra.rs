//! Parameters of the `C_lambda`-extended oscillator and truncated Fock-space
//! matrices for the canonical pair `(b, b†)`, the deformed pair `(a, a†)`,
//! the number operator, the sector projectors and the Hamiltonian.
//!
//! The Fock space splits into `lambda` sectors `F_mu = span{|k lambda + mu>}`.
//! The deformed operators act as
//!
//! ```text
//! a† |n> = sqrt(F(n+1)) |n+1>,   a |n> = sqrt(F(n)) |n-1>,   F(n) = n + beta_{n mod lambda}
//! ```
//!
//! so that `[a, a†] = I + sum_mu alpha_mu P_mu`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// Sum-constraint slack accepted before re-centering alpha.
pub const ALPHA_SUM_TOL: f64 = 1e-9;

/// Validated algebra parameters and every quantity derived from them.
///
/// Indices `mu + 1` wrap modulo `lambda` for `alpha` and `gamma`; `beta` and
/// `beta_bar` carry the extra entry `mu = lambda` (`beta_lambda = 0`,
/// `beta_bar_lambda = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraParams {
    lambda: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    beta_bar: Vec<f64>,
    gamma: Vec<f64>,
}

impl AlgebraParams {
    /// Validate `alpha` for the given `lambda` and derive `beta`, `beta_bar`, `gamma`.
    pub fn new(lambda: usize, alpha: &[f64]) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::LambdaTooSmall(lambda));
        }
        if alpha.len() != lambda {
            return Err(Error::AlphaLength {
                expected: lambda,
                got: alpha.len(),
            });
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("alpha entries must be finite".into()));
        }
        let sum: f64 = alpha.iter().sum();
        if sum.abs() > ALPHA_SUM_TOL {
            return Err(Error::AlphaSum { sum });
        }
        let mean = sum / lambda as f64;
        let alpha: Vec<f64> = alpha.iter().map(|a| a - mean).collect();

        let mut beta = Vec::with_capacity(lambda + 1);
        let mut acc = 0.0;
        beta.push(0.0);
        for a in &alpha[..lambda - 1] {
            acc += a;
            beta.push(acc);
        }
        // forced by the sum constraint
        beta.push(0.0);

        for mu in 1..lambda {
            let value = beta[mu] + mu as f64;
            if !(value > 0.0) {
                return Err(Error::NonPositiveStructure { mu, value });
            }
        }
        let lf = lambda as f64;
        let beta_bar = (0..=lambda).map(|mu| (beta[mu] + mu as f64) / lf).collect();
        let gamma = (0..lambda).map(|mu| 0.5 * (beta[mu] + beta[mu + 1])).collect();
        Ok(Self {
            lambda,
            alpha,
            beta,
            beta_bar,
            gamma,
        })
    }

    /// The undeformed case `alpha = 0`, where `a = b`.
    pub fn undeformed(lambda: usize) -> Result<Self> {
        Self::new(lambda, &vec![0.0; lambda])
    }

    /// Draw admissible parameters: `alpha_0 .. alpha_{lambda-2}` uniform in
    /// `(-0.9, 0.9)`, the last one fixed by the sum constraint, rejecting draws
    /// with `beta_mu + mu <= 0.05`.
    pub fn random_admissible<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> Self {
        assert!(lambda >= 2, "lambda must be at least 2");
        loop {
            let mut alpha: Vec<f64> = (0..lambda - 1).map(|_| rng.random_range(-0.9..0.9)).collect();
            let last = -alpha.iter().sum::<f64>();
            alpha.push(last);
            if let Ok(p) = Self::new(lambda, &alpha) {
                if (1..lambda).all(|mu| p.beta[mu] + mu as f64 > 0.05) {
                    return p;
                }
            }
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `beta_mu = sum_{nu < mu} alpha_nu` for `mu = 0 ..= lambda`.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `beta_bar_mu = (beta_mu + mu) / lambda` for `mu = 0 ..= lambda`.
    pub fn beta_bar(&self) -> &[f64] {
        &self.beta_bar
    }

    /// `gamma_mu = (beta_mu + beta_{mu+1}) / 2`.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `alpha` with cyclic indexing.
    pub fn alpha_cyclic(&self, mu: usize) -> f64 {
        self.alpha[mu % self.lambda]
    }

    pub fn sector(&self, n: usize) -> usize {
        n % self.lambda
    }

    pub fn is_undeformed(&self) -> bool {
        self.alpha.iter().all(|a| *a == 0.0)
    }

    /// `F(n) = n + beta_{n mod lambda}`; `F(0) = 0`.
    pub fn structure_function(&self, n: usize) -> f64 {
        n as f64 + self.beta[n % self.lambda]
    }

    /// Eigenvalue of `H_0` on `|n>`: `n + gamma_{n mod lambda} + 1/2`.
    pub fn energy(&self, n: usize) -> f64 {
        n as f64 + self.gamma[n % self.lambda] + 0.5
    }

    /// Right-hand side of `[a, a†] = I + sum alpha_mu P_mu` on `|n>`.
    pub fn commutator_eigenvalue(&self, n: usize) -> f64 {
        1.0 + self.alpha[n % self.lambda]
    }
}

/// Dense matrices of all operators on the truncated basis `|0> .. |n_max>`.
#[derive(Debug, Clone)]
pub struct FockRep {
    params: AlgebraParams,
    n_max: usize,
    number: DMatrix<f64>,
    a: DMatrix<f64>,
    a_dag: DMatrix<f64>,
    b: DMatrix<f64>,
    b_dag: DMatrix<f64>,
    projectors: Vec<DMatrix<f64>>,
    h0: DMatrix<f64>,
}

impl FockRep {
    pub fn new(params: &AlgebraParams, n_max: usize) -> Result<Self> {
        Self::with_structure_offset(params, n_max, 0.0)
    }

    /// Build with `F(n) + offset` (for `n >= 1`) in place of `F(n)`.
    ///
    /// Only meant for mutation tests of the verification suites.
    #[doc(hidden)]
    pub fn with_structure_offset(params: &AlgebraParams, n_max: usize, offset: f64) -> Result<Self> {
        let lambda = params.lambda();
        if n_max < lambda {
            return Err(Error::TruncationTooSmall {
                n_max,
                reason: format!("need n_max >= lambda = {lambda}"),
            });
        }
        let dim = n_max + 1;
        let number = DMatrix::from_fn(dim, dim, |i, j| if i == j { i as f64 } else { 0.0 });
        let a = DMatrix::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                (params.structure_function(j) + offset).sqrt()
            } else {
                0.0
            }
        });
        let b = DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
        let a_dag = a.transpose();
        let b_dag = b.transpose();
        let projectors = (0..lambda)
            .map(|mu| DMatrix::from_fn(dim, dim, |i, j| if i == j && i % lambda == mu { 1.0 } else { 0.0 }))
            .collect();
        let h0 = (&a * &a_dag + &a_dag * &a) * 0.5;
        Ok(Self {
            params: params.clone(),
            n_max,
            number,
            a,
            a_dag,
            b,
            b_dag,
            projectors,
            h0,
        })
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn number(&self) -> &DMatrix<f64> {
        &self.number
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_dag(&self) -> &DMatrix<f64> {
        &self.a_dag
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn b_dag(&self) -> &DMatrix<f64> {
        &self.b_dag
    }

    pub fn projector(&self, mu: usize) -> &DMatrix<f64> {
        &self.projectors[mu]
    }

    pub fn projectors(&self) -> &[DMatrix<f64>] {
        &self.projectors
    }

    pub fn h0(&self) -> &DMatrix<f64> {
        &self.h0
    }

    /// Klein operator `K = (-1)^N`.
    pub fn parity(&self) -> DMatrix<f64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                0.0
            } else if i % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    /// `I + sum_mu alpha_mu P_mu`.
    pub fn commutator_target(&self) -> DMatrix<f64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                self.params.commutator_eigenvalue(i)
            } else {
                0.0
            }
        })
    }
}

/// `[x, y] = xy - yx`.
pub fn commutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

/// `{x, y} = xy + yx`.
pub fn anticommutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y + y * x
}

/// Largest absolute entry of `m` over rows and columns `0..size`.
pub fn block_max_abs(m: &DMatrix<f64>, size: usize) -> f64 {
    let size = size.min(m.nrows()).min(m.ncols());
    m.view((0, 0), (size, size)).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
