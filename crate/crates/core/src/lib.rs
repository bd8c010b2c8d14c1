//! Numerics for the `C_lambda`-extended oscillator: truncated Fock-space
//! representations, the spectrum-generating algebra, coherent states of the
//! lowering generator, their photon statistics and the unity-resolving measure.

pub mod algebra;
pub mod coherent;
pub mod error;
pub mod measure;
pub mod quadrature;
pub mod sga;
pub mod specfun;
pub mod stats;
pub mod verify;

pub use algebra::{AlgebraParams, FockRep};
pub use coherent::CoherentState;
pub use error::{Error, Result};
pub use sga::{SgaPolynomials, SgaRep};
pub use stats::{PhotonKind, StatsReport};
pub use verify::{Suite, VerifyOptions, VerifyReport};
