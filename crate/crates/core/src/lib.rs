//! Nonlinear uncertainty propagation with Taylor polynomials, Gaussian
//! mixtures and polynomial moment recursions for SDEs.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

pub mod constants;
pub mod da;
pub mod dynamics;
pub mod error;
pub mod gmm;
pub mod linalg;
pub mod mc;
pub mod metrics;
pub mod mfup;
pub mod nonlinearity;
pub mod plasma;
pub mod scalar;

pub use da::{MultiIndex, TaylorPoly};
pub use error::{Error, Result};
pub use scalar::Scalar;
