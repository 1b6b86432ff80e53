//! Truncated multivariate Taylor algebra.
//!
//! A [`TaylorPoly`] holds the coefficients of a polynomial in `n` deviation
//! variables `δx`, truncated at total order `k`. Evaluating a program on such
//! polynomials yields the order-`k` Taylor expansion of its output about the
//! constant parts of the inputs.

mod domain;
mod intrinsics;
mod multi_index;
mod poly;
mod space;

pub use domain::UncertaintyDomain;
pub use multi_index::{dimension, enumerate, MultiIndex};
pub use poly::{identity_vars, PolyText, TaylorPoly};
pub use space::{DaSpace, MAX_MONOMIALS};
