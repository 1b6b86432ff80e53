//! Adaptive Gaussian-mixture propagation.
//!
//! A mixture is pushed through a polynomial map kernel by kernel. Kernels whose
//! image is too nonlinear (by the DA nonlinearity index) are split with a
//! fixed three-component library and processed again; accepted kernels get
//! their image moments from the unscented transform of the mapped polynomial.
//! Mixture weights are carried unchanged.

mod adaptive;
mod kernel;
mod split;
mod ut;

pub use adaptive::{adaptive_propagate, AdaptConfig, AdaptiveResult, PolyMap};
pub use kernel::{
    mixture_moments, split_kernel, GaussKernel, KernelId, KernelText, Manifold, ManifoldText, Side,
};
pub use split::{build_split_library, SplitLibrary3};
pub use ut::{default_kappa, ut_sigma, ut_transform, weighted_moments};
