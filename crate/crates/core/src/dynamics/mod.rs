//! Built-in dynamical models, explicit integrators and orbital-element
//! conversions. Every model is written once, generically over [`Scalar`], so
//! the same code runs on real states and on Taylor-polynomial states.

mod duffing;
mod elements;
mod integrators;
mod kepler;
mod linear;
mod orbital;

pub use duffing::{duffing_closed_form_moments, duffing_map, duffing_step, DuffingMoments, DuffingParams};
pub use elements::{convert, unwrap_angle, CoordSet};
pub use integrators::{em_step, propagate, rk4_step, rk4_step_fn, time_grid};
pub use kepler::{kepler_planar_sde, KeplerSdeParams};
pub use linear::LinearSde;
pub use orbital::{j2_acceleration, thrust_sde, ThrustSdeParams, TwoBodyJ2};

use crate::da::TaylorPoly;
use crate::error::Result;
use crate::scalar::Scalar;

/// A model written once for any [`Scalar`] field.
///
/// Implementors get [`SdeModel`] for free.
pub trait GenericSde: Send + Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    /// Drift `u(x, t)`.
    fn drift<T: Scalar>(&self, x: &[T], t: f64) -> Result<Vec<T>>;
    /// Diffusion `G(x, t)` as `n` rows of `m` entries.
    fn diffusion<T: Scalar>(&self, x: &[T], t: f64) -> Result<Vec<Vec<T>>>;
}

/// `dX = u(X, t) dt + G(X, t) dW`, evaluable on reals and polynomials.
pub trait SdeModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn drift_real(&self, x: &[f64], t: f64) -> Result<Vec<f64>>;
    fn drift_da(&self, x: &[TaylorPoly], t: f64) -> Result<Vec<TaylorPoly>>;
    fn diffusion_real(&self, x: &[f64], t: f64) -> Result<Vec<Vec<f64>>>;
    fn diffusion_da(&self, x: &[TaylorPoly], t: f64) -> Result<Vec<Vec<TaylorPoly>>>;
}

impl<M: GenericSde> SdeModel for M {
    fn state_dim(&self) -> usize {
        GenericSde::state_dim(self)
    }
    fn noise_dim(&self) -> usize {
        GenericSde::noise_dim(self)
    }
    fn drift_real(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.drift(x, t)
    }
    fn drift_da(&self, x: &[TaylorPoly], t: f64) -> Result<Vec<TaylorPoly>> {
        self.drift(x, t)
    }
    fn diffusion_real(&self, x: &[f64], t: f64) -> Result<Vec<Vec<f64>>> {
        self.diffusion(x, t)
    }
    fn diffusion_da(&self, x: &[TaylorPoly], t: f64) -> Result<Vec<Vec<TaylorPoly>>> {
        self.diffusion(x, t)
    }
}

/// Field dispatch for [`SdeModel`] trait objects.
pub trait SdeField: Scalar {
    fn drift(model: &dyn SdeModel, x: &[Self], t: f64) -> Result<Vec<Self>>;
    fn diffusion(model: &dyn SdeModel, x: &[Self], t: f64) -> Result<Vec<Vec<Self>>>;
}

impl SdeField for f64 {
    fn drift(model: &dyn SdeModel, x: &[f64], t: f64) -> Result<Vec<f64>> {
        model.drift_real(x, t)
    }
    fn diffusion(model: &dyn SdeModel, x: &[f64], t: f64) -> Result<Vec<Vec<f64>>> {
        model.diffusion_real(x, t)
    }
}

impl SdeField for TaylorPoly {
    fn drift(model: &dyn SdeModel, x: &[TaylorPoly], t: f64) -> Result<Vec<TaylorPoly>> {
        model.drift_da(x, t)
    }
    fn diffusion(model: &dyn SdeModel, x: &[TaylorPoly], t: f64) -> Result<Vec<Vec<TaylorPoly>>> {
        model.diffusion_da(x, t)
    }
}

/// A discrete-time stochastic map `x_k = Φ(x_{k-1}, w_k)` with unit-variance
/// noise, usable as a one-step integrator with `h = 1`.
pub trait StochasticMap: Send + Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn apply_real(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>>;
    fn apply_da(&self, x: &[TaylorPoly], w: &[TaylorPoly]) -> Result<Vec<TaylorPoly>>;
}

/// Drift-only view of a model with the diffusion switched off.
pub struct Deterministic<'a>(pub &'a dyn SdeModel);

impl SdeModel for Deterministic<'_> {
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }
    fn noise_dim(&self) -> usize {
        0
    }
    fn drift_real(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.0.drift_real(x, t)
    }
    fn drift_da(&self, x: &[TaylorPoly], t: f64) -> Result<Vec<TaylorPoly>> {
        self.0.drift_da(x, t)
    }
    fn diffusion_real(&self, x: &[f64], _t: f64) -> Result<Vec<Vec<f64>>> {
        Ok(vec![Vec::new(); x.len()])
    }
    fn diffusion_da(&self, x: &[TaylorPoly], _t: f64) -> Result<Vec<Vec<TaylorPoly>>> {
        Ok(vec![Vec::new(); x.len()])
    }
}

/// `G(x) w` for an `n x m` diffusion.
pub(crate) fn mat_vec<T: Scalar>(g: &[Vec<T>], w: &[T]) -> Option<Vec<T>> {
    g.iter()
        .map(|row| {
            let mut it = row.iter().zip(w);
            let (a, b) = it.next()?;
            let mut acc = a.clone() * b.clone();
            for (a, b) in it {
                acc = acc + a.clone() * b.clone();
            }
            Some(acc)
        })
        .collect()
}
