use serde::{Deserialize, Serialize};

use super::StochasticMap;
use crate::da::TaylorPoly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Noisy Duffing map `x' = y`, `y' = -b x + a y - y³ + σ w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

impl DuffingParams {
    pub fn new(a: f64, b: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !a.is_finite() || !b.is_finite() || !sigma.is_finite() {
            return Err(Error::invalid("Duffing parameters must be finite with sigma >= 0"));
        }
        Ok(DuffingParams { a, b, sigma })
    }
}

/// One application of the map. Shared by the real stepper, the polynomial
/// stepper and the closed-form moments, so their nominal sequences agree to
/// the last bit.
pub fn duffing_map<T: Scalar>(p: &DuffingParams, x: &T, y: &T, w: &T) -> (T, T) {
    let y3 = y.square() * y.clone();
    let ny = x.clone() * (-p.b) + y.clone() * p.a - y3 + w.clone() * p.sigma;
    (y.clone(), ny)
}

pub fn duffing_step(state: [f64; 2], p: &DuffingParams, w: f64) -> [f64; 2] {
    let (x, y) = duffing_map(p, &state[0], &state[1], &w);
    [x, y]
}

impl StochasticMap for DuffingParams {
    fn state_dim(&self) -> usize {
        2
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn apply_real(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        check(x.len(), w.len())?;
        let (a, b) = duffing_map(self, &x[0], &x[1], &w[0]);
        Ok(vec![a, b])
    }
    fn apply_da(&self, x: &[TaylorPoly], w: &[TaylorPoly]) -> Result<Vec<TaylorPoly>> {
        check(x.len(), w.len())?;
        let (a, b) = duffing_map(self, &x[0], &x[1], &w[0]);
        Ok(vec![a, b])
    }
}

fn check(n: usize, m: usize) -> Result<()> {
    if n != 2 || m != 1 {
        return Err(Error::dim(format!("Duffing map takes 2 states and 1 noise input, got {n} and {m}")));
    }
    Ok(())
}

/// Second-order moment recursion of the Duffing map at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingMoments {
    /// Noise-free central state `(x̂, ŷ)`.
    pub central: [f64; 2],
    /// Effective-noise moments `E[ΔŴ^r]` for `r = (1,0), (0,1), (2,0), (1,1), (0,2)`.
    pub noise: [f64; 5],
    /// `E[X], E[Y], E[X²], E[XY], E[Y²]`.
    pub raw: [f64; 5],
    /// `P_xx, P_xy, P_yy`.
    pub cov: [f64; 3],
}

/// Closed-form second-order moment recursion from a deterministic initial
/// state. Entry `k` holds the moments after `k` steps.
pub fn duffing_closed_form_moments(ic: [f64; 2], p: &DuffingParams, steps: usize) -> Vec<DuffingMoments> {
    let (a, b, s2) = (p.a, p.b, p.sigma * p.sigma);
    let mut out = Vec::with_capacity(steps + 1);
    let mut c = ic;
    let mut e = [0.0; 5];
    out.push(assemble(c, e));
    for _ in 0..steps {
        let yh = c[1];
        let cc = a - 3.0 * yh * yh;
        let [e10, e01, e20, e11, e02] = e;
        e = [
            e01,
            -b * e10 + cc * e01 - 3.0 * yh * e02,
            e02,
            -b * e11 + cc * e02,
            b * b * e20 - 2.0 * b * cc * e11 + cc * cc * e02 + s2,
        ];
        c = duffing_step(c, p, 0.0);
        out.push(assemble(c, e));
    }
    out
}

fn assemble(c: [f64; 2], e: [f64; 5]) -> DuffingMoments {
    let [x, y] = c;
    let [e10, e01, e20, e11, e02] = e;
    DuffingMoments {
        central: c,
        noise: e,
        raw: [
            x + e10,
            y + e01,
            x * x + 2.0 * x * e10 + e20,
            x * y + y * e10 + x * e01 + e11,
            y * y + 2.0 * y * e01 + e02,
        ],
        cov: [e20 - e10 * e10, e11 - e10 * e01, e02 - e01 * e01],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_and_plugged_value() {
        let p = DuffingParams::new(2.75, 0.2, 0.0).unwrap();
        assert_eq!(duffing_step([0.0, 0.0], &p, 0.0), [0.0, 0.0]);
        let q = DuffingParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(duffing_step([0.0, 1.0], &q, 0.0), [1.0, 0.0]);
    }

    #[test]
    fn noise_enters_second_component_only() {
        let p = DuffingParams::new(2.75, 0.2, 0.1).unwrap();
        let a = duffing_step([0.3, -0.2], &p, 0.0);
        let b = duffing_step([0.3, -0.2], &p, 1.0);
        assert_eq!(a[0], b[0]);
        assert!((b[1] - a[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn noiseless_recursion_stays_zero() {
        let p = DuffingParams::new(2.75, 0.2, 0.0).unwrap();
        for m in duffing_closed_form_moments([0.1, 0.1], &p, 30) {
            assert_eq!(m.noise, [0.0; 5]);
        }
    }

    #[test]
    fn first_step_has_only_noise_variance() {
        let p = DuffingParams::new(2.75, 0.2, 0.1).unwrap();
        let m = duffing_closed_form_moments([0.1, 0.1], &p, 1);
        assert_eq!(m[1].noise, [0.0, 0.0, 0.0, 0.0, 0.1 * 0.1]);
        assert!((m[1].cov[2] - 0.01).abs() < 1e-17);
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(DuffingParams::new(1.0, 1.0, -0.1).is_err());
    }
}
