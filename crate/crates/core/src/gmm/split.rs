//! Symmetric three-component splitting library for the standard normal.
//!
//! The library approximates `N(0, 1)` by
//! `w N(-m, σ̃²) + w₀ N(0, σ̃²) + w N(m, σ̃²)` with `w₀ = 1 - 2w`, chosen to
//! minimise the L2 distance between the two densities plus `λ σ̃²`. The
//! penalty is what forces `σ̃ < 1`: at `λ = 0` the trivial `σ̃ = 1` solution
//! is exact and no split happens.
//!
//! The search is nested. For fixed `(σ̃, m)` the cost is quadratic in `w` and
//! minimised in closed form; `m` and then `σ̃` are found by grid scans
//! refined with golden-section search.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitLibrary3 {
    /// Outer weight `w`; the weights are `[w, 1 - 2w, w]`.
    pub w: f64,
    /// Offset `m`; the means are `[-m, 0, m]`.
    pub m: f64,
    /// Common standard deviation `σ̃`.
    pub sigma: f64,
    pub lambda: f64,
    /// Objective value at the optimum.
    pub cost: f64,
}

impl SplitLibrary3 {
    pub fn weights(&self) -> [f64; 3] {
        [self.w, 1.0 - 2.0 * self.w, self.w]
    }

    pub fn offsets(&self) -> [f64; 3] {
        [-self.m, 0.0, self.m]
    }

    /// `2w(m² + σ̃²) + w₀σ̃²`
    pub fn mixture_variance(&self) -> f64 {
        let w0 = 1.0 - 2.0 * self.w;
        2.0 * self.w * (self.m * self.m + self.sigma * self.sigma) + w0 * self.sigma * self.sigma
    }

    /// L2 distance between `N(0, 1)` and the split mixture (closed form).
    pub fn l2_distance(&self) -> f64 {
        l2_at(self.sigma, self.m, self.w)
    }
}

/// `N(d; 0, v)`
fn g(d: f64, v: f64) -> f64 {
    (-d * d / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

/// Squared L2 distance as `a - 2 w b + w² c`.
fn quadratic_in_w(sigma: f64, m: f64) -> (f64, f64, f64) {
    let s2 = sigma * sigma;
    let v = 2.0 * s2;
    let a = g(0.0, 2.0) - 2.0 * g(0.0, 1.0 + s2) + g(0.0, v);
    let b = (2.0 * g(m, 1.0 + s2) - 2.0 * g(0.0, 1.0 + s2)) - (2.0 * g(m, v) - 2.0 * g(0.0, v));
    let c = 6.0 * g(0.0, v) + 2.0 * g(2.0 * m, v) - 8.0 * g(m, v);
    (a, b, c)
}

fn l2_at(sigma: f64, m: f64, w: f64) -> f64 {
    let (a, b, c) = quadratic_in_w(sigma, m);
    (a - 2.0 * w * b + w * w * c).max(0.0)
}

fn best_w(sigma: f64, m: f64) -> (f64, f64) {
    let (a, b, c) = quadratic_in_w(sigma, m);
    let w = if c > 0.0 { (b / c).clamp(0.0, 0.5) } else { 0.0 };
    (w, (a - 2.0 * w * b + w * w * c).max(0.0))
}

/// Minimises a 1-D function: grid scan over `[lo, hi]`, then golden section
/// inside the bracket around the best grid point.
fn minimize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize, tol: f64) -> (f64, f64, f64) {
    let step = (hi - lo) / grid as f64;
    let mut best = (lo, f(lo));
    for i in 1..=grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let mut a = (best.0 - step).max(lo);
    let mut b = (best.0 + step).min(hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v < best.1 {
        (x, v, b - a)
    } else {
        (best.0, best.1, b - a)
    }
}

static CACHE: Lazy<Mutex<HashMap<u64, SplitLibrary3>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Solves (and caches) the splitting library for penalty `lambda`.
pub fn build_split_library(lambda: f64) -> Result<SplitLibrary3> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("penalty λ must be finite and >= 0, got {lambda}")));
    }
    if let Some(lib) = CACHE.lock().expect("split cache poisoned").get(&lambda.to_bits()) {
        return Ok(*lib);
    }
    let tol = 1e-11;
    let inner = |sigma: f64| {
        let (m, cost, _) = minimize_1d(|m| best_w(sigma, m).1, 0.0, 4.0, 200, tol);
        (m, cost + lambda * sigma * sigma)
    };
    let (sigma, cost, width) = minimize_1d(|s| inner(s).1, 0.02, 1.0, 196, tol);
    let (m, _) = inner(sigma);
    let (w, _) = best_w(sigma, m);
    if !(cost.is_finite() && width <= 10.0 * tol) {
        return Err(Error::Optimizer {
            residual: width,
            message: format!("split library search did not converge for λ = {lambda}"),
        });
    }
    let lib = SplitLibrary3 {
        w,
        m,
        sigma,
        lambda,
        cost,
    };
    CACHE
        .lock()
        .expect("split cache poisoned")
        .insert(lambda.to_bits(), lib);
    Ok(lib)
}
