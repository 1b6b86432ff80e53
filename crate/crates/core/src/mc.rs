//! Monte Carlo reference for SDEs and stochastic maps.
//!
//! Every path owns a ChaCha stream selected by its index, so samples do not
//! depend on how paths are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::da::{enumerate, MultiIndex};
use crate::dynamics::{mat_vec, rk4_step, time_grid, SdeModel, StochasticMap};
use crate::error::{Error, Result};
use crate::linalg::eigen_sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McScheme {
    EulerMaruyama,
    /// Deterministic RK4 step followed by `G(x_k) Δw`.
    Rk4AdditiveNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub base_seed: u64,
    pub step: f64,
    pub scheme: McScheme,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths must be at least 1"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid("step must be positive"));
        }
        Ok(())
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// Initial-condition distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum IcSampler {
    Fixed(Vec<f64>),
    /// `mean + S z` with `S Sᵀ = P` and `z` standard normal.
    Gaussian { mean: DVector<f64>, sqrt_cov: DMatrix<f64> },
}

impl IcSampler {
    pub fn gaussian(mean: DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::dim("mean and covariance sizes differ"));
        }
        Ok(IcSampler::Gaussian {
            mean,
            sqrt_cov: eigen_sqrt(cov)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            IcSampler::Fixed(x) => x.len(),
            IcSampler::Gaussian { mean, .. } => mean.len(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            IcSampler::Fixed(x) => x.clone(),
            IcSampler::Gaussian { mean, sqrt_cov } => {
                let z = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| StandardNormal.sample(rng)));
                (mean + sqrt_cov * z).as_slice().to_vec()
            }
        }
    }
}

/// Terminal states of the surviving paths, in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct McSamples {
    pub samples: Vec<Vec<f64>>,
    /// Indices of paths dropped after a non-finite state or model failure.
    pub failed: Vec<usize>,
}

impl McSamples {
    fn collect(results: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let mut samples = Vec::with_capacity(results.len());
        let mut failed = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Some(x) => samples.push(x),
                None => failed.push(i),
            }
        }
        if samples.is_empty() {
            return Err(Error::invalid(format!("all {} Monte Carlo paths failed", failed.len())));
        }
        Ok(McSamples { samples, failed })
    }
}

fn one_path(model: &dyn SdeModel, ic: &IcSampler, grid: &[f64], cfg: &McConfig, path: usize) -> Option<Vec<f64>> {
    let mut rng = cfg.rng(path);
    let mut x = ic.draw(&mut rng);
    let m = model.noise_dim();
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let sd = h.sqrt();
        let dw: Vec<f64> = (0..m).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        }).collect();
        let det = match cfg.scheme {
            McScheme::EulerMaruyama => {
                let u = model.drift_real(&x, t).ok()?;
                x.iter().zip(u).map(|(xi, ui)| xi + h * ui).collect::<Vec<_>>()
            }
            McScheme::Rk4AdditiveNoise => rk4_step::<f64>(model, &x, t, h).ok()?,
        };
        let gdw = if m == 0 {
            vec![0.0; x.len()]
        } else {
            mat_vec(&model.diffusion_real(&x, t).ok()?, &dw)?
        };
        x = det.into_iter().zip(gdw).map(|(a, b)| a + b).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    Some(x)
}

/// Simulates `cfg.n_paths` independent paths of `model` from `t0` to `tf`.
///
/// Paths are run on the current rayon pool. Results are bit-identical for a
/// fixed `base_seed` regardless of the pool size.
pub fn simulate_paths(model: &dyn SdeModel, ic: &IcSampler, t0: f64, tf: f64, cfg: &McConfig) -> Result<McSamples> {
    cfg.validate()?;
    if ic.dim() != model.state_dim() {
        return Err(Error::dim("initial condition and model state sizes differ"));
    }
    let grid = time_grid(t0, tf, cfg.step)?;
    let results: Vec<Option<Vec<f64>>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| one_path(model, ic, &grid, cfg, p))
        .collect();
    McSamples::collect(results)
}

/// Iterates a stochastic map `steps` times with standard-normal inputs.
pub fn simulate_map(map: &dyn StochasticMap, ic: &IcSampler, steps: usize, cfg: &McConfig) -> Result<McSamples> {
    cfg.validate()?;
    if ic.dim() != map.state_dim() {
        return Err(Error::dim("initial condition and map state sizes differ"));
    }
    let m = map.noise_dim();
    let results: Vec<Option<Vec<f64>>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = cfg.rng(p);
            let mut x = ic.draw(&mut rng);
            for _ in 0..steps {
                let w: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                x = map.apply_real(&x, &w).ok()?;
                if x.iter().any(|v| !v.is_finite()) {
                    return None;
                }
            }
            Some(x)
        })
        .collect();
    McSamples::collect(results)
}

/// Pairwise sum; rounding error grows with `log n` rather than `n`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: DVector<f64>,
    /// Unbiased, with `1/(N - 1)`.
    pub cov: DMatrix<f64>,
    /// `E[X^r]` for `|r| <= order` as plain averages, graded order.
    pub raw: Vec<(MultiIndex, f64)>,
}

impl SampleMoments {
    pub fn raw(&self, r: &MultiIndex) -> Option<f64> {
        self.raw.iter().find(|(m, _)| m == r).map(|p| p.1)
    }
}

pub fn sample_moments(samples: &[Vec<f64>], order: usize) -> Result<SampleMoments> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
    }
    let d = samples[0].len();
    if d == 0 || samples.iter().any(|s| s.len() != d) {
        return Err(Error::dim("samples must share a non-zero dimension"));
    }
    let avg = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        let v: Vec<f64> = samples.iter().map(|s| f(s)).collect();
        pairwise_sum(&v) / n as f64
    };
    let mean = DVector::from_iterator(d, (0..d).map(|i| avg(&|s| s[i])));
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = avg(&|s| (s[i] - mean[i]) * (s[j] - mean[j])) * n as f64 / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let raw = enumerate(d, order as u32)
        .into_iter()
        .map(|r| {
            let v = avg(&|s| r.pow(s));
            (r, v)
        })
        .collect();
    Ok(SampleMoments {
        count: n,
        mean,
        cov,
        raw,
    })
}
