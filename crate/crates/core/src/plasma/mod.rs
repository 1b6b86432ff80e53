//! Polynomial moment propagation through stochastic differential equations.
//!
//! Along a deterministic central sequence `x̂_k`, the state is written as
//! `X_k = x̂_k + ΔŴ_k`. One update expands the step map in the previous
//! deviation `δx` and a noise variable `δw`, rescales the noise so it stands
//! for a Wiener increment of variance `h`, and takes expectations term by
//! term: every monomial `δx^{r'} δw^s` contributes its coefficient times
//! `E[ΔŴ^{r'}]` times the Gaussian moment `E[ΔW^s]`. Only moments up to the
//! expansion order are kept, which is where the approximation lies.
//!
//! The bi-fidelity variant replaces the central sequence by a precomputed
//! reference and integrates only the relative dynamics with a cheaper drift.

mod bifidelity;
mod moments;
mod step;

pub use bifidelity::{plasma_run_bifidelity, DenseOutput};
pub use moments::{gaussian_increment_moments, MomentRow, NoiseMomentSet};
pub use step::{
    map_moments, plasma_run, plasma_run_map, plasma_step, plasma_step_map, Integrator, PlasmaConfig,
};

use crate::da::MultiIndex;
use crate::error::Result;
use nalgebra::DMatrix;

/// `E[X^r]` from a moment set.
pub fn state_moments(ms: &NoiseMomentSet, r: &MultiIndex) -> Result<f64> {
    ms.state_moment(r)
}

/// Covariance about the mean.
pub fn state_covariance(ms: &NoiseMomentSet) -> Result<DMatrix<f64>> {
    ms.covariance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{duffing_closed_form_moments, DuffingParams, LinearSde, TwoBodyJ2};
    use crate::error::Error;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_increment_moments(&mi(&[1]), 0.3).unwrap(), 0.0);
        assert_eq!(gaussian_increment_moments(&mi(&[2]), 0.3).unwrap(), 0.3);
        assert!((gaussian_increment_moments(&mi(&[4]), 0.3).unwrap() - 0.27).abs() < 1e-16);
        assert!((gaussian_increment_moments(&mi(&[2, 2]), 0.3).unwrap() - 0.09).abs() < 1e-16);
        assert_eq!(gaussian_increment_moments(&mi(&[6, 0]), 1.0).unwrap(), 15.0);
        assert!(gaussian_increment_moments(&mi(&[2]), 0.0).is_err());
    }

    #[test]
    fn deterministic_state_moments() {
        let ms = NoiseMomentSet::deterministic(vec![2.0, -3.0], 0.0, 3).unwrap();
        assert_eq!(ms.state_moment(&mi(&[0, 0])).unwrap(), 1.0);
        assert_eq!(ms.state_moment(&mi(&[2, 1])).unwrap(), -12.0);
        assert_eq!(ms.covariance().unwrap(), DMatrix::zeros(2, 2));
        assert!(matches!(
            ms.state_moment(&mi(&[2, 2])),
            Err(Error::OutOfOrder { requested: 4, available: 3 })
        ));
    }

    #[test]
    fn pure_diffusion_adds_variance_per_step() {
        let m = LinearSde::new(vec![vec![0.0]], vec![vec![0.4]]).unwrap();
        let mut ms = NoiseMomentSet::deterministic(vec![1.0], 0.0, 2).unwrap();
        for k in 1..=5 {
            ms = plasma_step(&m, &ms, 0.1, Integrator::EulerMaruyama, 2).unwrap();
            let var = ms.covariance().unwrap()[(0, 0)];
            assert!((var - k as f64 * 0.16 * 0.1).abs() < 1e-15);
            assert_eq!(ms.mean(), vec![1.0]);
        }
    }

    #[test]
    fn no_noise_means_no_spread() {
        let m = TwoBodyJ2 {
            mu: 398600.4418,
            r_e: 6378.137,
            j2: 1.08e-3,
        };
        let ic = NoiseMomentSet::deterministic(vec![7000.0, 0.0, 100.0, 0.0, 7.5, 0.5], 0.0, 2).unwrap();
        let cfg = PlasmaConfig {
            integrator: Integrator::Rk4,
            ..PlasmaConfig::default()
        };
        let out = plasma_run(&m, &ic, 600.0, 10.0, &cfg, &[]).unwrap();
        let x = crate::dynamics::propagate::<f64>(&m, &ic.central, 0.0, 600.0, 10.0).unwrap();
        assert_eq!(out[0].central, x);
        assert!(out[0].moments()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_length_run_returns_input() {
        let m = LinearSde::ornstein_uhlenbeck(1.0, 0.5);
        let ic = NoiseMomentSet::deterministic(vec![1.0], 0.0, 2).unwrap();
        let out = plasma_run(&m, &ic, 0.0, 0.1, &PlasmaConfig::default(), &[]).unwrap();
        assert_eq!(out, vec![ic]);
    }

    #[test]
    fn ou_em_follows_discrete_recursion() {
        let (h, sigma) = (0.01, 0.5);
        let m = LinearSde::ornstein_uhlenbeck(1.0, sigma);
        let ic = NoiseMomentSet::deterministic(vec![1.0], 0.0, 2).unwrap();
        let out = plasma_run(&m, &ic, 1.0, h, &PlasmaConfig::default(), &[0.5, 1.0]).unwrap();
        let (mut mean, mut var) = (1.0, 0.0);
        for _ in 0..100 {
            mean *= 1.0 - h;
            var = (1.0 - h) * (1.0 - h) * var + sigma * sigma * h;
        }
        let last = &out[1];
        assert_eq!(last.time, 1.0);
        assert!((last.mean()[0] - mean).abs() < 1e-13);
        assert!((last.covariance().unwrap()[(0, 0)] - var).abs() < 1e-13);
    }

    #[test]
    fn linear_sde_matches_moment_equations() {
        let a = vec![vec![0.0, 1.0], vec![-2.0, -0.3]];
        let b = vec![vec![0.0], vec![0.5]];
        let m = LinearSde::new(a.clone(), b.clone()).unwrap();
        let ic = NoiseMomentSet::deterministic(vec![1.0, 0.0], 0.0, 2).unwrap();
        let cfg = PlasmaConfig {
            integrator: Integrator::Rk4,
            ..PlasmaConfig::default()
        };
        let am = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.3]);
        let bm = DMatrix::from_row_slice(2, 1, &[0.0, 0.5]);
        // Mean and covariance ODEs on a much finer grid.
        let (mut x, mut p) = (nalgebra::DVector::from_vec(vec![1.0, 0.0]), DMatrix::<f64>::zeros(2, 2));
        let hf = 1e-4;
        let rhs = |p: &DMatrix<f64>| &am * p + p * am.transpose() + &bm * bm.transpose();
        for _ in 0..30_000 {
            let k1 = rhs(&p);
            let k2 = rhs(&(&p + &k1 * (hf / 2.0)));
            let k3 = rhs(&(&p + &k2 * (hf / 2.0)));
            let k4 = rhs(&(&p + &k3 * hf));
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (hf / 6.0);
            let j1 = &am * &x;
            let j2 = &am * (&x + &j1 * (hf / 2.0));
            let j3 = &am * (&x + &j2 * (hf / 2.0));
            let j4 = &am * (&x + &j3 * hf);
            x += (j1 + j2 * 2.0 + j3 * 2.0 + j4) * (hf / 6.0);
        }
        let err = |h: f64| {
            let out = plasma_run(&m, &ic, 3.0, h, &cfg, &[]).unwrap();
            let mean = out[0].mean();
            assert!((mean[0] - x[0]).abs() < 1e-6 && (mean[1] - x[1]).abs() < 1e-6);
            (out[0].covariance().unwrap() - &p).amax() / p.amax()
        };
        // The noise term is frozen over each RK4 step, so the covariance
        // converges at second order.
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e2 < 1e-4, "{e2}");
        assert!((3.5..4.5).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }

    #[test]
    fn duffing_map_matches_closed_form() {
        let p = DuffingParams::new(2.75, 0.2, 0.1).unwrap();
        let ic = NoiseMomentSet::deterministic(vec![0.1, 0.1], 0.0, 2).unwrap();
        let runs = plasma_run_map(&p, &ic, 50).unwrap();
        let oracle = duffing_closed_form_moments([0.1, 0.1], &p, 50);
        for (ms, o) in runs.iter().zip(&oracle) {
            assert_eq!(ms.central, o.central.to_vec());
            let e = ms.moments();
            for (a, b) in e[1..].iter().zip(o.noise) {
                assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn map_moments_of_affine_map() {
        let mut ms = NoiseMomentSet::deterministic(vec![1.0, 2.0], 0.0, 2).unwrap();
        let lm = LinearSde::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        ms = plasma_step(&lm, &ms, 1.0, Integrator::EulerMaruyama, 2).unwrap();
        let f = |x: &[crate::TaylorPoly]| Ok(vec![&x[0].scale(3.0) + &x[1], x[1].add_scalar(1.0)]);
        let y = map_moments(&ms, &f).unwrap();
        assert_eq!(y.central, vec![5.0, 3.0]);
        let c = y.covariance().unwrap();
        assert!((c[(0, 0)] - 13.0).abs() < 1e-14 && (c[(0, 1)] - 4.0).abs() < 1e-14 && (c[(1, 1)] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rows_round_trip() {
        let m = LinearSde::ornstein_uhlenbeck(1.0, 0.5);
        let ic = NoiseMomentSet::deterministic(vec![1.0], 0.0, 3).unwrap();
        let ms = plasma_step(&m, &ic, 0.1, Integrator::Rk4, 3).unwrap();
        let rows = ms.to_rows();
        assert_eq!(rows.len(), 4);
        let back = NoiseMomentSet::from_rows(ms.central.clone(), 3, &rows).unwrap();
        assert_eq!(back, ms);
    }

    #[test]
    fn bifidelity_with_identical_models_matches_plain_run() {
        let m = crate::dynamics::KeplerSdeParams::new(398600.0, 2e-4).unwrap();
        let r = 6578.0;
        let ic = NoiseMomentSet::deterministic(vec![r, 0.0, 0.0, (398600.0f64 / r).sqrt()], 0.0, 2).unwrap();
        let cfg = PlasmaConfig {
            integrator: Integrator::Rk4,
            ..PlasmaConfig::default()
        };
        let plain = plasma_run(&m, &ic, 600.0, 5.0, &cfg, &[]).unwrap();
        let (bf, xi) = plasma_run_bifidelity(&m, &m, &ic, 600.0, 5.0, &cfg, &[]).unwrap();
        assert_eq!(bf[0].central, plain[0].central);
        assert_eq!(xi.eval(600.0).unwrap(), plain[0].central);
        let (pa, pb) = (plain[0].covariance().unwrap(), bf[0].covariance().unwrap());
        assert!((&pa - &pb).amax() < 1e-6 * pa.amax());
        assert!(xi.eval(601.0).is_err());
    }

    #[test]
    fn bifidelity_without_noise_tracks_reference() {
        let hf = TwoBodyJ2 {
            mu: 398600.4418,
            r_e: 6378.137,
            j2: 1.08e-3,
        };
        let lf = TwoBodyJ2 { j2: 0.0, ..hf };
        let ic = NoiseMomentSet::deterministic(vec![7000.0, 0.0, 100.0, 0.0, 7.5, 0.5], 0.0, 2).unwrap();
        let cfg = PlasmaConfig {
            integrator: Integrator::Rk4,
            substeps: 2,
            ..PlasmaConfig::default()
        };
        let (out, xi) = plasma_run_bifidelity(&hf, &lf, &ic, 300.0, 20.0, &cfg, &[100.0, 300.0]).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|ms| ms.moments()[1..].iter().all(|&v| v == 0.0)));
        assert_eq!(out[1].mean(), xi.eval(300.0).unwrap());
    }

    #[test]
    fn dense_output_is_exact_at_nodes_and_smooth() {
        let m = LinearSde::ornstein_uhlenbeck(-1.0, 0.0);
        let nodes: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let d = DenseOutput::integrate(&m, &[1.0], &nodes).unwrap();
        for (t, x) in d.times.iter().zip(&d.states) {
            assert_eq!(&d.eval(*t).unwrap(), x);
        }
        let mid = d.eval(0.55).unwrap()[0];
        // Bounded by the RK4 global error at this step size.
        assert!((mid - 0.55f64.exp()).abs() < 5e-6);
        let left = d.eval_derivative(0.3 - 1e-12).unwrap()[0];
        let right = d.eval_derivative(0.3 + 1e-12).unwrap()[0];
        assert!((left - right).abs() < 1e-9);
    }
}
