//! Multifidelity propagation.
//!
//! A cheap model carries the initial uncertainty through the adaptive
//! mixture. Each kernel expansion is then re-centred on an expensive
//! reference: a pointwise high-fidelity flow of the kernel mean, or the mean
//! of a PLASMA run of the stochastic model from that point. With process
//! noise the kernel covariance is also inflated by the PLASMA covariance.
//! Higher-order terms and weights are never touched.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::SdeModel;
use crate::error::{Error, Result};
use crate::gmm::{adaptive_propagate, ut_transform, AdaptConfig, AdaptiveResult, GaussKernel, KernelId, Manifold, PolyMap, Side};
use crate::plasma::{plasma_run, plasma_run_bifidelity, NoiseMomentSet, PlasmaConfig};

/// Pointwise high-fidelity flow from the initial to the final epoch.
pub type PointMap<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;

/// Correction applied to one kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCorrection {
    pub id: KernelId,
    /// Constant part of the low-fidelity expansion at the final epoch.
    pub mu_lf: DVector<f64>,
    /// New expansion point: the pointwise HF state, or the PLASMA mean.
    pub mu_ref: DVector<f64>,
    /// Process-noise covariance, zero for deterministic runs.
    pub p_pn: DMatrix<f64>,
}

impl KernelCorrection {
    pub fn shift(&self) -> f64 {
        (&self.mu_ref - &self.mu_lf).norm()
    }
}

#[derive(Debug, Clone)]
pub struct MfResult {
    /// Refined initial mixture.
    pub initial: Manifold,
    /// Uncorrected low-fidelity image.
    pub lf: Manifold,
    /// Corrected image; polynomials are the re-centred expansions.
    pub gmm: Manifold,
    /// One record per kernel, in mixture order.
    pub corrections: Vec<KernelCorrection>,
    pub splits: usize,
}

impl MfResult {
    pub fn max_shift(&self) -> f64 {
        self.corrections.iter().map(KernelCorrection::shift).fold(0.0, f64::max)
    }
}

/// Re-centres each propagated expansion on `refs[l].0` and inflates its UT
/// covariance by `refs[l].1`.
fn correct(ad: AdaptiveResult, refs: Vec<(DVector<f64>, DMatrix<f64>)>, cfg: &AdaptConfig) -> Result<MfResult> {
    let kappa = cfg.kappa(ad.initial.kernels.first().map_or(1, GaussKernel::dim));
    let out: Vec<(GaussKernel, KernelCorrection)> = ad
        .initial
        .kernels
        .par_iter()
        .zip(&ad.propagated.kernels)
        .zip(refs)
        .map(|((k0, kf), (mu_ref, p_pn))| {
            let id = k0.id.to_string();
            let run = || -> Result<(GaussKernel, KernelCorrection)> {
                if mu_ref.len() != kf.polys.len() {
                    return Err(Error::dim("reference state size differs from the propagated expansion"));
                }
                let polys: Vec<_> = kf.polys.iter().zip(mu_ref.iter()).map(|(p, c)| p.with_constant(*c)).collect();
                let (mean, cov) = ut_transform(&polys, k0, cfg.zeta, kappa)?;
                let mu_lf = DVector::from_iterator(kf.polys.len(), kf.polys.iter().map(|p| p.cons()));
                let kernel = GaussKernel {
                    id: kf.id.clone(),
                    weight: kf.weight,
                    mean,
                    cov: cov + &p_pn,
                    polys,
                };
                let rec = KernelCorrection {
                    id: kf.id.clone(),
                    mu_lf,
                    mu_ref,
                    p_pn,
                };
                Ok((kernel, rec))
            };
            run().map_err(|e| e.in_kernel(&id))
        })
        .collect::<Result<_>>()?;
    let (kernels, corrections): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok(MfResult {
        initial: ad.initial,
        lf: ad.propagated,
        gmm: Manifold {
            kernels,
            side: Side::Propagated,
        },
        corrections,
        splits: ad.splits,
    })
}

/// Low-fidelity adaptive mixture, re-centred on the pointwise HF flow of
/// every refined kernel mean.
pub fn mf_deterministic(lf_map: &PolyMap, hf_prop: &PointMap, initial: &Manifold, cfg: &AdaptConfig) -> Result<MfResult> {
    let ad = adaptive_propagate(initial, lf_map, cfg)?;
    let refs = ad
        .initial
        .kernels
        .par_iter()
        .map(|k| {
            let n = k.dim();
            let x = hf_prop(k.mean.as_slice()).map_err(|e| e.in_kernel(&k.id.to_string()))?;
            Ok((DVector::from_vec(x), DMatrix::zeros(n, n)))
        })
        .collect::<Result<Vec<_>>>()?;
    correct(ad, refs, cfg)
}

/// Stochastic model used for the process-noise correction.
#[derive(Clone, Copy)]
pub enum NoiseModel<'a> {
    /// PLASMA directly on the SDE.
    Direct(&'a dyn SdeModel),
    /// PLASMA around an HF reference with LF relative dynamics.
    BiFidelity { hf: &'a dyn SdeModel, lf: &'a dyn SdeModel },
}

/// Epochs and PLASMA settings of the per-kernel noise runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRunConfig {
    pub t0: f64,
    pub tf: f64,
    pub h: f64,
    pub plasma: PlasmaConfig,
}

/// PLASMA mean and covariance at `tf` from the point `x0`.
fn noise_run(model: NoiseModel, x0: &[f64], cfg: &NoiseRunConfig) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let ic = NoiseMomentSet::deterministic(x0.to_vec(), cfg.t0, cfg.plasma.order)?;
    let mut sets = match model {
        NoiseModel::Direct(m) => plasma_run(m, &ic, cfg.tf, cfg.h, &cfg.plasma, &[])?,
        NoiseModel::BiFidelity { hf, lf } => plasma_run_bifidelity(hf, lf, &ic, cfg.tf, cfg.h, &cfg.plasma, &[])?.0,
    };
    let ms = sets.pop().ok_or_else(|| Error::invalid("PLASMA returned no moment set"))?;
    Ok((DVector::from_vec(ms.mean()), ms.covariance()?))
}

/// Low-fidelity adaptive mixture, re-centred on per-kernel PLASMA means and
/// inflated by the PLASMA covariances.
///
/// Process noise is taken independent of the initial uncertainty: every
/// PLASMA run starts from a kernel mean with zero spread.
pub fn mf_stochastic(
    lf_map: &PolyMap,
    noise: NoiseModel,
    initial: &Manifold,
    cfg: &AdaptConfig,
    run: &NoiseRunConfig,
) -> Result<MfResult> {
    if run.plasma.order < 2 {
        return Err(Error::invalid("noise runs need PLASMA order 2 or more for a covariance"));
    }
    let ad = adaptive_propagate(initial, lf_map, cfg)?;
    let refs = ad
        .initial
        .kernels
        .par_iter()
        .map(|k| noise_run(noise, k.mean.as_slice(), run).map_err(|e| e.in_kernel(&k.id.to_string())))
        .collect::<Result<Vec<_>>>()?;
    correct(ad, refs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::da::TaylorPoly;
    use crate::dynamics::{propagate, GenericSde};
    use crate::gmm::mixture_moments;
    use crate::plasma::Integrator;
    use crate::scalar::Scalar;

    /// Damped pendulum with state-dependent noise on the rate.
    struct Pendulum {
        damping: f64,
        sigma: f64,
    }

    impl GenericSde for Pendulum {
        fn state_dim(&self) -> usize {
            2
        }
        fn noise_dim(&self) -> usize {
            1
        }
        fn drift<T: Scalar>(&self, x: &[T], _t: f64) -> Result<Vec<T>> {
            Ok(vec![x[1].clone(), x[0].sin() * (-1.0) + x[1].clone() * (-self.damping)])
        }
        fn diffusion<T: Scalar>(&self, x: &[T], _t: f64) -> Result<Vec<Vec<T>>> {
            Ok(vec![vec![x[0].lift(0.0)], vec![x[0].cos() * self.sigma]])
        }
    }

    const H: f64 = 0.05;
    const TF: f64 = 2.0;

    fn initial() -> Manifold {
        Manifold::single(
            DVector::from_vec(vec![0.8, 0.0]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.04, 0.01])),
        )
        .unwrap()
    }

    fn cfg() -> AdaptConfig {
        AdaptConfig {
            eps_nu: 0.02,
            n_max: 2,
            ..AdaptConfig::default()
        }
    }

    fn lf(damping: f64) -> impl Fn(&[TaylorPoly]) -> Result<Vec<TaylorPoly>> + Sync {
        move |x: &[TaylorPoly]| propagate::<TaylorPoly>(&Pendulum { damping, sigma: 0.0 }, x, 0.0, TF, H)
    }

    fn hf(damping: f64) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync {
        move |x: &[f64]| propagate::<f64>(&Pendulum { damping, sigma: 0.0 }, x, 0.0, TF, H)
    }

    fn assert_nilpotent_kept(r: &MfResult) {
        for (a, b) in r.lf.kernels.iter().zip(&r.gmm.kernels) {
            for (p, q) in a.polys.iter().zip(&b.polys) {
                assert_eq!(p.coeffs()[1..], q.coeffs()[1..]);
            }
        }
    }

    #[test]
    fn same_fidelity_means_no_shift() {
        let r = mf_deterministic(&lf(0.1), &hf(0.1), &initial(), &cfg()).unwrap();
        assert!(r.gmm.len() > 1, "expected refinement");
        assert_eq!(r.max_shift(), 0.0);
        for (a, b) in r.lf.kernels.iter().zip(&r.gmm.kernels) {
            assert!((&a.mean - &b.mean).amax() < 1e-12);
            assert!((&a.cov - &b.cov).amax() < 1e-12);
        }
    }

    #[test]
    fn deterministic_correction_moves_constants_only() {
        let r = mf_deterministic(&lf(0.0), &hf(0.1), &initial(), &cfg()).unwrap();
        assert!(r.max_shift() > 1e-3);
        assert_eq!(r.gmm.weights(), r.lf.weights());
        assert_nilpotent_kept(&r);
        for (k, c) in r.gmm.kernels.iter().zip(&r.corrections) {
            let x0 = r.initial.kernels.iter().find(|k0| k0.id == k.id).unwrap();
            let want = hf(0.1)(x0.mean.as_slice()).unwrap();
            for (p, w) in k.polys.iter().zip(&want) {
                assert_eq!(p.cons(), *w);
            }
            assert_eq!(c.p_pn, DMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn correction_improves_mixture_mean() {
        // Exact reference: a single-kernel high-fidelity adaptive run.
        let truth = adaptive_propagate(&initial(), &lf(0.1), &cfg()).unwrap();
        let (m_true, _) = mixture_moments(&truth.propagated).unwrap();
        let r = mf_deterministic(&lf(0.0), &hf(0.1), &initial(), &cfg()).unwrap();
        let (m_lf, _) = mixture_moments(&r.lf).unwrap();
        let (m_mf, _) = mixture_moments(&r.gmm).unwrap();
        assert!((&m_mf - &m_true).norm() < 0.2 * (&m_lf - &m_true).norm());
    }

    fn run_cfg() -> NoiseRunConfig {
        NoiseRunConfig {
            t0: 0.0,
            tf: TF,
            h: H,
            plasma: PlasmaConfig {
                order: 2,
                integrator: Integrator::Rk4,
                substeps: 1,
            },
        }
    }

    #[test]
    fn noiseless_stochastic_matches_deterministic() {
        let quiet = Pendulum {
            damping: 0.1,
            sigma: 0.0,
        };
        let s = mf_stochastic(&lf(0.0), NoiseModel::Direct(&quiet), &initial(), &cfg(), &run_cfg()).unwrap();
        let d = mf_deterministic(&lf(0.0), &hf(0.1), &initial(), &cfg()).unwrap();
        assert_eq!(s.gmm.weights(), d.gmm.weights());
        for (a, b) in s.gmm.kernels.iter().zip(&d.gmm.kernels) {
            assert!((&a.mean - &b.mean).amax() < 1e-10);
            assert!((&a.cov - &b.cov).amax() < 1e-10);
        }
    }

    #[test]
    fn noise_inflates_each_kernel() {
        let noisy = Pendulum {
            damping: 0.1,
            sigma: 0.05,
        };
        let s = mf_stochastic(&lf(0.0), NoiseModel::Direct(&noisy), &initial(), &cfg(), &run_cfg()).unwrap();
        assert_eq!(s.gmm.weights(), s.lf.weights());
        assert_nilpotent_kept(&s);
        let kappa = cfg().kappa(2);
        let mut bare = s.gmm.clone();
        for ((k, k0), c) in bare.kernels.iter_mut().zip(&s.initial.kernels).zip(&s.corrections) {
            let (_, p_mf) = ut_transform(&k.polys, k0, cfg().zeta, kappa).unwrap();
            assert!((&k.cov - &p_mf - &c.p_pn).amax() < 1e-15);
            assert!(c.p_pn[(1, 1)] > 0.0);
            k.cov = p_mf;
        }
        let (_, p_in) = mixture_moments(&s.gmm).unwrap();
        let (_, p_bare) = mixture_moments(&bare).unwrap();
        let (vals, _) = crate::linalg::sym_eigen(&(p_in - p_bare)).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-15));
    }

    #[test]
    fn bifidelity_noise_model_runs() {
        let noisy = Pendulum {
            damping: 0.1,
            sigma: 0.05,
        };
        let cheap = Pendulum {
            damping: 0.0,
            sigma: 0.05,
        };
        let direct = mf_stochastic(&lf(0.0), NoiseModel::Direct(&noisy), &initial(), &cfg(), &run_cfg()).unwrap();
        let bf = mf_stochastic(
            &lf(0.0),
            NoiseModel::BiFidelity {
                hf: &noisy,
                lf: &cheap,
            },
            &initial(),
            &cfg(),
            &run_cfg(),
        )
        .unwrap();
        for (a, b) in direct.corrections.iter().zip(&bf.corrections) {
            assert!((&a.mu_ref - &b.mu_ref).amax() < 5e-3);
            assert!((&a.p_pn - &b.p_pn).amax() < 0.2 * a.p_pn.amax());
        }
    }

    #[test]
    fn kernel_errors_carry_ids() {
        let failing = |_: &[f64]| -> Result<Vec<f64>> { Err(Error::invalid("boom")) };
        let err = mf_deterministic(&lf(0.0), &failing, &initial(), &cfg()).unwrap_err();
        assert!(matches!(err, Error::Kernel { .. }), "{err:?}");
    }
}
