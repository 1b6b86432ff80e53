use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{split_kernel, GaussKernel, Manifold, Side};
use super::split::build_split_library;
use super::ut::{default_kappa, ut_transform};
use crate::da::TaylorPoly;
use crate::error::{Error, Result};
use crate::nonlinearity::{jacobian_columns, nli_report};

/// A polynomial map applied to the domain expansion of each kernel.
pub type PolyMap<'a> = dyn Fn(&[TaylorPoly]) -> Result<Vec<TaylorPoly>> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptConfig {
    /// Split threshold on the nonlinearity index.
    pub eps_nu: f64,
    /// Maximum number of splits along any lineage.
    pub n_max: usize,
    /// Kernels lighter than this are never split.
    pub alpha_min: f64,
    /// Domain spread in standard deviations.
    pub zeta: f64,
    /// UT parameter; `None` selects [`default_kappa`].
    pub ut_kappa: Option<f64>,
    /// DA expansion order of the kernel maps.
    pub order: usize,
    /// Penalty of the splitting library.
    pub split_lambda: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            eps_nu: 0.05,
            n_max: 20,
            alpha_min: 1e-6,
            zeta: 3.0,
            ut_kappa: None,
            order: 2,
            split_lambda: 1e-3,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_nu > 0.0) {
            return Err(Error::invalid("eps_nu must be positive"));
        }
        if !(0.0..1.0).contains(&self.alpha_min) {
            return Err(Error::invalid("alpha_min must lie in [0, 1)"));
        }
        if !(self.zeta > 0.0) {
            return Err(Error::invalid("zeta must be positive"));
        }
        if self.order < 2 {
            return Err(Error::invalid("order must be at least 2"));
        }
        Ok(())
    }

    pub fn kappa(&self, n: usize) -> f64 {
        self.ut_kappa.unwrap_or_else(|| default_kappa(n))
    }
}

/// Aligned initial and propagated mixtures.
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    /// Refined initial kernels; `polys` holds each domain expansion.
    pub initial: Manifold,
    /// Image kernels; `polys` holds each propagated expansion and the
    /// moments come from the UT through it.
    pub propagated: Manifold,
    /// Nonlinearity index of each accepted kernel.
    pub nu: Vec<f64>,
    /// Number of split operations performed.
    pub splits: usize,
}

enum Outcome {
    Accept(GaussKernel, GaussKernel, f64),
    Split([GaussKernel; 3]),
}

fn process(k: GaussKernel, map_fn: &PolyMap, cfg: &AdaptConfig) -> Result<Outcome> {
    let dom = k.domain(cfg.zeta)?;
    let x = dom.to_polys(cfg.order)?;
    let y = map_fn(&x)?;
    if y.iter().any(|p| p.nvars() != k.dim() || !p.is_finite()) {
        return Err(Error::invalid("map produced polynomials of the wrong size or non-finite"));
    }
    let active: Vec<usize> = (0..k.dim()).filter(|&j| dom.scale[j] > 0.0).collect();
    let (nu, dominant) = if active.is_empty() {
        (0.0, None)
    } else {
        let jac = jacobian_columns(&y, dom.scale.as_slice(), &active)?;
        let rep = nli_report(&jac)?;
        (rep.nu, Some(rep.dominant_variable()))
    };
    let lineage_full = k.id.depth() >= cfg.n_max;
    if nu <= cfg.eps_nu || lineage_full || k.weight < cfg.alpha_min || dominant.is_none() {
        let kappa = cfg.kappa(k.dim());
        let (mean, cov) = ut_transform(&y, &k, cfg.zeta, kappa)?;
        let mut init = k.clone();
        init.polys = x;
        let prop = GaussKernel {
            id: k.id.clone(),
            weight: k.weight,
            mean,
            cov,
            polys: y,
        };
        return Ok(Outcome::Accept(init, prop, nu));
    }
    let lib = build_split_library(cfg.split_lambda)?;
    let p = dominant.expect("checked above");
    let dir: DVector<f64> = dom.eigvecs.column(p).into_owned();
    Ok(Outcome::Split(split_kernel(&k, &dir, &lib)?))
}

/// Split-until-linear propagation of a mixture through `map_fn`.
///
/// Each pending kernel is expanded over its domain, mapped, and tested with
/// the nonlinearity index. Kernels above `eps_nu` are split along the
/// eigen-direction contributing most to the Jacobian bound and re-queued.
/// Pending kernels of one generation are processed in parallel; outputs are
/// ordered by kernel lineage, so results do not depend on scheduling.
pub fn adaptive_propagate(initial: &Manifold, map_fn: &PolyMap, cfg: &AdaptConfig) -> Result<AdaptiveResult> {
    cfg.validate()?;
    let total = initial.total_weight();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("initial weights sum to {total}, not 1")));
    }
    let mut pending: Vec<GaussKernel> = initial
        .kernels
        .iter()
        .enumerate()
        .map(|(i, k)| k.clone().with_id(super::KernelId::root(i as u32)))
        .collect();
    let mut accepted: Vec<(GaussKernel, GaussKernel, f64)> = Vec::new();
    let mut splits = 0;
    while !pending.is_empty() {
        let outcomes: Vec<Result<Outcome>> = pending
            .into_par_iter()
            .map(|k| {
                let id = k.id.to_string();
                process(k, map_fn, cfg).map_err(|e| e.in_kernel(&id))
            })
            .collect();
        pending = Vec::new();
        for o in outcomes {
            match o? {
                Outcome::Accept(a, b, nu) => accepted.push((a, b, nu)),
                Outcome::Split(children) => {
                    splits += 1;
                    pending.extend(children);
                }
            }
        }
    }
    accepted.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let nu = accepted.iter().map(|a| a.2).collect();
    let (init, prop): (Vec<_>, Vec<_>) = accepted.into_iter().map(|(a, b, _)| (a, b)).unzip();
    Ok(AdaptiveResult {
        initial: Manifold {
            kernels: init,
            side: Side::Initial,
        },
        propagated: Manifold {
            kernels: prop,
            side: Side::Propagated,
        },
        nu,
        splits,
    })
}
