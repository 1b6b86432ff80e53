use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::moments::{double_factorial_part, NoiseMomentSet};
use crate::da::{DaSpace, MultiIndex, TaylorPoly};
use crate::dynamics::{em_step, mat_vec, rk4_step_fn, time_grid, SdeModel, StochasticMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    EulerMaruyama,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasmaConfig {
    /// Expansion order `N` in the joint state and noise deviations.
    pub order: usize,
    pub integrator: Integrator,
    /// Integration substeps per moment update.
    pub substeps: usize,
}

impl Default for PlasmaConfig {
    fn default() -> Self {
        PlasmaConfig {
            order: 2,
            integrator: Integrator::EulerMaruyama,
            substeps: 1,
        }
    }
}

impl PlasmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::invalid("PLASMA order must be at least 1"));
        }
        if self.substeps < 1 {
            return Err(Error::invalid("substeps must be at least 1"));
        }
        Ok(())
    }
}

/// Weights of the moment update for `n_in` state and `m` noise variables
/// mapped to `n_out` outputs.
pub(crate) struct UpdatePlan {
    pub(crate) full: Arc<DaSpace>,
    out: Arc<DaSpace>,
    n_in: usize,
    m: usize,
    /// `(full index, input moment index, prod (s-1)!!, |s| / 2)` for every
    /// monomial whose noise part has only even exponents.
    terms: Vec<(usize, usize, f64, i32)>,
    /// `(parent index, variable)` with `r = parent + e_var`, for output
    /// monomials of degree >= 1.
    parents: Vec<(usize, usize)>,
}

impl UpdatePlan {
    pub(crate) fn new(n_in: usize, m: usize, n_out: usize, order: usize) -> Result<Self> {
        let full = DaSpace::shared(n_in + m, order)?;
        let input = DaSpace::shared(n_in, order)?;
        let out = DaSpace::shared(n_out, order)?;
        let mut terms = Vec::new();
        for (j, mono) in full.monomials().iter().enumerate() {
            let (r, s) = mono.split_at(n_in);
            if let Some(df) = double_factorial_part(&s) {
                let ri = input.index_of(&r).expect("state part within order");
                terms.push((j, ri, df, s.order() as i32 / 2));
            }
        }
        let mut parents = vec![(0, 0); out.len()];
        for (i, mono) in out.monomials().iter().enumerate().skip(1) {
            let var = mono.exps().iter().position(|&e| e > 0).expect("non-zero degree");
            let parent = mono.checked_sub(&MultiIndex::unit(n_out, var)).expect("e_var <= r");
            parents[i] = (out.index_of(&parent).expect("lower degree"), var);
        }
        Ok(UpdatePlan {
            full,
            out,
            n_in,
            m,
            terms,
            parents,
        })
    }

    /// `E_new[r] = Σ coeff(a_r) E_prev[r'] E[ΔW^s]` with `a_r = ΔŴ^r`.
    pub(crate) fn update(&self, dw: &[TaylorPoly], prev: &[f64], h: f64) -> Vec<f64> {
        let max_half = self.full.order() / 2;
        let hpow: Vec<f64> = (0..=max_half as i32).map(|k| h.powi(k)).collect();
        let weights: Vec<(usize, f64)> = self
            .terms
            .iter()
            .filter_map(|&(j, ri, df, half)| {
                let w = prev[ri] * df * hpow[half as usize];
                (w != 0.0).then_some((j, w))
            })
            .collect();
        let mut a: Vec<TaylorPoly> = Vec::with_capacity(self.out.len());
        a.push(TaylorPoly::constant(&self.full, 1.0));
        let mut next = vec![0.0; self.out.len()];
        next[0] = 1.0;
        for i in 1..self.out.len() {
            let (p, var) = self.parents[i];
            let prod = &a[p] * &dw[var];
            let c = prod.coeffs();
            next[i] = weights.iter().map(|&(j, w)| c[j] * w).sum();
            a.push(prod);
        }
        next
    }

    /// Identity deviations `central + δx` and noise variables `δw`.
    pub(crate) fn seeds(&self, central: Option<&[f64]>) -> Result<(Vec<TaylorPoly>, Vec<TaylorPoly>)> {
        let x = (0..self.n_in)
            .map(|i| {
                let v = TaylorPoly::variable(&self.full, i)?;
                Ok(match central {
                    Some(c) => v.add_scalar(c[i]),
                    None => v,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let w = (0..self.m)
            .map(|j| TaylorPoly::variable(&self.full, self.n_in + j))
            .collect::<Result<Vec<_>>>()?;
        Ok((x, w))
    }

    /// Rescales the noise variables by `1/h` so that they stand for Wiener
    /// increments of variance `h`.
    pub(crate) fn rescale(&self, y: Vec<TaylorPoly>, h: f64) -> Result<Vec<TaylorPoly>> {
        if self.m == 0 || h == 1.0 {
            return Ok(y);
        }
        let mut f = vec![1.0; self.n_in];
        f.extend(std::iter::repeat_n(1.0 / h, self.m));
        y.iter().map(|p| p.scale_variables(&f)).collect()
    }
}

/// Splits stepped polynomials into central values and zero-constant
/// deviations, then advances the moments.
pub(crate) fn finish_step(
    plan: &UpdatePlan,
    prev: &NoiseMomentSet,
    y: Vec<TaylorPoly>,
    h: f64,
    time: f64,
    central: Option<Vec<f64>>,
) -> Result<NoiseMomentSet> {
    if y.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite { t: time });
    }
    let y = plan.rescale(y, h)?;
    let central = central.unwrap_or_else(|| y.iter().map(TaylorPoly::cons).collect());
    let dw: Vec<TaylorPoly> = y.iter().map(TaylorPoly::nilpotent).collect();
    let moments = plan.update(&dw, prev.moments(), h);
    if moments.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: time });
    }
    NoiseMomentSet::from_parts(central, time, prev.order(), moments)
}

/// Pseudo-ODE right-hand side `u(x, t) + G(x, t) δw`.
fn pseudo_rhs(model: &dyn SdeModel, x: &[TaylorPoly], w: &[TaylorPoly], t: f64) -> Result<Vec<TaylorPoly>> {
    let u = model.drift_da(x, t)?;
    if w.is_empty() {
        return Ok(u);
    }
    let g = model.diffusion_da(x, t)?;
    let gw = mat_vec(&g, w).ok_or_else(|| Error::dim("diffusion/noise size mismatch"))?;
    Ok(u.into_iter().zip(gw).map(|(a, b)| a + b).collect())
}

/// Integrates the pseudo-ODE over `[t, t + h]` with `substeps` equal steps.
pub(crate) fn integrate_pseudo(
    rhs: &dyn Fn(&[TaylorPoly], f64) -> Result<Vec<TaylorPoly>>,
    em: &dyn Fn(&[TaylorPoly], f64, f64) -> Result<Vec<TaylorPoly>>,
    integ: Integrator,
    x: Vec<TaylorPoly>,
    t: f64,
    h: f64,
    substeps: usize,
) -> Result<Vec<TaylorPoly>> {
    let hs = h / substeps as f64;
    let mut x = x;
    for i in 0..substeps {
        let ti = t + hs * i as f64;
        let hi = if i + 1 == substeps { t + h - ti } else { hs };
        x = match integ {
            Integrator::EulerMaruyama => em(&x, ti, hi)?,
            Integrator::Rk4 => rk4_step_fn(rhs, &x, ti, hi)?,
        };
    }
    Ok(x)
}

fn check_model(model: &dyn SdeModel, ms: &NoiseMomentSet) -> Result<()> {
    if ms.dim() != model.state_dim() {
        return Err(Error::dim(format!(
            "moment set has {} states, model has {}",
            ms.dim(),
            model.state_dim()
        )));
    }
    Ok(())
}

fn step_with_plan(
    model: &dyn SdeModel,
    plan: &UpdatePlan,
    ms: &NoiseMomentSet,
    h: f64,
    integ: Integrator,
    substeps: usize,
) -> Result<NoiseMomentSet> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let (x, w) = plan.seeds(Some(&ms.central))?;
    let rhs = |x: &[TaylorPoly], t: f64| pseudo_rhs(model, x, &w, t);
    let em = |x: &[TaylorPoly], t: f64, hi: f64| {
        let dw: Vec<TaylorPoly> = w.iter().map(|p| p.scale(hi)).collect();
        em_step(model, x, &dw, t, hi)
    };
    let y = integrate_pseudo(&rhs, &em, integ, x, ms.time, h, substeps)
        .map_err(|e| locate(e, ms.time + h))?;
    finish_step(plan, ms, y, h, ms.time + h, None)
}

fn locate(e: Error, t: f64) -> Error {
    match e {
        Error::NonFinite { .. } => Error::NonFinite { t },
        other => other,
    }
}

/// Advances the effective-noise moments by one update interval `h`.
pub fn plasma_step(
    model: &dyn SdeModel,
    ms: &NoiseMomentSet,
    h: f64,
    integ: Integrator,
    order: usize,
) -> Result<NoiseMomentSet> {
    check_model(model, ms)?;
    if order != ms.order() {
        return Err(Error::invalid(format!("moment set has order {}, step requested {order}", ms.order())));
    }
    let plan = UpdatePlan::new(ms.dim(), model.noise_dim(), ms.dim(), order)?;
    step_with_plan(model, &plan, ms, h, integ, 1)
}

/// Applies a discrete stochastic map as one step with unit-variance noise.
pub fn plasma_step_map(map: &dyn StochasticMap, ms: &NoiseMomentSet) -> Result<NoiseMomentSet> {
    let plan = UpdatePlan::new(ms.dim(), map.noise_dim(), map.state_dim(), ms.order())?;
    map_step_with_plan(map, &plan, ms)
}

fn map_step_with_plan(map: &dyn StochasticMap, plan: &UpdatePlan, ms: &NoiseMomentSet) -> Result<NoiseMomentSet> {
    if ms.dim() != map.state_dim() {
        return Err(Error::dim("moment set and map dimensions differ"));
    }
    let (x, w) = plan.seeds(Some(&ms.central))?;
    let y = map.apply_da(&x, &w)?;
    finish_step(plan, ms, y, 1.0, ms.time + 1.0, None)
}

/// `steps` applications of a discrete map; entry `k` is the set after `k` steps.
pub fn plasma_run_map(map: &dyn StochasticMap, ic: &NoiseMomentSet, steps: usize) -> Result<Vec<NoiseMomentSet>> {
    let plan = UpdatePlan::new(ic.dim(), map.noise_dim(), map.state_dim(), ic.order())?;
    let mut out = vec![ic.clone()];
    for _ in 0..steps {
        let next = map_step_with_plan(map, &plan, out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Moment-update grid from `t0` to `tf` passing through every output time.
/// Returns the node times and, per output, the index of its node.
pub(crate) fn output_grid(t0: f64, tf: f64, h: f64, outputs: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    if !(tf >= t0) {
        return Err(Error::invalid(format!("final time {tf} precedes initial time {t0}")));
    }
    let mut stops: Vec<f64> = if outputs.is_empty() { vec![tf] } else { outputs.to_vec() };
    if stops.iter().any(|&t| !(t >= t0 && t <= tf)) {
        return Err(Error::invalid("output times must lie in [t0, tf]"));
    }
    stops.sort_by(f64::total_cmp);
    let mut nodes = vec![t0];
    let mut idx = Vec::with_capacity(stops.len());
    for &s in &stops {
        let last = *nodes.last().expect("non-empty");
        if s > last {
            nodes.extend(time_grid(last, s, h)?.into_iter().skip(1));
        }
        idx.push(nodes.len() - 1);
    }
    Ok((nodes, idx))
}

/// Repeated [`plasma_step`] from `ic.time` to `tf` with nominal interval `h`.
///
/// Returns one moment set per entry of `outputs` (sorted), or only the final
/// set when `outputs` is empty.
pub fn plasma_run(
    model: &dyn SdeModel,
    ic: &NoiseMomentSet,
    tf: f64,
    h: f64,
    cfg: &PlasmaConfig,
    outputs: &[f64],
) -> Result<Vec<NoiseMomentSet>> {
    cfg.validate()?;
    check_model(model, ic)?;
    if cfg.order != ic.order() {
        return Err(Error::invalid("initial moment set order differs from configuration"));
    }
    let (nodes, idx) = output_grid(ic.time, tf, h, outputs)?;
    let plan = UpdatePlan::new(ic.dim(), model.noise_dim(), ic.dim(), cfg.order)?;
    let mut out = Vec::with_capacity(idx.len());
    let mut ms = ic.clone();
    let mut next_out = 0;
    for (k, &t) in nodes.iter().enumerate() {
        if k > 0 {
            let mut next = step_with_plan(model, &plan, &ms, t - ms.time, cfg.integrator, cfg.substeps)?;
            next.time = t;
            ms = next;
        }
        while next_out < idx.len() && idx[next_out] == k {
            ms.validate()?;
            out.push(ms.clone());
            next_out += 1;
        }
    }
    Ok(out)
}

/// Pushes moments through a polynomial map `y = F(x)` to order `N`.
///
/// The map receives `central + δx` and may return any number of outputs;
/// the result holds the moments of `F(X)` about `F(central)`.
pub fn map_moments(
    ms: &NoiseMomentSet,
    f: &dyn Fn(&[TaylorPoly]) -> Result<Vec<TaylorPoly>>,
) -> Result<NoiseMomentSet> {
    let probe_plan = UpdatePlan::new(ms.dim(), 0, 1, ms.order())?;
    let (x, _) = probe_plan.seeds(Some(&ms.central))?;
    let y = f(&x)?;
    if y.is_empty() {
        return Err(Error::invalid("map returned no outputs"));
    }
    let plan = UpdatePlan::new(ms.dim(), 0, y.len(), ms.order())?;
    if y.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite { t: ms.time });
    }
    let central: Vec<f64> = y.iter().map(TaylorPoly::cons).collect();
    let dw: Vec<TaylorPoly> = y.iter().map(TaylorPoly::nilpotent).collect();
    let moments = plan.update(&dw, ms.moments(), 1.0);
    NoiseMomentSet::from_parts(central, ms.time, ms.order(), moments)
}
