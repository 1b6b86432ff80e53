use serde::{Deserialize, Serialize};

use super::moments::NoiseMomentSet;
use super::step::{finish_step, integrate_pseudo, output_grid, PlasmaConfig, UpdatePlan};
use crate::da::TaylorPoly;
use crate::dynamics::{mat_vec, rk4_step, SdeModel};
use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant of an RK4 trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseOutput {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Drift at each node.
    pub derivs: Vec<Vec<f64>>,
}

impl DenseOutput {
    /// Integrates the drift of `model` with RK4 through the given nodes.
    pub fn integrate(model: &dyn SdeModel, x0: &[f64], nodes: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("dense output needs at least one node"));
        }
        let mut states = vec![x0.to_vec()];
        let mut derivs = vec![model.drift_real(x0, nodes[0])?];
        for w in nodes.windows(2) {
            let x = rk4_step::<f64>(model, states.last().expect("non-empty"), w[0], w[1] - w[0])?;
            derivs.push(model.drift_real(&x, w[1])?);
            states.push(x);
        }
        Ok(DenseOutput {
            times: nodes.to_vec(),
            states,
            derivs,
        })
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn tf(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// `ξ(t)`; exact at nodes.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= self.t0() && t <= self.tf()) {
            return Err(Error::invalid(format!(
                "dense output queried at t = {t} outside [{}, {}]",
                self.t0(),
                self.tf()
            )));
        }
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        if self.times[k] == t || k + 1 == self.times.len() {
            return Ok(self.states[k].clone());
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok((0..self.states[k].len())
            .map(|i| {
                h00 * self.states[k][i]
                    + h10 * h * self.derivs[k][i]
                    + h01 * self.states[k + 1][i]
                    + h11 * h * self.derivs[k + 1][i]
            })
            .collect())
    }

    /// `ξ̇(t)`.
    pub fn eval_derivative(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= self.t0() && t <= self.tf()) {
            return Err(Error::invalid(format!("dense output queried at t = {t} outside its span")));
        }
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        if self.times[k] == t || k + 1 == self.times.len() {
            return Ok(self.derivs[k].clone());
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        Ok((0..self.states[k].len())
            .map(|i| {
                d00 * self.states[k][i] + d10 * self.derivs[k][i] + d01 * self.states[k + 1][i] + d11 * self.derivs[k + 1][i]
            })
            .collect())
    }

    /// Node index of time `t`, if `t` is a node.
    fn node(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&s| s < t);
        (k < self.times.len() && self.times[k] == t).then_some(k)
    }
}

/// Substep grid: each interval of `nodes` split into `substeps` pieces.
fn refine(nodes: &[f64], substeps: usize) -> Vec<f64> {
    let mut out = vec![nodes[0]];
    for w in nodes.windows(2) {
        let hs = (w[1] - w[0]) / substeps as f64;
        for i in 1..substeps {
            out.push(w[0] + hs * i as f64);
        }
        out.push(w[1]);
    }
    out
}

/// PLASMA around a high-fidelity reference trajectory.
///
/// The reference `ξ` is integrated once with the drift of `hf`. Each moment
/// update then integrates only the relative dynamics
/// `u_lf(ξ + δx) - u_lf(ξ) + G(ξ + δx) δw`, with `G` taken from `hf`, so the
/// expensive drift is never evaluated on polynomials. Central values are the
/// reference nodes. Returns the moment sets at `outputs` (or at `tf`) and the
/// reference.
pub fn plasma_run_bifidelity(
    hf: &dyn SdeModel,
    lf: &dyn SdeModel,
    ic: &NoiseMomentSet,
    tf: f64,
    h: f64,
    cfg: &PlasmaConfig,
    outputs: &[f64],
) -> Result<(Vec<NoiseMomentSet>, DenseOutput)> {
    cfg.validate()?;
    if ic.dim() != hf.state_dim() || lf.state_dim() != hf.state_dim() {
        return Err(Error::dim("high- and low-fidelity models and moments must share the state size"));
    }
    let (nodes, idx) = output_grid(ic.time, tf, h, outputs)?;
    let fine = refine(&nodes, cfg.substeps);
    let xi = DenseOutput::integrate(hf, &ic.central, &fine)?;
    let n = ic.dim();
    let plan = UpdatePlan::new(n, hf.noise_dim(), n, cfg.order)?;
    let (d0, w) = plan.seeds(None)?;

    let rhs = |dx: &[TaylorPoly], t: f64| -> Result<Vec<TaylorPoly>> {
        let ref_state = xi.eval(t)?;
        let x: Vec<TaylorPoly> = dx.iter().zip(&ref_state).map(|(d, c)| d.add_scalar(*c)).collect();
        let u_ref = lf.drift_real(&ref_state, t)?;
        let u = lf.drift_da(&x, t)?;
        let mut out: Vec<TaylorPoly> = u.into_iter().zip(&u_ref).map(|(p, c)| p.add_scalar(-c)).collect();
        if !w.is_empty() {
            let g = hf.diffusion_da(&x, t)?;
            let gw = mat_vec(&g, &w).ok_or_else(|| Error::dim("diffusion/noise size mismatch"))?;
            out = out.into_iter().zip(gw).map(|(a, b)| a + b).collect();
        }
        Ok(out)
    };
    let em = |dx: &[TaylorPoly], t: f64, hi: f64| -> Result<Vec<TaylorPoly>> {
        let k = rhs(dx, t)?;
        Ok(dx.iter().zip(k).map(|(d, k)| d + &k.scale(hi)).collect())
    };

    let mut out = Vec::with_capacity(idx.len());
    let mut ms = ic.clone();
    let mut next_out = 0;
    for (k, &t) in nodes.iter().enumerate() {
        if k > 0 {
            let hk = t - ms.time;
            let y = integrate_pseudo(&rhs, &em, cfg.integrator, d0.clone(), ms.time, hk, cfg.substeps)?;
            let node = xi.node(t).ok_or_else(|| Error::invalid("reference grid does not contain a moment node"))?;
            ms = finish_step(&plan, &ms, y, hk, t, Some(xi.states[node].clone()))?;
        }
        while next_out < idx.len() && idx[next_out] == k {
            ms.validate()?;
            out.push(ms.clone());
            next_out += 1;
        }
    }
    Ok((out, xi))
}
