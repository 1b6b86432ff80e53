//! Method pipelines. Everything here computes; nothing touches the disk.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use uqprop::da::MultiIndex;
use uqprop::dynamics::{convert, duffing_closed_form_moments, propagate, unwrap_angle, CoordSet, SdeModel};
use uqprop::gmm::{adaptive_propagate, mixture_moments, Manifold, PolyMap};
use uqprop::mc::{sample_moments, simulate_map, simulate_paths, IcSampler, McConfig};
use uqprop::metrics::{ErrorReport, Units};
use uqprop::mfup::{mf_deterministic, mf_stochastic, MfResult, NoiseModel, NoiseRunConfig};
use uqprop::plasma::{map_moments, plasma_run, plasma_run_bifidelity, plasma_run_map, NoiseMomentSet};
use uqprop::TaylorPoly;

use crate::scenario::{CheckSpec, Method, Scenario};

/// A CSV table: a header row naming quantities and units, then data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    /// File name and contents, in write order.
    pub tables: Vec<(String, Table)>,
    pub checks: Vec<CheckResult>,
    pub timings: Vec<(String, f64)>,
    pub summary: Vec<String>,
}

struct Estimate {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Integers print plainly; everything else in round-trip exponent form.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn err(e: uqprop::Error) -> String {
    e.to_string()
}

fn exps(r: &MultiIndex) -> String {
    r.exps().iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn unit_product(a: &str, b: &str) -> String {
    match (a, b) {
        ("-", "-") => "-".into(),
        ("-", u) | (u, "-") => u.into(),
        (a, b) if a == b && a.contains('/') => format!("({a})^2"),
        (a, b) if a == b => format!("{a}^2"),
        (a, b) => format!("{a}*{b}"),
    }
}

/// Internal-to-output conversion: unit scaling followed by an optional
/// element conversion with the physical `μ`.
struct OutputMap {
    scale: Vec<f64>,
    coords: Option<CoordSet>,
    mu: f64,
    angles: &'static [usize],
}

impl OutputMap {
    fn poly(&self, x: &[TaylorPoly]) -> uqprop::Result<Vec<TaylorPoly>> {
        let y: Vec<TaylorPoly> = x.iter().zip(&self.scale).map(|(p, s)| p.scale(*s)).collect();
        match self.coords {
            Some(c) => convert(&y, CoordSet::Cartesian, c, self.mu),
            None => Ok(y),
        }
    }

    fn point(&self, x: &[f64]) -> uqprop::Result<Vec<f64>> {
        let y: Vec<f64> = x.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        match self.coords {
            Some(c) => convert(&y, CoordSet::Cartesian, c, self.mu),
            None => Ok(y),
        }
    }

    fn linear(&self, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Estimate {
        let s = DVector::from_column_slice(&self.scale);
        Estimate {
            mean: mean.component_mul(&s),
            cov: DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| cov[(i, j)] * s[i] * s[j]),
        }
    }
}

struct Ctx<'a> {
    scn: &'a Scenario,
    units: Option<Units>,
    t0: f64,
    tf: f64,
    h: f64,
    out: OutputMap,
    /// Uncorrected low-fidelity mixture moments of the multifidelity methods.
    lf_estimate: Option<Estimate>,
    names: Vec<(String, &'static str)>,
    outcome: Outcome,
}

impl Ctx<'_> {
    fn time_unit(&self) -> f64 {
        self.units.map_or(1.0, |u| u.time)
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
        let t = Instant::now();
        let r = f();
        self.outcome.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        r.map_err(|e| format!("{stage}: {e}"))
    }

    fn metric(&mut self, name: &str, value: f64, unit: &str) {
        if let Some((_, t)) = self.outcome.tables.iter_mut().find(|(n, _)| n == "metrics.csv") {
            t.rows.push(vec![name.into(), num(value), unit.into()]);
        }
    }
}

/// Executes a validated scenario.
pub fn run(scn: &Scenario) -> Result<Outcome, String> {
    let units = scn.internal_units()?;
    let tu = units.map_or(1.0, |u| u.time);
    let coords = scn.output.coords;
    let mut ctx = Ctx {
        scn,
        units,
        t0: scn.time.t0_s / tu,
        tf: scn.time.tf_s.unwrap_or(0.0) / tu,
        h: scn.time.step_s.unwrap_or(1.0) / tu,
        out: OutputMap {
            scale: scn.state_scale(units),
            coords: coords.coord_set(),
            mu: scn.model.mu().unwrap_or(1.0),
            angles: coords.angles(),
        },
        names: coords.quantities().unwrap_or_else(|| scn.model.quantities()),
        lf_estimate: None,
        outcome: Outcome::default(),
    };
    ctx.outcome.tables.push(("metrics.csv".into(), Table::new(&["metric", "value", "unit"])));
    if let Some(u) = units {
        ctx.metric("length_unit", u.length, "km");
        ctx.metric("time_unit", u.time, "s");
    }

    let estimate = match scn.method {
        Method::Plasma | Method::PlasmaBifidelity => Some(run_plasma(&mut ctx)?),
        Method::GmmAdaptive | Method::MfDeterministic | Method::MfStochastic => Some(run_mixture(&mut ctx)?),
        Method::Mc => None,
    };
    let reference = match &scn.mc {
        Some(_) => Some(run_mc(&mut ctx, estimate.as_ref())?),
        None => None,
    };
    let (est, reference) = match (estimate, reference) {
        (Some(e), r) => (e, r),
        (None, Some(r)) => (r, None),
        (None, None) => return Err("nothing to run".into()),
    };
    write_estimate(&mut ctx, &est, reference.as_ref())?;
    Ok(ctx.outcome)
}

fn run_plasma(ctx: &mut Ctx) -> Result<Estimate, String> {
    let scn = ctx.scn;
    let spec = scn.plasma_spec();
    let cfg = spec.config();
    let ini = scn.resolve_initial()?;
    let ic = NoiseMomentSet::deterministic(ini.mean.as_slice().to_vec(), ctx.t0, cfg.order).map_err(err)?;
    let sets = if scn.model.is_map() {
        let map = scn.model.build_map()?;
        let steps = scn.time.steps.unwrap_or(0);
        let sets = ctx.timed("plasma", || plasma_run_map(&map, &ic, steps).map_err(err))?;
        if let Some(CheckSpec::DuffingClosedForm { tolerance }) = &scn.check {
            let c = duffing_check(&map, &ini.mean, &sets, *tolerance)?;
            ctx.outcome.checks.push(c);
        }
        sets
    } else {
        let tu = ctx.time_unit();
        let mut outputs: Vec<f64> = scn.time.outputs_s.iter().map(|t| t / tu).collect();
        if !outputs.is_empty() && !outputs.contains(&ctx.tf) {
            outputs.push(ctx.tf);
        }
        let hf = scn.model.build_sde(ctx.units)?;
        let (tf, h) = (ctx.tf, ctx.h);
        match &scn.low_fidelity {
            Some(lf) if scn.method == Method::PlasmaBifidelity => {
                let lf = lf.build_sde(ctx.units)?;
                ctx.timed("plasma_bifidelity", || {
                    plasma_run_bifidelity(hf.as_ref(), lf.as_ref(), &ic, tf, h, &cfg, &outputs).map(|r| r.0).map_err(err)
                })?
            }
            _ => ctx.timed("plasma", || plasma_run(hf.as_ref(), &ic, tf, h, &cfg, &outputs).map_err(err))?,
        }
    };
    let time_col = if scn.model.is_map() { "step" } else { "time_s" };
    let mut table = Table::new(&[time_col, "exponents", "noise_moment", "state_moment"]);
    let tu = ctx.time_unit();
    let mut last = None;
    for ms in &sets {
        let m = map_moments(ms, &|x: &[TaylorPoly]| ctx.out.poly(x)).map_err(err)?;
        let t = if scn.model.is_map() { format!("{}", ms.time) } else { num(ms.time * tu) };
        for row in m.to_rows() {
            let raw = m.state_moment(&row.index).map_err(err)?;
            table.rows.push(vec![t.clone(), exps(&row.index), num(row.value), num(raw)]);
        }
        last = Some(m);
    }
    ctx.outcome.tables.push(("moments.csv".into(), table));
    let m = last.ok_or("PLASMA produced no moment sets")?;
    ctx.outcome.summary.push(format!("PLASMA order {} over {} output epochs", cfg.order, sets.len()));
    Ok(Estimate {
        mean: DVector::from_vec(m.mean()),
        cov: m.covariance().map_err(err)?,
    })
}

/// PLASMA moments on the Duffing map against the closed-form recursion.
fn duffing_check(map: &uqprop::dynamics::DuffingParams, x0: &DVector<f64>, sets: &[NoiseMomentSet], tol: f64) -> Result<CheckResult, String> {
    let exact = duffing_closed_form_moments([x0[0], x0[1]], map, sets.len() - 1);
    let idx = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]].map(|e| MultiIndex::new(e.to_vec()));
    let mut worst: f64 = 0.0;
    for (ms, ex) in sets.iter().zip(&exact) {
        let d = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        for i in 0..2 {
            worst = worst.max(d(ms.central[i], ex.central[i]));
        }
        for (r, (e, raw)) in idx.iter().zip(ex.noise.iter().zip(&ex.raw)) {
            worst = worst.max(d(ms.moment(r).map_err(err)?, *e));
            worst = worst.max(d(ms.state_moment(r).map_err(err)?, *raw));
        }
    }
    Ok(CheckResult {
        name: "duffing_closed_form".into(),
        pass: worst <= tol,
        detail: format!("max relative deviation {worst:.3e} over {} steps (tolerance {tol:e})", sets.len() - 1),
    })
}

fn run_mixture(ctx: &mut Ctx) -> Result<Estimate, String> {
    let scn = ctx.scn;
    let ini = scn.resolve_initial()?;
    let cov = ini.cov.clone().ok_or("mixture methods need an initial covariance")?;
    let init = Manifold::single(ini.mean.clone(), cov).map_err(err)?;
    let cfg = scn.gmm_spec().config();
    let (t0, tf, h) = (ctx.t0, ctx.tf, ctx.h);
    let hf = scn.model.build_sde(ctx.units)?;
    let lf = match &scn.low_fidelity {
        Some(lf) => lf.build_sde(ctx.units)?,
        None => scn.model.build_sde(ctx.units)?,
    };
    let lf_ref: &dyn SdeModel = lf.as_ref();
    let hf_ref: &dyn SdeModel = hf.as_ref();
    let lf_map = move |x: &[TaylorPoly]| propagate::<TaylorPoly>(lf_ref, x, t0, tf, h);
    let lf_map: &PolyMap = &lf_map;
    let (initial, propagated, lf_image, nu, splits, mf) = match scn.method {
        Method::GmmAdaptive => {
            let r = ctx.timed("gmm_adaptive", || adaptive_propagate(&init, lf_map, &cfg).map_err(err))?;
            (r.initial, r.propagated, None, Some(r.nu), r.splits, None)
        }
        _ => {
            let r: MfResult = if scn.method == Method::MfDeterministic {
                let hf_prop = move |x: &[f64]| propagate::<f64>(hf_ref, x, t0, tf, h);
                ctx.timed("mf_deterministic", || mf_deterministic(lf_map, &hf_prop, &init, &cfg).map_err(err))?
            } else {
                let spec = scn.plasma_spec();
                let noise = if spec.bifidelity {
                    NoiseModel::BiFidelity { hf: hf_ref, lf: lf_ref }
                } else {
                    NoiseModel::Direct(hf_ref)
                };
                let run = NoiseRunConfig {
                    t0,
                    tf,
                    h,
                    plasma: spec.config(),
                };
                ctx.timed("mf_stochastic", || mf_stochastic(lf_map, noise, &init, &cfg, &run).map_err(err))?
            };
            let shift = r.max_shift();
            (r.initial, r.gmm, Some(r.lf), None, r.splits, Some(shift))
        }
    };
    let n = ini.mean.len();
    let mut header = vec!["id".to_string(), "weight".to_string()];
    for (q, u) in &ctx.names {
        header.push(format!("mean_{q} [{u}]"));
    }
    for i in 0..n {
        for j in i..n {
            header.push(format!("cov_{}_{} [{}]", ctx.names[i].0, ctx.names[j].0, unit_product(ctx.names[i].1, ctx.names[j].1)));
        }
    }
    if lf_image.is_some() {
        for (q, u) in &ctx.names {
            header.push(format!("lf_mean_{q} [{u}]"));
        }
    }
    if nu.is_some() {
        header.push("nu [-]".into());
    }
    let mut table = Table { header, rows: Vec::new() };
    for (l, k) in propagated.kernels.iter().enumerate() {
        let e = ctx.out.linear(&k.mean, &k.cov);
        let mut row = vec![k.id.to_string(), num(k.weight)];
        row.extend(e.mean.iter().map(|v| num(*v)));
        for i in 0..n {
            for j in i..n {
                row.push(num(e.cov[(i, j)]));
            }
        }
        if let Some(lf) = &lf_image {
            let m = ctx.out.linear(&lf.kernels[l].mean, &lf.kernels[l].cov).mean;
            row.extend(m.iter().map(|v| num(*v)));
        }
        if let Some(nu) = &nu {
            row.push(num(nu[l]));
        }
        table.rows.push(row);
    }
    ctx.outcome.tables.push(("mixture.csv".into(), table));
    ctx.metric("kernels", propagated.len() as f64, "-");
    ctx.metric("splits", splits as f64, "-");
    if let Some(s) = mf {
        let unit = if ctx.units.is_some() { "internal" } else { "mixed" };
        ctx.metric("max_lf_shift", s, unit);
    }
    if let Some(lf) = &lf_image {
        let (m, p) = mixture_moments(lf).map_err(err)?;
        let e = ctx.out.linear(&m, &p);
        for (i, (q, u)) in ctx.names.clone().iter().enumerate() {
            ctx.metric(&format!("lf_mean_{q}"), e.mean[i], u);
        }
        ctx.lf_estimate = Some(e);
    }
    ctx.outcome.summary.push(format!("{} kernels from {} initial after {splits} splits", propagated.len(), initial.len()));
    let (m, p) = mixture_moments(&propagated).map_err(err)?;
    Ok(ctx.out.linear(&m, &p))
}

fn run_mc(ctx: &mut Ctx, estimate: Option<&Estimate>) -> Result<Estimate, String> {
    let scn = ctx.scn;
    let spec = scn.mc.clone().ok_or("no mc section")?;
    let ini = scn.resolve_initial()?;
    let sampler = match &ini.cov {
        Some(p) => IcSampler::gaussian(ini.mean.clone(), p).map_err(err)?,
        None => IcSampler::Fixed(ini.mean.as_slice().to_vec()),
    };
    let cfg = McConfig {
        n_paths: spec.n_paths,
        base_seed: spec.seed,
        step: spec.step_s.map_or(ctx.h, |s| s / ctx.time_unit()),
        scheme: spec.scheme,
    };
    let samples = if scn.model.is_map() {
        let map = scn.model.build_map()?;
        let steps = scn.time.steps.unwrap_or(0);
        ctx.timed("mc", || simulate_map(&map, &sampler, steps, &cfg).map_err(err))?
    } else {
        let model = scn.model.build_sde(ctx.units)?;
        let (t0, tf) = (ctx.t0, ctx.tf);
        ctx.timed("mc", || simulate_paths(model.as_ref(), &sampler, t0, tf, &cfg).map_err(err))?
    };
    let mut out: Vec<Vec<f64>> = samples.samples.iter().map(|x| ctx.out.point(x)).collect::<uqprop::Result<_>>().map_err(err)?;
    if let Some(first) = out.first().cloned() {
        for &a in ctx.out.angles {
            let r = estimate.map_or(first[a], |e| e.mean[a]);
            for s in &mut out {
                s[a] = unwrap_angle(s[a], r);
            }
        }
    }
    let mo = sample_moments(&out, 2).map_err(err)?;
    ctx.metric("mc_paths", spec.n_paths as f64, "-");
    ctx.metric("mc_failed_paths", samples.failed.len() as f64, "-");
    ctx.outcome.summary.push(format!(
        "Monte Carlo: {} paths, seed {}, {} failed",
        spec.n_paths,
        spec.seed,
        samples.failed.len()
    ));
    if scn.output.dump_samples {
        let mut header = vec!["path".to_string()];
        header.extend(ctx.names.iter().map(|(q, u)| format!("{q} [{u}]")));
        let mut t = Table { header, rows: Vec::new() };
        let mut failed = samples.failed.iter().peekable();
        let mut path = 0usize;
        for s in &out {
            while failed.peek() == Some(&&path) {
                failed.next();
                path += 1;
            }
            let mut row = vec![path.to_string()];
            row.extend(s.iter().map(|v| num(*v)));
            t.rows.push(row);
            path += 1;
        }
        ctx.outcome.tables.push(("samples.csv".into(), t));
    }
    Ok(Estimate { mean: mo.mean, cov: mo.cov })
}

fn rel_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

fn write_estimate(ctx: &mut Ctx, est: &Estimate, reference: Option<&Estimate>) -> Result<(), String> {
    let n = est.mean.len();
    let report = match reference {
        Some(r) => Some(ErrorReport::compare(&est.mean, &est.cov, &r.mean, &r.cov).map_err(err)?),
        None => None,
    };
    let cols: &[&str] = if report.is_some() {
        &["quantity", "unit", "estimate", "reference", "relative_error"]
    } else {
        &["quantity", "unit", "estimate"]
    };
    let mut means = Table::new(cols);
    for (i, (q, u)) in ctx.names.iter().enumerate() {
        let mut row = vec![q.clone(), u.to_string(), num(est.mean[i])];
        if let (Some(r), Some(rep)) = (reference, &report) {
            row.push(num(r.mean[i]));
            row.push(rel_cell(rep.mean_rel[i]));
        }
        means.rows.push(row);
    }
    let mut cov_cols = vec!["row", "col"];
    cov_cols.extend(&cols[1..]);
    let mut cov = Table::new(&cov_cols);
    for i in 0..n {
        for j in i..n {
            let (qi, ui) = &ctx.names[i];
            let (qj, uj) = &ctx.names[j];
            let mut row = vec![qi.clone(), qj.clone(), unit_product(ui, uj), num(est.cov[(i, j)])];
            if let (Some(r), Some(rep)) = (reference, &report) {
                row.push(num(r.cov[(i, j)]));
                row.push(rel_cell(rep.cov_rel[i][j]));
            }
            cov.rows.push(row);
        }
    }
    ctx.outcome.tables.push(("means.csv".into(), means));
    ctx.outcome.tables.push(("covariance.csv".into(), cov));
    let lf_report = match (&ctx.lf_estimate, reference) {
        (Some(lf), Some(r)) => Some(ErrorReport::compare(&lf.mean, &lf.cov, &r.mean, &r.cov).map_err(err)?),
        _ => None,
    };
    if let Some(lf) = &lf_report {
        ctx.metric("lf_eps_mu", lf.eps_mu, "-");
        ctx.metric("lf_eps_lambda", lf.eps_lambda, "-");
    }
    if let Some(rep) = report {
        ctx.metric("eps_mu", rep.eps_mu, "-");
        ctx.metric("eps_lambda", rep.eps_lambda, "-");
        if let (Some(CheckSpec::MfImprovement { eps_mu_ratio_max }), Some(lf)) = (&ctx.scn.check, &lf_report) {
            let ratio = rep.eps_mu / lf.eps_mu;
            ctx.outcome.checks.push(CheckResult {
                name: "mf_improvement".into(),
                pass: ratio <= *eps_mu_ratio_max,
                detail: format!(
                    "eps_mu corrected {:.3e} vs low-fidelity {:.3e}: ratio {ratio:.3} (max {eps_mu_ratio_max})",
                    rep.eps_mu, lf.eps_mu
                ),
            });
        }
        if let Some(CheckSpec::McBands { eps_mu_max, eps_lambda_max }) = &ctx.scn.check {
            ctx.outcome.checks.push(CheckResult {
                name: "mc_bands".into(),
                pass: rep.eps_mu <= *eps_mu_max && rep.eps_lambda <= *eps_lambda_max,
                detail: format!(
                    "eps_mu {:.3e} (max {eps_mu_max:e}), eps_lambda {:.3e} (max {eps_lambda_max:e})",
                    rep.eps_mu, rep.eps_lambda
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_products() {
        assert_eq!(unit_product("km", "km"), "km^2");
        assert_eq!(unit_product("km", "km/s"), "km*km/s");
        assert_eq!(unit_product("km/s", "km/s"), "(km/s)^2");
        assert_eq!(unit_product("-", "rad"), "rad");
        assert_eq!(unit_product("-", "-"), "-");
    }
}
