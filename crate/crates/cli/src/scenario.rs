//! Scenario files: schema, validation and conversion into library objects.
//!
//! Field names carry their units. Orbital quantities are km, s and rad.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use uqprop::dynamics::{convert, thrust_sde, CoordSet, DuffingParams, KeplerSdeParams, LinearSde, SdeModel, ThrustSdeParams, TwoBodyJ2};
use uqprop::gmm::AdaptConfig;
use uqprop::mc::McScheme;
use uqprop::metrics::Units;
use uqprop::plasma::{Integrator, PlasmaConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "is_default")]
    pub units: UnitSystem,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_fidelity: Option<ModelSpec>,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plasma: Option<PlasmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmm: Option<GmmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSpec>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Plasma,
    PlasmaBifidelity,
    GmmAdaptive,
    MfDeterministic,
    MfStochastic,
    Mc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Plasma => "plasma",
            Method::PlasmaBifidelity => "plasma_bifidelity",
            Method::GmmAdaptive => "gmm_adaptive",
            Method::MfDeterministic => "mf_deterministic",
            Method::MfStochastic => "mf_stochastic",
            Method::Mc => "mc",
        }
    }

    fn needs_gaussian_ic(self) -> bool {
        matches!(self, Method::GmmAdaptive | Method::MfDeterministic | Method::MfStochastic)
    }

    fn needs_low_fidelity(self) -> bool {
        matches!(self, Method::PlasmaBifidelity | Method::MfDeterministic | Method::MfStochastic)
    }
}

/// Internal unit system. `pericenter` rescales orbital states so that the
/// initial pericentre radius and `μ` are both one; outputs are converted back.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    #[default]
    Physical,
    Pericenter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Noisy Duffing map; dimensionless, advanced in whole steps.
    Duffing { a: f64, b: f64, sigma: f64 },
    /// `dX = A X dt + B dW`, matrices given row by row.
    Linear { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
    KeplerPlanar { mu_km3_s2: f64, sigma_w_km2_s2_5: f64 },
    TwoBodyJ2 { mu_km3_s2: f64, r_eq_km: f64, j2: f64 },
    Thrust {
        mu_km3_s2: f64,
        r_eq_km: f64,
        j2: f64,
        thrust_km_s2: f64,
        sigma_thrust_km_s1_5: f64,
        sigma_alpha_rad_s0_5: f64,
        sigma_beta_rad_s0_5: f64,
    },
}

impl ModelSpec {
    pub fn state_dim(&self) -> usize {
        match self {
            ModelSpec::Duffing { .. } => 2,
            ModelSpec::Linear { a, .. } => a.len(),
            ModelSpec::KeplerPlanar { .. } => 4,
            ModelSpec::TwoBodyJ2 { .. } | ModelSpec::Thrust { .. } => 6,
        }
    }

    pub fn is_map(&self) -> bool {
        matches!(self, ModelSpec::Duffing { .. })
    }

    pub fn mu(&self) -> Option<f64> {
        match self {
            ModelSpec::KeplerPlanar { mu_km3_s2, .. } | ModelSpec::TwoBodyJ2 { mu_km3_s2, .. } | ModelSpec::Thrust { mu_km3_s2, .. } => {
                Some(*mu_km3_s2)
            }
            _ => None,
        }
    }

    fn is_orbit6(&self) -> bool {
        matches!(self, ModelSpec::TwoBodyJ2 { .. } | ModelSpec::Thrust { .. })
    }

    pub fn quantities(&self) -> Vec<(String, &'static str)> {
        let named = |v: &[(&str, &'static str)]| v.iter().map(|(n, u)| (n.to_string(), *u)).collect();
        match self {
            ModelSpec::Duffing { .. } => named(&[("x", "-"), ("y", "-")]),
            ModelSpec::Linear { a, .. } => (0..a.len()).map(|i| (format!("x{i}"), "-")).collect(),
            ModelSpec::KeplerPlanar { .. } => named(&[("x", "km"), ("y", "km"), ("vx", "km/s"), ("vy", "km/s")]),
            _ => named(&[("x", "km"), ("y", "km"), ("z", "km"), ("vx", "km/s"), ("vy", "km/s"), ("vz", "km/s")]),
        }
    }

    /// The stochastic map, for map models.
    pub fn build_map(&self) -> Result<DuffingParams, String> {
        match self {
            ModelSpec::Duffing { a, b, sigma } => DuffingParams::new(*a, *b, *sigma).map_err(|e| e.to_string()),
            _ => Err("not a map model".into()),
        }
    }

    /// The SDE in the internal unit system.
    pub fn build_sde(&self, units: Option<Units>) -> Result<Box<dyn SdeModel>, String> {
        let (l, t) = units.map_or((1.0, 1.0), |u| (u.length, u.time));
        let mu_s = t * t / l.powi(3);
        let e = |e: uqprop::Error| e.to_string();
        Ok(match self {
            ModelSpec::Duffing { .. } => return Err("the Duffing model is a discrete map, not an SDE".into()),
            ModelSpec::Linear { a, b } => Box::new(LinearSde::new(a.clone(), b.clone()).map_err(e)?),
            ModelSpec::KeplerPlanar { mu_km3_s2, sigma_w_km2_s2_5 } => Box::new(
                KeplerSdeParams::new(mu_km3_s2 * mu_s, sigma_w_km2_s2_5 * t.powf(2.5) / (l * l)).map_err(e)?,
            ),
            ModelSpec::TwoBodyJ2 { mu_km3_s2, r_eq_km, j2 } => Box::new(TwoBodyJ2 {
                mu: mu_km3_s2 * mu_s,
                r_e: r_eq_km / l,
                j2: *j2,
            }),
            ModelSpec::Thrust {
                mu_km3_s2,
                r_eq_km,
                j2,
                thrust_km_s2,
                sigma_thrust_km_s1_5,
                sigma_alpha_rad_s0_5,
                sigma_beta_rad_s0_5,
            } => Box::new(
                thrust_sde(ThrustSdeParams {
                    mu: mu_km3_s2 * mu_s,
                    r_e: r_eq_km / l,
                    j2: *j2,
                    a_t: thrust_km_s2 * t * t / l,
                    sigma_at: sigma_thrust_km_s1_5 * t.powf(1.5) / l,
                    sigma_alpha: sigma_alpha_rad_s0_5 * t.sqrt(),
                    sigma_beta: sigma_beta_rad_s0_5 * t.sqrt(),
                })
                .map_err(e)?,
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputCoords {
    #[default]
    Cartesian,
    /// `(a km, e, i rad, raan rad, argp rad, true anomaly rad)`.
    Keplerian,
}

/// Initial distribution. Without `std` or `cov` the state is deterministic.
/// Spreads are always Cartesian, in km and km/s for orbital models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "is_default")]
    pub coords: InputCoords,
    pub state: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "is_default")]
    pub t0_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_s: Option<f64>,
    /// Map applications, for map models only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Extra moment outputs for the PLASMA methods.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlasmaSpec {
    pub order: usize,
    pub integrator: Integrator,
    pub substeps: usize,
    /// Noise runs of `mf_stochastic` use the bi-fidelity scheme.
    #[serde(skip_serializing_if = "is_default")]
    pub bifidelity: bool,
}

impl Default for PlasmaSpec {
    fn default() -> Self {
        let c = PlasmaConfig::default();
        PlasmaSpec {
            order: c.order,
            integrator: c.integrator,
            substeps: c.substeps,
            bifidelity: false,
        }
    }
}

impl PlasmaSpec {
    pub fn config(&self) -> PlasmaConfig {
        PlasmaConfig {
            order: self.order,
            integrator: self.integrator,
            substeps: self.substeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmSpec {
    pub eps_nu: f64,
    pub n_max: usize,
    pub alpha_min: f64,
    pub zeta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ut_kappa: Option<f64>,
    pub order: usize,
    pub split_lambda: f64,
}

impl Default for GmmSpec {
    fn default() -> Self {
        let c = AdaptConfig::default();
        GmmSpec {
            eps_nu: c.eps_nu,
            n_max: c.n_max,
            alpha_min: c.alpha_min,
            zeta: c.zeta,
            ut_kappa: c.ut_kappa,
            order: c.order,
            split_lambda: c.split_lambda,
        }
    }
}

impl GmmSpec {
    pub fn config(&self) -> AdaptConfig {
        AdaptConfig {
            eps_nu: self.eps_nu,
            n_max: self.n_max,
            alpha_min: self.alpha_min,
            zeta: self.zeta,
            ut_kappa: self.ut_kappa,
            order: self.order,
            split_lambda: self.split_lambda,
        }
    }
}

/// Monte Carlo run: the method itself for `method = "mc"`, otherwise a
/// reference the estimate is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub n_paths: usize,
    pub seed: u64,
    /// Defaults to `time.step_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_s: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: McScheme,
}

fn default_scheme() -> McScheme {
    McScheme::EulerMaruyama
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputCoords {
    #[default]
    State,
    /// Modified equinoctial elements with mean longitude.
    MeeMean,
    Keplerian,
}

impl OutputCoords {
    pub fn coord_set(self) -> Option<CoordSet> {
        match self {
            OutputCoords::State => None,
            OutputCoords::MeeMean => Some(CoordSet::MeeMean),
            OutputCoords::Keplerian => Some(CoordSet::Keplerian),
        }
    }

    /// Indices of angle components, which need unwrapping across samples.
    pub fn angles(self) -> &'static [usize] {
        match self {
            OutputCoords::State => &[],
            OutputCoords::MeeMean => &[5],
            OutputCoords::Keplerian => &[2, 3, 4, 5],
        }
    }

    pub fn quantities(self) -> Option<Vec<(String, &'static str)>> {
        let v: &[(&str, &'static str)] = match self {
            OutputCoords::State => return None,
            OutputCoords::MeeMean => &[("p", "km"), ("f", "-"), ("g", "-"), ("h", "-"), ("k", "-"), ("lambda", "rad")],
            OutputCoords::Keplerian => &[("a", "km"), ("e", "-"), ("i", "rad"), ("raan", "rad"), ("argp", "rad"), ("nu", "rad")],
        };
        Some(v.iter().map(|(n, u)| (n.to_string(), *u)).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "is_default")]
    pub coords: OutputCoords,
    /// Write every Monte Carlo terminal state to `samples.csv`.
    #[serde(skip_serializing_if = "is_default")]
    pub dump_samples: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// PLASMA on the Duffing map against the closed-form moment recursion.
    DuffingClosedForm { tolerance: f64 },
    /// Estimate against the co-run Monte Carlo reference.
    McBands { eps_mu_max: f64, eps_lambda_max: f64 },
    /// Corrected mixture mean error at most this fraction of the uncorrected
    /// low-fidelity one, both against the Monte Carlo reference.
    MfImprovement { eps_mu_ratio_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn fail<T>(path: &str, message: impl Into<String>) -> Result<T, ValidationError> {
    Err(ValidationError {
        path: path.into(),
        message: message.into(),
    })
}

fn positive(path: &str, v: Option<f64>) -> Result<f64, ValidationError> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => fail(path, format!("must be positive and finite, got {x}")),
        None => fail(path, "required for continuous-time models"),
    }
}

/// From energy and angular momentum, so equatorial and circular orbits work.
fn pericenter_radius(x: &[f64], mu: f64) -> Result<f64, String> {
    let r = DVector::from_column_slice(&x[..3]);
    let v = DVector::from_column_slice(&x[3..]);
    let a = 1.0 / (2.0 / r.norm() - v.norm_squared() / mu);
    let h2 = r.cross(&v).norm_squared();
    if !(a > 0.0) || h2 == 0.0 {
        return Err("pericenter units need a bound, non-degenerate orbit".into());
    }
    let e = (1.0 - h2 / (mu * a)).max(0.0).sqrt();
    Ok(a * (1.0 - e))
}

/// Resolved initial distribution in internal units.
pub struct Initial {
    pub mean: DVector<f64>,
    pub cov: Option<DMatrix<f64>>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ValidationError> {
        toml::from_str(text).map_err(|e| ValidationError {
            path: "<config>".into(),
            message: e.message().to_string() + &e.span().map_or(String::new(), |s| format!(" (bytes {}..{})", s.start, s.end)),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn plasma_spec(&self) -> PlasmaSpec {
        self.plasma.clone().unwrap_or_default()
    }

    pub fn gmm_spec(&self) -> GmmSpec {
        self.gmm.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.schema_version != SCHEMA_VERSION {
            return fail("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version));
        }
        if self.name.trim().is_empty() {
            return fail("name", "must not be empty");
        }
        self.validate_model("model", &self.model)?;
        let n = self.model.state_dim();
        let m = self.method;
        if self.model.is_map() && !matches!(m, Method::Plasma | Method::Mc) {
            return fail("method", "map models support only plasma and mc");
        }
        match (&self.low_fidelity, m.needs_low_fidelity()) {
            (None, true) => return fail("low_fidelity", "required by this method"),
            (Some(_), false) => return fail("low_fidelity", "not used by this method"),
            (Some(lf), true) => {
                self.validate_model("low_fidelity", lf)?;
                if lf.is_map() || lf.state_dim() != n {
                    return fail("low_fidelity", "must be an SDE model with the same state size as model");
                }
            }
            (None, false) => {}
        }
        if self.units == UnitSystem::Pericenter && self.model.mu().is_none() {
            return fail("units", "pericenter units need an orbital model");
        }
        self.validate_initial(n)?;
        let gaussian = self.initial.std.is_some() || self.initial.cov.is_some();
        if m.needs_gaussian_ic() && !gaussian {
            return fail("initial", "this method needs an initial spread (std or cov)");
        }
        if matches!(m, Method::Plasma | Method::PlasmaBifidelity) && gaussian {
            return fail("initial", "PLASMA starts from a deterministic state; remove std/cov");
        }
        self.validate_time()?;
        if let Some(p) = &self.plasma {
            if p.order < 1 || p.substeps < 1 {
                return fail("plasma", "order and substeps must be at least 1");
            }
            if p.bifidelity && m != Method::MfStochastic {
                return fail("plasma.bifidelity", "only used by mf_stochastic");
            }
        }
        if m == Method::MfStochastic && self.plasma_spec().order < 2 {
            return fail("plasma.order", "mf_stochastic needs order 2 or more");
        }
        if self.gmm.is_some() && !m.needs_gaussian_ic() {
            return fail("gmm", "only used by the mixture methods");
        }
        if m.needs_gaussian_ic() {
            self.gmm_spec().config().validate().map_err(|e| ValidationError {
                path: "gmm".into(),
                message: e.to_string(),
            })?;
        }
        match &self.mc {
            None if m == Method::Mc => return fail("mc", "required by method mc"),
            Some(mc) => {
                if mc.n_paths < 2 {
                    return fail("mc.n_paths", "at least 2 paths are needed for a covariance");
                }
                if let Some(h) = mc.step_s {
                    positive("mc.step_s", Some(h))?;
                }
            }
            None => {}
        }
        let coords = self.output.coords;
        if coords != OutputCoords::State {
            if !self.model.is_orbit6() {
                return fail("output.coords", "element outputs need a three-dimensional orbital model");
            }
            if !matches!(m, Method::Plasma | Method::PlasmaBifidelity | Method::Mc) {
                return fail("output.coords", "element outputs are available for plasma, plasma_bifidelity and mc");
            }
        }
        if self.output.dump_samples && self.mc.is_none() {
            return fail("output.dump_samples", "needs an mc section");
        }
        match &self.check {
            Some(CheckSpec::DuffingClosedForm { tolerance }) => {
                if !(matches!(self.model, ModelSpec::Duffing { .. }) && m == Method::Plasma) {
                    return fail("check", "duffing_closed_form needs the duffing model and method plasma");
                }
                positive("check.tolerance", Some(*tolerance))?;
            }
            Some(CheckSpec::McBands { eps_mu_max, eps_lambda_max }) => {
                if self.mc.is_none() || m == Method::Mc {
                    return fail("check", "mc_bands needs an mc reference and a non-mc method");
                }
                positive("check.eps_mu_max", Some(*eps_mu_max))?;
                positive("check.eps_lambda_max", Some(*eps_lambda_max))?;
            }
            Some(CheckSpec::MfImprovement { eps_mu_ratio_max }) => {
                if self.mc.is_none() || !matches!(m, Method::MfDeterministic | Method::MfStochastic) {
                    return fail("check", "mf_improvement needs a multifidelity method and an mc reference");
                }
                positive("check.eps_mu_ratio_max", Some(*eps_mu_ratio_max))?;
            }
            None => {}
        }
        Ok(())
    }

    fn validate_model(&self, path: &str, spec: &ModelSpec) -> Result<(), ValidationError> {
        match spec {
            ModelSpec::Duffing { a, b, sigma } => {
                DuffingParams::new(*a, *b, *sigma).map_err(|e| ValidationError {
                    path: path.into(),
                    message: e.to_string(),
                })?;
            }
            ModelSpec::Linear { a, b } => {
                LinearSde::new(a.clone(), b.clone()).map_err(|e| ValidationError {
                    path: path.into(),
                    message: e.to_string(),
                })?;
            }
            _ => {
                spec.build_sde(None).map_err(|message| ValidationError {
                    path: path.into(),
                    message,
                })?;
            }
        }
        Ok(())
    }

    fn validate_initial(&self, n: usize) -> Result<(), ValidationError> {
        let ini = &self.initial;
        if ini.state.len() != n {
            return fail("initial.state", format!("expected {n} entries, got {}", ini.state.len()));
        }
        if ini.state.iter().any(|v| !v.is_finite()) {
            return fail("initial.state", "entries must be finite");
        }
        if ini.coords == InputCoords::Keplerian && !self.model.is_orbit6() {
            return fail("initial.coords", "keplerian input needs a three-dimensional orbital model");
        }
        match (&ini.std, &ini.cov) {
            (Some(_), Some(_)) => return fail("initial", "give std or cov, not both"),
            (Some(s), None) => {
                if s.len() != n || s.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return fail("initial.std", format!("expected {n} non-negative entries"));
                }
            }
            (None, Some(c)) => {
                if c.len() != n || c.iter().any(|r| r.len() != n) {
                    return fail("initial.cov", format!("expected a {n} x {n} matrix"));
                }
                let p = DMatrix::from_fn(n, n, |i, j| c[i][j]);
                if (&p - p.transpose()).amax() > 1e-12 * p.amax().max(1e-300) {
                    return fail("initial.cov", "must be symmetric");
                }
                if p.symmetric_eigenvalues().min() < -1e-12 * p.amax() {
                    return fail("initial.cov", "must be positive semi-definite");
                }
            }
            (None, None) => {}
        }
        self.resolve_initial().map(|_| ()).map_err(|message| ValidationError {
            path: "initial".into(),
            message,
        })
    }

    fn validate_time(&self) -> Result<(), ValidationError> {
        let t = &self.time;
        if self.model.is_map() {
            if t.steps.is_none() {
                return fail("time.steps", "required for map models");
            }
            if t.tf_s.is_some() || t.step_s.is_some() || !t.outputs_s.is_empty() {
                return fail("time", "map models take only steps");
            }
            return Ok(());
        }
        if t.steps.is_some() {
            return fail("time.steps", "only for map models; use tf_s and step_s");
        }
        let tf = t.tf_s.unwrap_or(f64::NAN);
        if !(tf > t.t0_s) {
            return fail("time.tf_s", "required and must exceed t0_s");
        }
        positive("time.step_s", t.step_s)?;
        if t.outputs_s.iter().any(|&s| !(s >= t.t0_s && s <= tf)) {
            return fail("time.outputs_s", "output times must lie in [t0_s, tf_s]");
        }
        if !t.outputs_s.is_empty() && !matches!(self.method, Method::Plasma | Method::PlasmaBifidelity) {
            return fail("time.outputs_s", "only used by the PLASMA methods");
        }
        Ok(())
    }

    /// Internal units, when the scenario asks for rescaling.
    pub fn internal_units(&self) -> Result<Option<Units>, String> {
        if self.units == UnitSystem::Physical {
            return Ok(None);
        }
        let mu = self.model.mu().ok_or("pericenter units need an orbital model")?;
        let x = self.cartesian_mean()?;
        let x6 = if x.len() == 4 { vec![x[0], x[1], 0.0, x[2], x[3], 0.0] } else { x };
        Ok(Some(Units::pericenter(pericenter_radius(&x6, mu)?, mu)))
    }

    fn cartesian_mean(&self) -> Result<Vec<f64>, String> {
        match self.initial.coords {
            InputCoords::Cartesian => Ok(self.initial.state.clone()),
            InputCoords::Keplerian => {
                let mu = self.model.mu().ok_or("keplerian input needs an orbital model")?;
                convert::<f64>(&self.initial.state, CoordSet::Keplerian, CoordSet::Cartesian, mu).map_err(|e| e.to_string())
            }
        }
    }

    /// Per-component factor from internal to physical units.
    pub fn state_scale(&self, units: Option<Units>) -> Vec<f64> {
        let n = self.model.state_dim();
        match units {
            None => vec![1.0; n],
            Some(u) => {
                let v = u.length / u.time;
                (0..n).map(|i| if i < n / 2 { u.length } else { v }).collect()
            }
        }
    }

    /// Initial mean and covariance in internal units.
    pub fn resolve_initial(&self) -> Result<Initial, String> {
        let units = self.internal_units()?;
        let s = DVector::from_vec(self.state_scale(units));
        let mean = DVector::from_vec(self.cartesian_mean()?).component_div(&s);
        let n = mean.len();
        let cov = match (&self.initial.std, &self.initial.cov) {
            (Some(sd), _) => Some(DMatrix::from_diagonal(&DVector::from_iterator(n, sd.iter().zip(s.iter()).map(|(a, b)| (a / b).powi(2))))),
            (_, Some(c)) => Some(DMatrix::from_fn(n, n, |i, j| c[i][j] / (s[i] * s[j]))),
            _ => None,
        };
        Ok(Initial { mean, cov })
    }
}
