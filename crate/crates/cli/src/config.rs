//! JSON run configuration.
//!
//! Every field has a default, so `{}` plus a mode is a complete config.
//! Physical defaults are the two-atom resonant set `omega = 10`, `beta = 1`,
//! `epsilon = 0.7836`.

use std::fmt;
use std::path::PathBuf;

use dhl_core::meanfield::SolverSettings;
use dhl_core::{Model, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed JSON, with position.
    Parse { line: usize, column: usize, message: String },
    /// Well-formed input that violates the schema or a bound.
    Invalid { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Invalid { field, message } => write!(f, "invalid config field `{field}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    PsiTime,
    PsiHopping,
    Critical,
    PhaseDiagram,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::PsiTime => "psi-time",
            Mode::PsiHopping => "psi-hopping",
            Mode::Critical => "critical",
            Mode::PhaseDiagram => "phase-diagram",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
            invalid(
                "mode",
                format!("unknown mode `{s}` (spectrum, psi-time, psi-hopping, critical, phase-diagram)"),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Center,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default = "linear")]
    pub scale: Scale,
}

fn linear() -> Scale {
    Scale::Linear
}

impl Axis {
    pub const fn linear(start: f64, stop: f64, count: usize) -> Axis {
        Axis {
            start,
            stop,
            count,
            scale: Scale::Linear,
        }
    }

    pub const fn log(start: f64, stop: f64, count: usize) -> Axis {
        Axis {
            start,
            stop,
            count,
            scale: Scale::Log,
        }
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.count < 1 {
            return Err(invalid(format!("{name}.count"), "must be >= 1"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(invalid(name, "start and stop must be finite"));
        }
        if self.start > self.stop {
            return Err(invalid(name, format!("start {} > stop {}", self.start, self.stop)));
        }
        if self.scale == Scale::Log && self.start <= 0.0 {
            return Err(invalid(format!("{name}.start"), "log axes need start > 0"));
        }
        Ok(())
    }

    /// Grid values; endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.stop;
                }
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * f,
                    Scale::Log => {
                        let (a, b) = (self.start.log10(), self.stop.log10());
                        10f64.powf(a + (b - a) * f)
                    }
                }
            })
            .collect()
    }
}

/// Physical parameters as written in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub omega: f64,
    pub omega_a: Option<f64>,
    pub omega_c: Option<f64>,
    pub beta: f64,
    /// `omega_c - mu`; ignored when `mu` is given.
    pub epsilon: f64,
    pub mu: Option<f64>,
    /// Total decay, split evenly unless `gamma_a`/`gamma_c` are given.
    pub gamma: f64,
    pub gamma_a: Option<f64>,
    pub gamma_c: Option<f64>,
    pub kappa: f64,
    pub n_atoms: usize,
    pub n_max: usize,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            omega: 10.0,
            omega_a: None,
            omega_c: None,
            beta: 1.0,
            epsilon: 0.7836,
            mu: None,
            gamma: 0.0,
            gamma_a: None,
            gamma_c: None,
            kappa: 1.0,
            n_atoms: 2,
            n_max: 8,
        }
    }
}

impl ParamsConfig {
    /// Resolves to [`SystemParams`] with total decay `gamma`.
    pub fn system(&self, gamma: f64) -> SystemParams {
        let omega_c = self.omega_c.unwrap_or(self.omega);
        let (gamma_a, gamma_c) = match (self.gamma_a, self.gamma_c) {
            (None, None) => (0.5 * gamma, 0.5 * gamma),
            (a, c) => (a.unwrap_or(0.0), c.unwrap_or(0.0)),
        };
        SystemParams {
            omega_a: self.omega_a.unwrap_or(self.omega),
            omega_c,
            gamma_a,
            gamma_c,
            beta: self.beta,
            kappa: self.kappa,
            mu: self.mu.unwrap_or(omega_c - self.epsilon),
            n_atoms: self.n_atoms,
            n_max: self.n_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub params: ParamsConfig,
    /// Manifold indices `n` for the closed-form modes.
    #[serde(default = "default_manifolds")]
    pub manifolds: Vec<usize>,
    /// Total decay rates swept in spectrum and order-parameter modes;
    /// defaults to `[params.gamma]`.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default = "default_branch")]
    pub branch: Branch,
    /// Times for psi-time (axis) and for psi-hopping / critical.
    #[serde(default)]
    pub time: Option<Axis>,
    #[serde(default)]
    pub kappa: Option<Axis>,
    #[serde(default)]
    pub mu_rel: Option<Axis>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

fn default_manifolds() -> Vec<usize> {
    vec![3]
}

fn default_branch() -> Branch {
    Branch::Center
}

impl RunConfig {
    /// Fills mode-dependent axis defaults and the gamma list.
    fn resolve(mut self) -> Self {
        let [time, kappa, mu_rel] = default_axes(self.mode, self.params.kappa);
        self.time.get_or_insert(time);
        self.kappa.get_or_insert(kappa);
        self.mu_rel.get_or_insert(mu_rel);
        self.gammas.get_or_insert_with(|| vec![self.params.gamma]);
        self
    }

    pub fn gammas(&self) -> &[f64] {
        self.gammas.as_deref().unwrap_or(&[])
    }

    pub fn time_axis(&self) -> Axis {
        self.time.expect("resolved config")
    }

    pub fn kappa_axis(&self) -> Axis {
        self.kappa.expect("resolved config")
    }

    pub fn mu_rel_axis(&self) -> Axis {
        self.mu_rel.expect("resolved config")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        if p.mu.is_some() && p.epsilon != ParamsConfig::default().epsilon {
            return Err(invalid("params.mu", "give either mu or epsilon, not both"));
        }
        if (p.gamma_a.is_some() || p.gamma_c.is_some()) && (p.gamma != 0.0 || self.gammas().len() > 1) {
            return Err(invalid("params.gamma", "give either gamma or gamma_a/gamma_c, not both"));
        }
        if self.gammas().is_empty() {
            return Err(invalid("gammas", "must not be empty"));
        }
        for &g in self.gammas() {
            Model::new(p.system(g)).map_err(|e| invalid("params", e.to_string()))?;
        }
        if self.manifolds.is_empty() && self.mode != Mode::PhaseDiagram {
            return Err(invalid("manifolds", "must not be empty"));
        }
        self.time_axis().validate("time")?;
        self.kappa_axis().validate("kappa")?;
        self.mu_rel_axis().validate("mu_rel")?;
        if self.time_axis().start < 0.0 {
            return Err(invalid("time.start", "times must be >= 0"));
        }
        if self.kappa_axis().start < 0.0 {
            return Err(invalid("kappa.start", "hopping must be >= 0"));
        }
        self.solver.validate().map_err(|e| invalid("solver", e.to_string()))?;
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be >= 1"));
        }
        Ok(())
    }

    /// Resolved config as a single JSON line, without runtime-only options.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

/// Default `time`, `kappa` and `mu_rel` axes of a mode.
fn default_axes(mode: Mode, kappa: f64) -> [Axis; 3] {
    let (time, hopping) = match mode {
        Mode::PsiTime => (Axis::linear(0.0, 10.0, 101), Axis::linear(kappa, kappa, 1)),
        Mode::PsiHopping => (Axis::linear(0.0, 0.0, 1), Axis::linear(0.0, 2.0, 101)),
        Mode::Critical | Mode::Spectrum => (Axis::linear(0.0, 0.0, 1), Axis::linear(kappa, kappa, 1)),
        Mode::PhaseDiagram => (Axis::linear(0.0, 0.0, 1), Axis::log(1e-3, 1.0, 64)),
    };
    [time, hopping, Axis::linear(-2.5, 0.5, 64)]
}

const AXES: [&str; 3] = ["time", "kappa", "mu_rel"];

fn parse_value(text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses, resolves and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, None, &[])
}

const PARAM_KEYS: [&str; 12] = [
    "omega", "omega_a", "omega_c", "beta", "epsilon", "mu", "gamma", "gamma_a", "gamma_c", "kappa", "n_atoms",
    "n_max",
];

/// Like [`parse_config`], with a mode override and `key=value` overrides.
///
/// Keys are dotted paths into the document (`time.count=5`); bare parameter
/// names with scalar values (`gamma=0.02`) address `params`, while an object
/// value for `kappa` sets the hopping axis. Values are JSON, or strings when
/// they do not parse as JSON.
pub fn parse_config_with(text: &str, mode: Option<Mode>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut doc = parse_value(text)?;
    if !doc.is_object() {
        return Err(invalid("<root>", "config must be a JSON object"));
    }
    if let Some(m) = mode {
        doc["mode"] = Value::String(m.as_str().into());
    }
    let mut parsed = Vec::new();
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| invalid(item.as_str(), "override must look like key=value"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let path: Vec<&str> = if !key.contains('.') && PARAM_KEYS.contains(&key) && !value.is_object() {
            vec!["params", key]
        } else {
            key.split('.').collect()
        };
        parsed.push((key, path, value));
    }
    // Partial axis overrides start from the mode default, which may depend
    // on the other overrides.
    let partial_axis = |p: &Vec<&str>| p.len() > 1 && AXES.contains(&p[0]);
    for (key, path, value) in parsed.iter().filter(|o| !partial_axis(&o.1)) {
        set_path(&mut doc, path, value.clone()).map_err(|m| invalid(*key, m))?;
    }
    if parsed.iter().any(|o| partial_axis(&o.1)) {
        let seed: RunConfig = serde_json::from_value(doc.clone()).map_err(|e| invalid("<schema>", e.to_string()))?;
        let defaults = default_axes(seed.mode, seed.params.kappa);
        for (name, axis) in AXES.iter().zip(defaults) {
            if doc.get(*name).is_none_or(Value::is_null) {
                doc[*name] = serde_json::to_value(axis).expect("axis serialises");
            }
        }
    }
    for (key, path, value) in parsed.iter().filter(|o| partial_axis(&o.1)) {
        set_path(&mut doc, path, value.clone()).map_err(|m| invalid(*key, m))?;
    }
    if doc.get("mode").is_none() {
        return Err(invalid("mode", "missing (give it in the config or on the command line)"));
    }
    let config: RunConfig = serde_json::from_value(doc).map_err(|e| invalid("<schema>", e.to_string()))?;
    let config = config.resolve();
    config.validate()?;
    Ok(config)
}

fn set_path(doc: &mut Value, path: &[&str], value: Value) -> Result<(), String> {
    let (last, parents) = path.split_last().ok_or("empty key")?;
    let mut node = doc;
    for part in parents {
        let obj = node.as_object_mut().ok_or(format!("`{part}` is not inside an object"))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or("parent is not an object")?;
    obj.insert(last.to_string(), value);
    Ok(())
}
