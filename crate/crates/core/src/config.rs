//! Run configuration: a flat `key = value` text format (or an equivalent
//! JSON object) validated into typed parameters.
//!
//! ```text
//! # resonant drive, second laser on the lower sideband
//! drive.omega1_ueV = 30
//! drive.omega2_ueV = 10
//! drive.delta2_ueV = 30
//! dissipation.gamma_ueV = 1
//! dissipation.gamma_prime_ueV = 1
//! grid.omega_min_ueV = -100
//! grid.omega_max_ueV = 100
//! grid.points = 2001
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::PropagatorConfig;
use crate::floquet::FloquetConfig;
use crate::params::{DissipationParams, DriveParams};
use crate::phonon::PhononParams;
use crate::spectrum::{uniform_grid, SpectrumConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    DuplicateKey,
    MissingKey,
    TypeMismatch,
    ConstraintViolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConfigErrorKind::Syntax => "syntax error",
            ConfigErrorKind::UnknownKey => "unknown key",
            ConfigErrorKind::DuplicateKey => "duplicate key",
            ConfigErrorKind::MissingKey => "missing key",
            ConfigErrorKind::TypeMismatch => "type mismatch",
            ConfigErrorKind::ConstraintViolation => "constraint violation",
        };
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "{kind}")?;
        if let Some(key) = &self.key {
            write!(f, " `{key}`")?;
        }
        if !self.message.is_empty() {
            write!(f, ": {}", self.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: Value,
    line: Option<usize>,
}

const KEYS: &[&str] = &[
    "drive.omega1_ueV",
    "drive.omega2_ueV",
    "drive.delta1_ueV",
    "drive.delta2_ueV",
    "drive.phi_rad",
    "drive.frame_origin_ueV",
    "dissipation.gamma_ueV",
    "dissipation.gamma_prime_ueV",
    "numerics.step_max_ps",
    "numerics.rel_tol",
    "numerics.abs_tol",
    "numerics.t_transient_factor",
    "numerics.ss_tol",
    "numerics.period_samples",
    "numerics.sample_offset_ps",
    "numerics.tail_tol",
    "numerics.tau_max_ps",
    "numerics.tau_step_ps",
    "numerics.window_hwhm_ueV",
    "grid.omega_min_ueV",
    "grid.omega_max_ueV",
    "grid.points",
    "floquet.order",
    "sweep.parameter",
    "sweep.min",
    "sweep.max",
    "sweep.points",
    "sweep.scale",
    "phonon.alpha_ps2",
    "phonon.temperature_K",
    "phonon.omega_b_ueV",
    "phonon.omega_rabi_ueV",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Second-drive Rabi energy Ω₂.
    Omega2,
    /// Second-drive detuning Δ₂.
    Delta2,
    /// Beat frequency Δ = Δ₁ − Δ₂, realised by moving Δ₂.
    Delta,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Omega2 => "omega2",
            SweepParameter::Delta2 => "delta2",
            SweepParameter::Delta => "delta",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(&self, base: &DriveParams, value: f64) -> DriveParams {
        let mut p = *base;
        match self {
            SweepParameter::Omega2 => p.omega2 = value,
            SweepParameter::Delta2 => p.delta2 = value,
            SweepParameter::Delta => p.delta2 = p.delta1 - value,
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepScale {
    Linear,
    /// Points uniform in Ω², i.e. in laser power.
    QuadraticInPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            SweepScale::Linear => uniform_grid(self.min, self.max, self.points),
            SweepScale::QuadraticInPower => {
                uniform_grid(self.min * self.min, self.max * self.max, self.points)
                    .into_iter()
                    .map(f64::sqrt)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        uniform_grid(self.omega_min, self.omega_max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub drive: DriveParams,
    pub dissipation: DissipationParams,
    pub spectrum: SpectrumConfig,
    pub grid: GridSpec,
    pub floquet: Option<FloquetConfig>,
    pub sweep: Option<SweepAxis>,
    pub phonon: PhononParams,
    /// Rabi energy for the phonon estimate; `None` means max(Ω₁, Ω₂).
    pub phonon_omega_rabi: Option<f64>,
}

fn err(kind: ConfigErrorKind, key: &str, line: Option<usize>, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        kind,
        key: Some(key.to_string()),
        line,
        message: msg.into(),
    }
}

fn parse_scalar(raw: &str) -> Value {
    if let Some(s) = raw
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .or_else(|| raw.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')))
    {
        return Value::Str(s.to_string());
    }
    if let Ok(i) = raw.parse::<i64>() {
        return Value::Int(i);
    }
    match raw.parse::<f64>() {
        Ok(f) => Value::Float(f),
        Err(_) => Value::Str(raw.to_string()),
    }
}

fn insert(
    map: &mut BTreeMap<String, Entry>,
    key: String,
    value: Value,
    line: Option<usize>,
) -> ConfigResult<()> {
    if !KEYS.contains(&key.as_str()) {
        return Err(err(ConfigErrorKind::UnknownKey, &key, line, ""));
    }
    if let Some(prev) = map.get(&key) {
        let msg = match prev.line {
            Some(l) => format!("first set on line {l}"),
            None => String::new(),
        };
        return Err(err(ConfigErrorKind::DuplicateKey, &key, line, msg));
    }
    map.insert(key, Entry { value, line });
    Ok(())
}

fn parse_flat(text: &str) -> ConfigResult<BTreeMap<String, Entry>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                kind: ConfigErrorKind::Syntax,
                key: None,
                line: Some(line),
                message: format!("expected `key = value`, found `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError {
                kind: ConfigErrorKind::Syntax,
                key: (!key.is_empty()).then(|| key.to_string()),
                line: Some(line),
                message: "empty key or value".into(),
            });
        }
        insert(&mut map, key.to_string(), parse_scalar(value), Some(line))?;
    }
    Ok(map)
}

fn flatten_json(
    prefix: &str,
    value: &serde_json::Value,
    map: &mut BTreeMap<String, Entry>,
) -> ConfigResult<()> {
    use serde_json::Value as J;
    match value {
        J::Object(obj) => {
            for (k, v) in obj {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, map)?;
            }
            Ok(())
        }
        J::Number(n) => {
            let v = match n.as_i64() {
                Some(i) => Value::Int(i),
                None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            };
            insert(map, prefix.to_string(), v, None)
        }
        J::String(s) => insert(map, prefix.to_string(), Value::Str(s.clone()), None),
        _ => Err(err(
            ConfigErrorKind::TypeMismatch,
            prefix,
            None,
            "expected a number or string",
        )),
    }
}

fn parse_json(text: &str) -> ConfigResult<BTreeMap<String, Entry>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError {
        kind: ConfigErrorKind::Syntax,
        key: None,
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(ConfigError {
            kind: ConfigErrorKind::Syntax,
            key: None,
            line: None,
            message: "top level must be an object".into(),
        });
    }
    let mut map = BTreeMap::new();
    flatten_json("", &value, &mut map)?;
    Ok(map)
}

/// Typed accessors that remember where each value came from.
struct Reader {
    map: BTreeMap<String, Entry>,
}

impl Reader {
    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).and_then(|e| e.line)
    }

    fn float(&self, key: &str) -> ConfigResult<Option<f64>> {
        let Some(e) = self.map.get(key) else {
            return Ok(None);
        };
        let v = match &e.value {
            Value::Int(i) => *i as f64,
            Value::Float(f) => *f,
            Value::Str(s) => {
                return Err(err(
                    ConfigErrorKind::TypeMismatch,
                    key,
                    e.line,
                    format!("expected a number, found `{s}`"),
                ))
            }
        };
        if !v.is_finite() {
            return Err(err(ConfigErrorKind::ConstraintViolation, key, e.line, "must be finite"));
        }
        Ok(Some(v))
    }

    fn required_float(&self, key: &str) -> ConfigResult<f64> {
        self.float(key)?
            .ok_or_else(|| err(ConfigErrorKind::MissingKey, key, None, ""))
    }

    /// Float that must satisfy `ok`, described by `what` in the error.
    fn checked(&self, key: &str, ok: impl Fn(f64) -> bool, what: &str) -> ConfigResult<Option<f64>> {
        match self.float(key)? {
            Some(v) if !ok(v) => Err(err(
                ConfigErrorKind::ConstraintViolation,
                key,
                self.line(key),
                format!("{what}, got {v}"),
            )),
            v => Ok(v),
        }
    }

    fn uint(&self, key: &str) -> ConfigResult<Option<usize>> {
        let Some(e) = self.map.get(key) else {
            return Ok(None);
        };
        match &e.value {
            Value::Int(i) if *i >= 0 => Ok(Some(*i as usize)),
            Value::Int(i) => Err(err(
                ConfigErrorKind::ConstraintViolation,
                key,
                e.line,
                format!("must be >= 0, got {i}"),
            )),
            other => Err(err(
                ConfigErrorKind::TypeMismatch,
                key,
                e.line,
                format!("expected an integer, found {}", describe(other)),
            )),
        }
    }

    fn string(&self, key: &str) -> ConfigResult<Option<String>> {
        let Some(e) = self.map.get(key) else {
            return Ok(None);
        };
        match &e.value {
            Value::Str(s) => Ok(Some(s.clone())),
            other => Err(err(
                ConfigErrorKind::TypeMismatch,
                key,
                e.line,
                format!("expected a string, found {}", describe(other)),
            )),
        }
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Int(i) => format!("integer {i}"),
        Value::Float(f) => format!("number {f}"),
        Value::Str(s) => format!("string `{s}`"),
    }
}

fn non_negative(v: f64) -> bool {
    v >= 0.0
}

fn positive(v: f64) -> bool {
    v > 0.0
}

/// Parses and validates a configuration. Text whose first non-blank
/// character is `{` is read as JSON.
pub fn parse_config(text: &str) -> ConfigResult<RunConfig> {
    let map = if text.trim_start().starts_with('{') {
        parse_json(text)?
    } else {
        parse_flat(text)?
    };
    let r = Reader { map };

    let omega1 = r.required_float("drive.omega1_ueV")?;
    if omega1 < 0.0 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "drive.omega1_ueV",
            r.line("drive.omega1_ueV"),
            format!("must be >= 0, got {omega1}"),
        ));
    }
    let drive = DriveParams {
        omega1,
        omega2: r.checked("drive.omega2_ueV", non_negative, "must be >= 0")?.unwrap_or(0.0),
        delta1: r.float("drive.delta1_ueV")?.unwrap_or(0.0),
        delta2: r.float("drive.delta2_ueV")?.unwrap_or(0.0),
        phi: r.float("drive.phi_rad")?.unwrap_or(0.0),
        frame_origin: r.float("drive.frame_origin_ueV")?.unwrap_or(0.0),
    };

    let gamma = r.required_float("dissipation.gamma_ueV")?;
    if !(gamma > 0.0) {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "dissipation.gamma_ueV",
            r.line("dissipation.gamma_ueV"),
            format!("must be > 0, got {gamma}"),
        ));
    }
    let dissipation = DissipationParams {
        gamma,
        gamma_prime: r
            .checked("dissipation.gamma_prime_ueV", non_negative, "must be >= 0")?
            .unwrap_or(0.0),
    };

    let pd = PropagatorConfig::default();
    let propagator = PropagatorConfig {
        step_max: r.checked("numerics.step_max_ps", positive, "must be > 0")?,
        rel_tol: r.checked("numerics.rel_tol", positive, "must be > 0")?.unwrap_or(pd.rel_tol),
        abs_tol: r.checked("numerics.abs_tol", positive, "must be > 0")?.unwrap_or(pd.abs_tol),
        t_transient_factor: r
            .checked("numerics.t_transient_factor", non_negative, "must be >= 0")?
            .unwrap_or(pd.t_transient_factor),
        ss_tol: r.checked("numerics.ss_tol", positive, "must be > 0")?.unwrap_or(pd.ss_tol),
    };
    let sd = SpectrumConfig::default();
    let period_samples = r.uint("numerics.period_samples")?.unwrap_or(sd.period_samples);
    if period_samples == 0 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "numerics.period_samples",
            r.line("numerics.period_samples"),
            "must be >= 1",
        ));
    }
    let spectrum = SpectrumConfig {
        propagator,
        period_samples,
        sample_offset: r
            .checked("numerics.sample_offset_ps", non_negative, "must be >= 0")?
            .unwrap_or(0.0),
        tail_tol: r.checked("numerics.tail_tol", positive, "must be > 0")?.unwrap_or(sd.tail_tol),
        tau_max: r.checked("numerics.tau_max_ps", positive, "must be > 0")?,
        tau_step: r.checked("numerics.tau_step_ps", positive, "must be > 0")?,
        window_hwhm: r.checked("numerics.window_hwhm_ueV", positive, "must be > 0")?,
    };

    let grid = GridSpec {
        omega_min: r.required_float("grid.omega_min_ueV")?,
        omega_max: r.required_float("grid.omega_max_ueV")?,
        points: r
            .uint("grid.points")?
            .ok_or_else(|| err(ConfigErrorKind::MissingKey, "grid.points", None, ""))?,
    };
    if grid.points < 2 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "grid.points",
            r.line("grid.points"),
            "must be >= 2",
        ));
    }
    if !(grid.omega_max > grid.omega_min) {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "grid.omega_max_ueV",
            r.line("grid.omega_max_ueV"),
            "must exceed grid.omega_min_ueV",
        ));
    }

    let floquet = match r.uint("floquet.order")? {
        Some(n) => Some(FloquetConfig::new(n).map_err(|e| {
            err(
                ConfigErrorKind::ConstraintViolation,
                "floquet.order",
                r.line("floquet.order"),
                e.to_string(),
            )
        })?),
        None => None,
    };

    let sweep = parse_sweep(&r)?;

    let phd = PhononParams::default();
    let phonon = PhononParams {
        alpha: r.checked("phonon.alpha_ps2", non_negative, "must be >= 0")?.unwrap_or(phd.alpha),
        temperature: r
            .checked("phonon.temperature_K", positive, "must be > 0")?
            .unwrap_or(phd.temperature),
        omega_b: r.checked("phonon.omega_b_ueV", positive, "must be > 0")?.unwrap_or(phd.omega_b),
    };
    let phonon_omega_rabi = r.checked("phonon.omega_rabi_ueV", non_negative, "must be >= 0")?;

    // anything the per-key checks above could not see
    let whole = |e: crate::Error| ConfigError {
        kind: ConfigErrorKind::ConstraintViolation,
        key: None,
        line: None,
        message: e.to_string(),
    };
    drive.validate().map_err(whole)?;
    dissipation.validate().map_err(whole)?;
    spectrum.validate().map_err(whole)?;

    Ok(RunConfig {
        drive,
        dissipation,
        spectrum,
        grid,
        floquet,
        sweep,
        phonon,
        phonon_omega_rabi,
    })
}

fn parse_sweep(r: &Reader) -> ConfigResult<Option<SweepAxis>> {
    let keys = ["sweep.parameter", "sweep.min", "sweep.max", "sweep.points", "sweep.scale"];
    if !keys.iter().any(|k| r.map.contains_key(*k)) {
        return Ok(None);
    }
    let name = r
        .string("sweep.parameter")?
        .ok_or_else(|| err(ConfigErrorKind::MissingKey, "sweep.parameter", None, ""))?;
    let parameter = match name.as_str() {
        "omega2" => SweepParameter::Omega2,
        "delta2" => SweepParameter::Delta2,
        "delta" => SweepParameter::Delta,
        other => {
            return Err(err(
                ConfigErrorKind::ConstraintViolation,
                "sweep.parameter",
                r.line("sweep.parameter"),
                format!("`{other}` is not one of omega2, delta2, delta"),
            ))
        }
    };
    let scale = match r.string("sweep.scale")?.as_deref() {
        None | Some("linear") => SweepScale::Linear,
        Some("quadratic-in-power") => SweepScale::QuadraticInPower,
        Some(other) => {
            return Err(err(
                ConfigErrorKind::ConstraintViolation,
                "sweep.scale",
                r.line("sweep.scale"),
                format!("`{other}` is not one of linear, quadratic-in-power"),
            ))
        }
    };
    let axis = SweepAxis {
        parameter,
        min: r.required_float("sweep.min")?,
        max: r.required_float("sweep.max")?,
        points: r
            .uint("sweep.points")?
            .ok_or_else(|| err(ConfigErrorKind::MissingKey, "sweep.points", None, ""))?,
        scale,
    };
    if axis.points < 1 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "sweep.points",
            r.line("sweep.points"),
            "must be >= 1",
        ));
    }
    if axis.max < axis.min {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "sweep.max",
            r.line("sweep.max"),
            "must be >= sweep.min",
        ));
    }
    if parameter == SweepParameter::Omega2 && axis.min < 0.0 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "sweep.min",
            r.line("sweep.min"),
            "Rabi energies must be >= 0",
        ));
    }
    if scale == SweepScale::QuadraticInPower && parameter != SweepParameter::Omega2 {
        return Err(err(
            ConfigErrorKind::ConstraintViolation,
            "sweep.scale",
            r.line("sweep.scale"),
            "quadratic-in-power applies to omega2 only",
        ));
    }
    Ok(Some(axis))
}
