//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! model = single_spin
//! single_spin.theta = 1.5707963267948966
//! bath.coupling = 0.1
//! protocols = selective, 3, 5, 10
//! ```
//!
//! Every key is validated before any computation and unknown keys are
//! rejected. A JSON sidecar written by `run` is also accepted: its `config`
//! object holds the same keys with string values.

use std::collections::BTreeMap;
use std::fmt;

use zeno_core::analysis::{Grid, Spacing};
use zeno_core::bath::OhmicBath;
use zeno_core::chain::ProtocolKind;
use zeno_core::models::{
    BathSpins, LargeSpinParams, Model, ModelId, SelectiveForm, SingleSpinParams, SpinBathModel,
    SpinBathParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed text, unknown or missing keys, out-of-range parameters.
    Config,
    /// A limit of the implementation rather than of the input.
    Capacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ErrorKind,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        ConfigError {
            kind: ErrorKind::Config,
            line,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": "error",
            "kind": match self.kind {
                ErrorKind::Config => "config",
                ErrorKind::Capacity => "capacity",
            },
            "line": self.line,
            "key": self.key,
            "message": self.message,
        })
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
    used: bool,
}

/// Key/value pairs as written, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            return Self::from_json(text);
        }
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            // `#` starts a comment anywhere on the line.
            let line = line.split_once('#').map_or(line, |(head, _)| head).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(
                    Some(n),
                    None,
                    format!("expected `key = value`, found `{line}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::new(Some(n), None, "empty key"));
            }
            raw.insert(key, value, Some(n))?;
        }
        Ok(raw)
    }

    /// Reads the `config` object of a JSON sidecar.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::new(Some(e.line()), None, format!("invalid JSON: {e}")))?;
        let Some(map) = doc.get("config").and_then(|c| c.as_object()) else {
            return Err(ConfigError::new(
                None,
                Some("config"),
                "JSON input needs a `config` object",
            ));
        };
        let mut raw = RawConfig::default();
        for (key, value) in map {
            let value = match value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(ConfigError::new(
                        None,
                        Some(key),
                        format!("expected a string, found {other}"),
                    ))
                }
            };
            raw.insert(key, &value, None)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        if self.entries.contains_key(key) {
            return Err(ConfigError::new(line, Some(key), "duplicate key"));
        }
        self.entries.insert(
            key.to_owned(),
            Entry {
                value: value.to_owned(),
                line,
                used: false,
            },
        );
        Ok(())
    }

    /// Sets or replaces a value, e.g. from a command-line override.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(
            key.to_owned(),
            Entry {
                value: value.to_owned(),
                line: None,
                used: false,
            },
        );
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub protocols: Vec<(u32, ProtocolKind)>,
    pub grid: Grid,
    pub format: Format,
    pub name: Option<String>,
    pub description: Option<String>,
    /// Every setting with defaults filled in, as strings.
    pub resolved: BTreeMap<String, String>,
}

struct Reader {
    raw: RawConfig,
    resolved: BTreeMap<String, String>,
}

impl Reader {
    fn optional(&mut self, key: &str) -> Option<(String, Option<usize>)> {
        let e = self.raw.entries.get_mut(key)?;
        e.used = true;
        self.resolved.insert(key.to_owned(), e.value.clone());
        Some((e.value.clone(), e.line))
    }

    fn string(&mut self, key: &str) -> Result<(String, Option<usize>), ConfigError> {
        self.optional(key)
            .ok_or_else(|| ConfigError::new(None, Some(key), "missing required key"))
    }

    fn string_or(&mut self, key: &str, default: &str) -> (String, Option<usize>) {
        self.optional(key).unwrap_or_else(|| {
            self.resolved.insert(key.to_owned(), default.to_owned());
            (default.to_owned(), None)
        })
    }

    fn number_from(key: &str, value: &str, line: Option<usize>) -> Result<f64, ConfigError> {
        match value {
            "inf" | "infinity" => Ok(f64::INFINITY),
            _ => value
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    ConfigError::new(line, Some(key), format!("`{value}` is not a number"))
                }),
        }
    }

    fn number(&mut self, key: &str) -> Result<f64, ConfigError> {
        let (v, line) = self.string(key)?;
        Self::number_from(key, &v, line)
    }

    fn number_or(&mut self, key: &str, default: &str) -> Result<f64, ConfigError> {
        let (v, line) = self.string_or(key, default);
        Self::number_from(key, &v, line)
    }

    fn count(&mut self, key: &str) -> Result<usize, ConfigError> {
        let (v, line) = self.string(key)?;
        v.parse::<usize>().map_err(|_| {
            ConfigError::new(
                line,
                Some(key),
                format!("`{v}` is not a non-negative integer"),
            )
        })
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some((v, line)) = self.optional(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| Self::number_from(key, s.trim(), line))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Turns a model-layer error into a diagnostic pointing at the key.
    fn model_error(&self, err: zeno_core::Error, keys: &[(&str, &str)]) -> ConfigError {
        let root = err.root().clone();
        match &root {
            zeno_core::Error::Validation { field, .. } => {
                let key = keys.iter().find(|(f, _)| f == field).map(|(_, k)| *k);
                ConfigError::new(key.and_then(|k| self.raw.line(k)), key, root.to_string())
            }
            zeno_core::Error::Capacity(_) => ConfigError {
                kind: ErrorKind::Capacity,
                ..ConfigError::new(None, None, root.to_string())
            },
            _ => ConfigError::new(None, None, root.to_string()),
        }
    }

    fn finish(self) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut unused: Vec<(&String, &Entry)> =
            self.raw.entries.iter().filter(|(_, e)| !e.used).collect();
        unused.sort_by_key(|(k, e)| (e.line, (*k).clone()));
        if let Some((key, e)) = unused.first() {
            return Err(ConfigError::new(e.line, Some(key), "unknown key"));
        }
        Ok(self.resolved)
    }
}

const BATH_KEYS: &[(&str, &str)] = &[
    ("G", "bath.coupling"),
    ("omega_c", "bath.cutoff"),
    ("beta", "bath.beta"),
];

fn ohmic_bath(r: &mut Reader) -> Result<OhmicBath, ConfigError> {
    let g = r.number("bath.coupling")?;
    let wc = r.number("bath.cutoff")?;
    let beta = r.number("bath.beta")?;
    OhmicBath::new(g, wc, beta).map_err(|e| r.model_error(e, BATH_KEYS))
}

fn single_spin(r: &mut Reader) -> Result<Model, ConfigError> {
    let theta = r.number("single_spin.theta")?;
    let phi = r.number_or("single_spin.phi", "0")?;
    let omega0 = r.number_or("single_spin.omega0", "1")?;
    let params = SingleSpinParams::new(theta, phi, omega0).map_err(|e| {
        r.model_error(
            e,
            &[
                ("theta", "single_spin.theta"),
                ("phi", "single_spin.phi"),
                ("omega0", "single_spin.omega0"),
            ],
        )
    })?;
    let bath = ohmic_bath(r)?;
    Ok(Model::SingleSpin { params, bath })
}

fn spin_bath(r: &mut Reader) -> Result<Model, ConfigError> {
    let epsilon = r.number("spin_bath.epsilon")?;
    let tunneling = r.number("spin_bath.delta")?;
    let beta = r.number("spin_bath.beta")?;
    let energies = r.list("spin_bath.bath_energies")?;
    let couplings = r.list("spin_bath.bath_couplings")?;
    let spins = match (energies, couplings) {
        (None, None) => BathSpins::Uniform {
            count: r.count("spin_bath.count")?,
            energy: r.number("spin_bath.bath_energy")?,
            coupling: r.number("spin_bath.bath_coupling")?,
        },
        (Some(energies), Some(couplings)) => BathSpins::Explicit {
            energies,
            couplings,
        },
        (Some(_), None) => {
            return Err(ConfigError::new(
                None,
                Some("spin_bath.bath_couplings"),
                "missing required key",
            ))
        }
        (None, Some(_)) => {
            return Err(ConfigError::new(
                None,
                Some("spin_bath.bath_energies"),
                "missing required key",
            ))
        }
    };
    let keys = [
        ("epsilon", "spin_bath.epsilon"),
        ("delta", "spin_bath.delta"),
        ("beta", "spin_bath.beta"),
        ("N", "spin_bath.count"),
        ("epsilon_i/g_i", "spin_bath.bath_couplings"),
    ];
    let params = SpinBathParams::new(epsilon, tunneling, beta, spins)
        .map_err(|e| r.model_error(e, &keys))?;
    let model = SpinBathModel::new(params).map_err(|e| r.model_error(e, &keys))?;
    Ok(Model::SpinBath(model))
}

fn large_spin(r: &mut Reader) -> Result<Model, ConfigError> {
    let spin = r.number_or("large_spin.j", "1")?;
    let omega0 = r.number_or("large_spin.omega0", "1")?;
    let params = LargeSpinParams::new(spin, omega0)
        .map_err(|e| r.model_error(e, &[("J", "large_spin.j"), ("omega0", "large_spin.omega0")]))?;
    if spin != 1.0 {
        return Err(ConfigError::new(
            r.raw.line("large_spin.j"),
            Some("large_spin.j"),
            "survival is implemented for J = 1 only",
        ));
    }
    let (form, line) = r.string_or("large_spin.selective_form", "canonical");
    let selective = match form.as_str() {
        "canonical" => SelectiveForm::Canonical,
        "printed" => SelectiveForm::AsPrinted,
        other => {
            return Err(ConfigError::new(
                line,
                Some("large_spin.selective_form"),
                format!("expected `canonical` or `printed`, found `{other}`"),
            ))
        }
    };
    let bath = ohmic_bath(r)?;
    Ok(Model::LargeSpin {
        params,
        bath,
        selective,
    })
}

/// `selective`, `selective:M`, `M` or `nonselective:M`.
fn protocols(r: &mut Reader) -> Result<Vec<(u32, ProtocolKind)>, ConfigError> {
    let (v, line) = r.string("protocols")?;
    let bad = |item: &str, why: &str| {
        ConfigError::new(line, Some("protocols"), format!("`{item}`: {why}"))
    };
    let mut out: Vec<(u32, ProtocolKind)> = Vec::new();
    for item in v.split(',').map(str::trim) {
        let (kind, m) = match item.split_once(':') {
            Some(("selective", m)) => (ProtocolKind::Selective, m),
            Some(("nonselective", m)) => (ProtocolKind::NonSelective, m),
            Some(_) => return Err(bad(item, "unknown protocol kind")),
            None if item == "selective" => (ProtocolKind::Selective, "1"),
            None => (ProtocolKind::NonSelective, item),
        };
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| bad(item, "M must be a positive integer"))?;
        if m == 0 {
            return Err(bad(item, "M must be a positive integer"));
        }
        if out.contains(&(m, kind)) {
            return Err(bad(item, "listed twice"));
        }
        out.push((m, kind));
    }
    Ok(out)
}

fn grid(r: &mut Reader) -> Result<Grid, ConfigError> {
    let tau_min = r.number("grid.tau_min")?;
    let tau_max = r.number("grid.tau_max")?;
    let count = r.count("grid.count")?;
    let (spacing, line) = r.string_or("grid.spacing", "log");
    let spacing: Spacing = spacing.parse().map_err(|_| {
        ConfigError::new(
            line,
            Some("grid.spacing"),
            format!("expected `linear` or `log`, found `{spacing}`"),
        )
    })?;
    Grid::new(tau_min, tau_max, count, spacing).map_err(|e| {
        r.model_error(
            e,
            &[
                ("tau_min", "grid.tau_min"),
                ("tau_max", "grid.tau_max"),
                ("count", "grid.count"),
            ],
        )
    })
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let mut r = Reader {
            raw,
            resolved: BTreeMap::new(),
        };
        let name = r.optional("name").map(|(v, _)| v);
        let description = r.optional("description").map(|(v, _)| v);
        let (model_name, line) = r.string("model")?;
        let id: ModelId = model_name.parse().map_err(|_| {
            ConfigError::new(line, Some("model"), format!("unknown model `{model_name}`"))
        })?;
        let model = match id {
            ModelId::SingleSpin => single_spin(&mut r)?,
            ModelId::SpinBath => spin_bath(&mut r)?,
            ModelId::LargeSpin => large_spin(&mut r)?,
        };
        let protocols = protocols(&mut r)?;
        let grid = grid(&mut r)?;
        let (format, line) = r.string_or("output.format", "csv");
        let format = Format::parse(&format).ok_or_else(|| {
            ConfigError::new(
                line,
                Some("output.format"),
                format!("expected `csv` or `json`, found `{format}`"),
            )
        })?;
        let resolved = r.finish()?;
        Ok(RunConfig {
            model,
            protocols,
            grid,
            format,
            name,
            description,
            resolved,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(RawConfig::parse(text)?)
    }
}
