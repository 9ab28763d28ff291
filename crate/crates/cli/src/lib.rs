//! Configuration, presets and output formatting behind the `zeno` binary.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use zeno_core::analysis::{classify_regimes, sweep, DecayCurve};

pub use config::{ConfigError, ErrorKind, Format, RawConfig, RunConfig};

/// Preset ids and their configuration text.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.cfg")),
    ("fig1b", include_str!("../presets/fig1b.cfg")),
    ("fig2a", include_str!("../presets/fig2a.cfg")),
    ("fig2a_inset", include_str!("../presets/fig2a_inset.cfg")),
    ("fig2b", include_str!("../presets/fig2b.cfg")),
    ("fig3a", include_str!("../presets/fig3a.cfg")),
    ("fig3b", include_str!("../presets/fig3b.cfg")),
];

pub fn preset_text(id: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(p, _)| *p == id)
        .map(|(_, text)| *text)
}

pub fn preset(id: &str) -> Result<RunConfig, CliError> {
    let text = preset_text(id).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|(p, _)| *p).collect();
        CliError::Usage(format!(
            "unknown preset `{id}` (known: {})",
            known.join(", ")
        ))
    })?;
    Ok(RunConfig::parse(text)?)
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Compute(zeno_core::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Compute(e) => match e.root() {
                zeno_core::Error::Validation { .. } | zeno_core::Error::Capacity(_) => 2,
                _ => 3,
            },
            CliError::Io(..) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Compute(e) => write!(f, "numerical error: {e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

pub fn read_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))?;
    Ok(RawConfig::parse(&text)?)
}

/// Runs every protocol of `config` on a pool of `threads` workers
/// (the global pool when `None`).
pub fn compute(config: &RunConfig, threads: Option<usize>) -> Result<Vec<DecayCurve>, CliError> {
    let job = || sweep(&config.model, &config.grid, &config.protocols);
    let out = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
        None => job(),
    };
    out.map_err(CliError::Compute)
}

/// CSV with one row per (curve, tau); 17 significant digits, LF endings.
pub fn render_csv(curves: &[DecayCurve]) -> String {
    let mut out = String::from("model,kind,M,tau,survival,gamma_rate\n");
    for c in curves {
        for s in &c.samples {
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e}",
                c.model_id, c.kind, c.measurements, s.tau, s.survival, s.rate
            )
            .expect("writing to a String");
        }
    }
    out
}

/// JSON document with the resolved config and the regimes of each curve,
/// optionally with the samples themselves.
pub fn render_json(config: &RunConfig, curves: &[DecayCurve], with_samples: bool) -> String {
    let curves: Vec<_> = curves
        .iter()
        .map(|c| {
            let mut v = json!({
                "model": c.model_id,
                "kind": c.kind,
                "M": c.measurements,
                "regimes": classify_regimes(c).ok(),
            });
            if with_samples {
                v["samples"] = json!(c.samples);
            }
            v
        })
        .collect();
    let doc = json!({
        "config": config.resolved,
        "curves": curves,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serialising plain data");
    text.push('\n');
    text
}

/// Where the regimes sidecar of a CSV written to `out` goes.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        let mut s = out.as_os_str().to_owned();
        s.push(".regimes.json");
        PathBuf::from(s)
    } else {
        out.with_extension("json")
    }
}

/// One line per preset: id, description and its settings.
pub fn preset_catalog() -> String {
    let mut out = String::new();
    for (id, _) in PRESETS {
        let cfg = preset(id).expect("bundled presets are valid");
        writeln!(out, "{id}: {}", cfg.description.as_deref().unwrap_or("")).unwrap();
        let settings: Vec<String> = cfg
            .resolved
            .iter()
            .filter(|(k, _)| *k != "name" && *k != "description")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "    {}", settings.join(" ")).unwrap();
    }
    out
}
