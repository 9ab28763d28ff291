use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zeno_cli::{
    compute, preset_catalog, preset_text, read_config, render_csv, render_json, sidecar_path,
    CliError, Format, RawConfig, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "zeno",
    version,
    about = "Zeno and anti-Zeno effective decay rates under repeated measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the decay rate over a tau grid and write CSV (plus a JSON sidecar).
    Run {
        /// Bundled preset id (see `zeno presets`).
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        /// Configuration file, either key = value text or a JSON sidecar.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
        /// Grid override: tau_min,tau_max,count,spacing.
        #[arg(long)]
        grid: Option<String>,
        /// Worker threads for the sweep.
        #[arg(long, env = "ZENO_THREADS")]
        threads: Option<usize>,
    },
    /// List the bundled presets with their parameters.
    Presets,
    /// Check a configuration without computing anything.
    Validate {
        /// Configuration file or bundled preset id.
        path: PathBuf,
    },
}

fn override_grid(raw: &mut RawConfig, spec: &str) -> Result<(), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [min, max, count, spacing] = parts[..] else {
        return Err(CliError::Usage(format!(
            "--grid expects tau_min,tau_max,count,spacing, got `{spec}`"
        )));
    };
    raw.set("grid.tau_min", min);
    raw.set("grid.tau_max", max);
    raw.set("grid.count", count);
    raw.set("grid.spacing", spacing);
    Ok(())
}

fn load(preset: Option<&str>, config: Option<&PathBuf>) -> Result<RawConfig, CliError> {
    match (preset, config) {
        (Some(id), _) => {
            let text =
                preset_text(id).ok_or_else(|| CliError::Usage(format!("unknown preset `{id}`")))?;
            Ok(RawConfig::parse(text)?)
        }
        (None, Some(path)) => read_config(path),
        (None, None) => Err(CliError::Usage(
            "one of --preset or --config is required".into(),
        )),
    }
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e))
}

fn run(
    preset: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<String>,
    grid: Option<String>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let mut raw = load(preset.as_deref(), config.as_ref())?;
    if let Some(spec) = grid {
        override_grid(&mut raw, &spec)?;
    }
    if let Some(f) = format {
        raw.set("output.format", &f);
    }
    let cfg = RunConfig::from_raw(raw)?;
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let curves = compute(&cfg, threads)?;
    match (cfg.format, out) {
        (Format::Csv, Some(path)) => {
            write(&path, &render_csv(&curves))?;
            write(&sidecar_path(&path), &render_json(&cfg, &curves, false))?;
        }
        (Format::Csv, None) => print!("{}", render_csv(&curves)),
        (Format::Json, Some(path)) => write(&path, &render_json(&cfg, &curves, true))?,
        (Format::Json, None) => print!("{}", render_json(&cfg, &curves, true)),
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), CliError> {
    let raw = match preset_text(&path.to_string_lossy()) {
        Some(text) if !path.exists() => RawConfig::parse(text)?,
        _ => read_config(path)?,
    };
    RunConfig::from_raw(raw)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            preset,
            config,
            out,
            format,
            grid,
            threads,
        } => run(preset, config, out, format, grid, threads),
        Command::Presets => {
            print!("{}", preset_catalog());
            Ok(())
        }
        Command::Validate { path } => match validate(&path) {
            Ok(()) => {
                println!("ok");
                Ok(())
            }
            Err(CliError::Config(e)) => {
                println!("{}", e.to_json());
                eprintln!("configuration error: {e}");
                return ExitCode::from(2);
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zeno: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
