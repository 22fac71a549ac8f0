//! Command-line front end: `run` a scenario, `sweep` one configuration field
//! over a list of values, or `check` the library's invariants.
//!
//! Failures print a single JSON object on stderr and exit with status 1
//! (2 for a failed `check`).

pub mod check;
pub mod config;
pub mod output;
pub mod scenarios;

use clap::{Parser, Subcommand};
use serde_json::json;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub use config::{parse_config, parse_config_str, Model, RunPlan, Scenario, ScenarioConfig};
pub use output::{OutputSet, Table};
pub use scenarios::run_scenario;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "wgqed", version, about = "Pulse propagation and collective decay of atoms on a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Disorder seed; overrides `disorder.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Time grid length; overrides `grid.points`.
    #[arg(long = "grid-points", global = true)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its tables and manifest.
    Run {
        /// Scenario to run with default parameters when no config is given.
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
    },
    /// Run the configuration once per value of one field.
    Sweep {
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        /// Dotted field path, e.g. `physics.detuning`.
        #[arg(long)]
        param: String,
        /// Comma-separated TOML values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Run the numerical self-test.
    Check,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

fn base_text(cli: &Cli, scenario: Option<Scenario>) -> Result<String> {
    match (&cli.config, scenario) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| config_error("", format!("cannot read {}: {e}", path.display()))),
        (None, Some(s)) => Ok(format!("scenario = \"{s}\"\n")),
        (Some(_), Some(_)) => Err(config_error("", "give either --config or --scenario, not both")),
        (None, None) => Err(config_error("", "--config or --scenario is required")),
    }
}

fn apply_overrides(mut cfg: ScenarioConfig, cli: &Cli) -> Result<ScenarioConfig> {
    if let Some(seed) = cli.seed {
        cfg.disorder.seed = Some(seed);
    }
    if let Some(points) = cli.grid_points {
        cfg.grid.points = Some(points);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.complete()
}

fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.to_string()))
}

/// Run a completed configuration into `dir` and write its manifest.
pub fn execute(cfg: &ScenarioConfig, dir: &Path) -> Result<OutputSet> {
    let plan = cfg.resolve()?;
    let mut outputs = run_scenario(&plan, dir)?;
    let manifest = output::render_manifest(&plan, &outputs)?;
    let digest = output::write_atomic(dir, "manifest.toml", manifest.as_bytes())?;
    outputs.files.insert("manifest.toml".into(), digest);
    Ok(outputs)
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| config_error(path, "empty field path"))?;
    let mut cur = table;
    for part in parts {
        cur = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_error(path, format!("`{part}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn sweep(cli: &Cli, scenario: Option<Scenario>, param: &str, values: &[String]) -> Result<()> {
    let text = base_text(cli, scenario)?;
    let base: toml::Table = toml::from_str(&text).map_err(|e| config_error("", e.message().to_string()))?;
    let root = {
        let cfg = apply_overrides(parse_config_str(&text)?, cli)?;
        output_dir(&cfg)
    };
    let mut index = toml::Table::new();
    for (i, raw) in values.iter().enumerate() {
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.clone()));
        let mut table = base.clone();
        set_path(&mut table, param, value)?;
        let mut cfg = apply_overrides(parse_config_str(&toml::to_string(&table).expect("table serializes"))?, cli)?;
        let dir = root.join(format!("{i:03}"));
        cfg.output.dir = Some(dir.clone());
        execute(&cfg, &dir)?;
        println!("{param} = {raw}: {}", dir.display());
        index.insert(format!("{i:03}"), raw.clone().into());
    }
    let mut doc = toml::Table::new();
    doc.insert("param".into(), param.into());
    doc.insert("values".into(), index.into());
    output::write_atomic(&root, "sweep.toml", toml::to_string(&doc).expect("table serializes").as_bytes())?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads", "must be positive"));
        }
        // fails only when a pool already exists, e.g. when called twice in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Run { scenario } => {
            let cfg = apply_overrides(parse_config_str(&base_text(cli, *scenario)?)?, cli)?;
            let dir = output_dir(&cfg);
            let outputs = execute(&cfg, &dir)?;
            for name in outputs.files.keys() {
                println!("{}", dir.join(name).display());
            }
            Ok(0)
        }
        Command::Sweep { scenario, param, values } => {
            sweep(cli, *scenario, param, values)?;
            Ok(0)
        }
        Command::Check => {
            let results = check::run_checks();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 2 })
        }
    }
}

/// The structured line printed on failure.
pub fn error_line(e: &Error) -> String {
    let mut obj = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Config { path, .. } = e {
        obj["path"] = json!(path);
    }
    obj.to_string()
}

/// Parse `args`, run the command, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim() }));
            return 1;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}
