pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

use clap::{Parser, Subcommand};

use config::{Command, GlobalFlags, Overrides, RunConfig};
use error::{CliError, CliResult};
use output::Artifacts;

#[derive(Debug, Parser)]
#[command(name = "parabola", version, about = "Covering experiments for quadratic approximation near the parabola")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalFlags,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Per-level counts of block members by root type.
    Enumerate(Overrides),
    /// Solution set of one polynomial.
    Delta(Overrides),
    /// Measure bound per coefficient pair.
    Lemma1(Overrides),
    /// Level covers and their g-sums.
    Cover(Overrides),
    /// Tail sums of the level g-sums.
    Tailsum(Overrides),
    /// Convergence class and partial sums of the g-series.
    Series(Overrides),
    /// Box-counting dimension estimate.
    Dimension(Overrides),
    /// Empirical exponent of a single point.
    Pointwise(Overrides),
    /// Run the command named in `--config` (a TOML file or a manifest).
    Run(Overrides),
}

impl Sub {
    fn split(&self) -> (Option<Command>, &Overrides) {
        match self {
            Sub::Enumerate(o) => (Some(Command::Enumerate), o),
            Sub::Delta(o) => (Some(Command::Delta), o),
            Sub::Lemma1(o) => (Some(Command::Lemma1), o),
            Sub::Cover(o) => (Some(Command::Cover), o),
            Sub::Tailsum(o) => (Some(Command::Tailsum), o),
            Sub::Series(o) => (Some(Command::Series), o),
            Sub::Dimension(o) => (Some(Command::Dimension), o),
            Sub::Pointwise(o) => (Some(Command::Pointwise), o),
            Sub::Run(o) => (None, o),
        }
    }
}

/// A `.json` path is read as a run manifest and its embedded config replayed.
fn load_config(path: &Path) -> CliResult<RunConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let toml = v
            .get("config")
            .and_then(|c| c.as_str())
            .ok_or_else(|| CliError::Config(format!("{}: no `config` entry", path.display())))?;
        return RunConfig::from_toml(toml);
    }
    RunConfig::load(path)
}

pub fn resolve(cli: &Cli) -> CliResult<(Command, RunConfig)> {
    let mut cfg = match &cli.global.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let (cmd, o) = cli.command.split();
    cfg.apply(o, &cli.global)?;
    let cmd = cmd
        .or(cfg.command)
        .ok_or_else(|| CliError::Config("field `command`: `run` needs a command in the config".into()))?;
    cfg.command = Some(cmd);
    cfg.validate()?;
    Ok((cmd, cfg))
}

/// Runs one command to completion and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let (cmd, cfg) = match resolve(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("parabola: {e}");
            return e.exit_code();
        }
    };
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    let mut out = match Artifacts::create(&cfg.out) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("parabola: {e}");
            return e.exit_code();
        }
    };
    let result = commands::run(cmd, &cfg, &mut out).and_then(|v| v.map_or(Ok(()), |m| Err(CliError::Violation(m))));
    let (code, message) = match &result {
        Ok(()) => (0, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    if let Some(m) = &message {
        eprintln!("parabola: {m}");
    }
    if let Err(e) = out.finish(&cfg, cmd.name(), code, message) {
        eprintln!("parabola: {e}");
        return e.exit_code();
    }
    code
}
