//! Command-line scenario runner.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures during a run.

pub mod config;
pub mod plot;
pub mod scenarios;
pub mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RunConfig, Scenario};
pub use scenarios::NumericalError;

#[derive(Debug, Parser)]
#[command(name = "bloch-thermo", about = "Bloch-sphere thermodynamics of open qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG figures.
        #[arg(long)]
        svg: bool,
    },
    /// List the available scenarios.
    ListScenarios,
    /// Print the program version.
    Version,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] NumericalError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Files written by a run.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn load_config(path: &Path, out: Option<PathBuf>, svg: bool) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    cfg.svg |= svg;
    Ok(cfg)
}

/// Runs a resolved configuration and writes its outputs.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let tables = scenarios::run_scenario(cfg)?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut summary = RunSummary::default();
    let config_path = dir.join("resolved_config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(io_err(&config_path))?;
    summary.written.push(config_path);

    let metadata = cfg.to_json();
    for t in &tables {
        let path = dir.join(format!("{}.csv", t.name));
        t.write_csv(dir, &metadata).map_err(io_err(&path))?;
        summary.written.push(path);
    }

    if cfg.svg {
        for (stem, panels, columns) in plot::figures(cfg.scenario, &tables) {
            let path = dir.join(format!("{stem}.svg"));
            match plot::render(&panels, columns).and_then(|svg| std::fs::write(&path, svg).map_err(|e| e.to_string())) {
                Ok(()) => summary.written.push(path),
                Err(e) => summary.warnings.push(format!("could not write {}: {e}", path.display())),
            }
        }
    }
    Ok(summary)
}

pub fn main_with(cli: Cli) -> ExitCode {
    match cli.command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<12} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run { config, out, svg } => {
            match load_config(&config, out, svg).and_then(|cfg| execute(&cfg)) {
                Ok(summary) => {
                    for w in &summary.warnings {
                        eprintln!("warning: {w}");
                    }
                    for p in &summary.written {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
