//! `fapsim`: run the flooding-attack simulator and write its CSV outputs.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fapsim_core::fuzzy::PathCountController;
use fapsim_core::sim::{compare, run, Scheme, Simulation};
use fapsim_core::ScenarioConfig;
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "fapsim", version, about = "Flooding attack prevention with fuzzy multi-path routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheme.
    Run {
        #[command(flatten)]
        common: Common,
        /// Overrides the config's scheme (`fap-only` or `proposed`).
        #[arg(long)]
        scheme: Option<String>,
        /// Also write the full energy ledger.
        #[arg(long)]
        ledger: bool,
    },
    /// Run both schemes on the same field and attack schedule.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Also write the full energy ledgers.
        #[arg(long)]
        ledger: bool,
    },
    /// Write the controller's membership functions and rule base as JSON.
    DumpRules {
        #[command(flatten)]
        common: Common,
    },
    /// Write the generated field as CSV.
    DumpField {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Simulation(_) | CliError::Output(_) => 2,
        }
    }
}

impl From<fapsim_core::Error> for CliError {
    fn from(e: fapsim_core::Error) -> Self {
        match e {
            fapsim_core::Error::Config { .. } | fapsim_core::Error::NoNodes => CliError::Config(e.to_string()),
            other => CliError::Simulation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fapsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// The effective config and the raw JSON it was read from.
fn load(common: &Common, required: bool) -> Result<(ScenarioConfig, Value), CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?,
        None if required => return Err(CliError::Config("`--config` is required".into())),
        None => "{}".to_string(),
    };
    let mut cfg = ScenarioConfig::from_json(&text)?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok((cfg, raw))
}

fn out_dir(common: &Common) -> Result<PathBuf, CliError> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Output(format!("cannot create `{}`: {e}", dir.display())))?;
    Ok(dir)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { common, scheme, ledger } => {
            let (mut cfg, raw) = load(&common, true)?;
            if let Some(s) = scheme {
                cfg.scheme = s.parse::<Scheme>()?;
            }
            let dir = out_dir(&common)?;
            let report = run(&cfg)?;
            output::write_run(&dir, &cfg, &raw, &report, ledger)
        }
        Command::Compare { common, ledger } => {
            let (cfg, raw) = load(&common, true)?;
            let dir = out_dir(&common)?;
            let comparison = compare(&cfg)?;
            output::write_compare(&dir, &cfg, &raw, &comparison, ledger)
        }
        Command::DumpRules { common } => {
            let (cfg, _) = load(&common, false)?;
            let sim = Simulation::new(&cfg)?;
            let max_hops = cfg.routing.max_hops.unwrap_or_else(|| sim.field().bs_eccentricity().max(1));
            let controller = PathCountController::new(max_hops, cfg.field.energy_cap_j, cfg.routing.max_paths)?;
            let json = serde_json::to_string_pretty(&controller.export()).expect("export serializes");
            write_or_print(common.out.as_deref(), "rules.json", &(json + "\n"))
        }
        Command::DumpField { common } => {
            let (cfg, _) = load(&common, false)?;
            let sim = Simulation::new(&cfg)?;
            let mut buf = Vec::new();
            sim.field().write_csv(&mut buf).expect("writing to memory");
            write_or_print(common.out.as_deref(), "field.csv", &String::from_utf8(buf).expect("csv is utf-8"))
        }
    }
}

fn write_or_print(dir: Option<&Path>, name: &str, body: &str) -> Result<(), CliError> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create `{}`: {e}", dir.display())))?;
            output::write_file(&dir.join(name), body.as_bytes())
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
