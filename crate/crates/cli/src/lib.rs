//! Command-line front end: catalog, rate tables, Monte Carlo validation and
//! trajectory dumps driven by a TOML experiment file.

pub mod build;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn key(key: &str, msg: impl ToString) -> Self {
        CliError::Config(format!("config error in `{key}`: {}", msg.to_string()))
    }

    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "stochrate", version, about = "Quantitative convergence rates for stochastic processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override `mc.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List moduli, schedules, models and theorems.
    Catalog,
    /// Tabulate a rate over the grid.
    Rate(RunArgs),
    /// Check a rate against simulated trials.
    Validate(RunArgs),
    /// Dump sample paths.
    Trajectory {
        #[command(flatten)]
        args: RunArgs,
        /// Number of trials.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

fn emit(table: &Table, cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    match &args.out {
        None => {
            let text = match args.format {
                Format::Json => table.to_json()?,
                _ => table.to_csv()?,
            };
            print!("{text}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            let write = |name: String, text: String| {
                let p = dir.join(name);
                std::fs::write(&p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
            };
            if args.format != Format::Json {
                write(format!("{}.csv", table.command), table.to_csv()?)?;
            }
            if args.format != Format::Csv {
                write(format!("{}.json", table.command), table.to_json()?)?;
            }
            write("config.toml".into(), cfg.to_toml())
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Catalog => {
            print!("{}", commands::catalog());
            Ok(0)
        }
        Command::Rate(args) => {
            let cfg = load(&args)?;
            let rows = commands::rate(&cfg)?;
            emit(&Table::rate(&rows)?, &cfg, &args)?;
            Ok(0)
        }
        Command::Validate(args) => {
            let cfg = load(&args)?;
            let rows = commands::validate(&cfg)?;
            emit(&Table::validate(&rows)?, &cfg, &args)?;
            let (pass, fail, infeasible) = commands::tally(&rows);
            if infeasible > 0 {
                eprintln!("warning: {infeasible} row(s) need more than mc.horizon steps and were not simulated");
            }
            if args.out.is_some() || args.format == Format::Csv {
                println!("passed={pass} failed={fail} infeasible={infeasible}");
            } else {
                eprintln!("passed={pass} failed={fail} infeasible={infeasible}");
            }
            Ok(u8::from(fail > 0))
        }
        Command::Trajectory { args, count } => {
            let cfg = load(&args)?;
            let rows = commands::trajectories(&cfg, count)?;
            emit(&Table::trajectory(&rows)?, &cfg, &args)?;
            Ok(0)
        }
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
