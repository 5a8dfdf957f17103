//! `fund`: fit, optimize, calibrate and backtest funding roll lengths on
//! curve histories.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use funding_core::Measure;

use crate::commands::CliError;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "fund", version, about = "Regulatory-buffer funding optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Restrict the run to one currency from [data].
    #[arg(long)]
    currency: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Linear fit diagnostics per currency.
    Fit(Common),
    /// Cheapest roll length on one date under one measure.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Decision date, YYYY-MM-DD.
        #[arg(long)]
        date: NaiveDate,
        #[arg(long, default_value = "Q", value_parser = parse_measure)]
        measure: Measure,
    },
    /// Grid search of the EWMA predictor over the calibration windows.
    Calibrate(Common),
    /// Out-of-sample comparison of Q, EWMA and perfect information.
    Backtest(Common),
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    s.parse::<Measure>().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Fit(c) => commands::cmd_fit(&RunConfig::load(&c.config)?, c.currency.as_deref()),
        Command::Optimize { common, date, measure } => commands::cmd_optimize(
            &RunConfig::load(&common.config)?,
            common.currency.as_deref(),
            date,
            measure,
        ),
        Command::Calibrate(c) => commands::cmd_calibrate(&RunConfig::load(&c.config)?, c.currency.as_deref()),
        Command::Backtest(c) => commands::cmd_backtest(&RunConfig::load(&c.config)?, c.currency.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fund: {} error: {e}", e.label());
            ExitCode::from(e.exit_code())
        }
    }
}
