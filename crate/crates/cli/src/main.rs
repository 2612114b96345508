use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcbrp_cli::commands::{self, Selector};
use mcbrp_cli::{ConfigOverrides, RunConfig};

/// Explain large regression errors with Monte Carlo bounds for reasonable
/// predictions.
#[derive(Parser)]
#[command(name = "mcbrp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset into <output-dir>/data.csv
    GenData,
    /// Train the boosted tree model and summarise its test errors
    Train,
    /// Explain large-error test rows
    Explain {
        /// Row id to explain (repeatable)
        #[arg(long = "row", required_unless_present = "all_large", conflicts_with = "all_large")]
        rows: Vec<u64>,
        /// Explain every large-error row
        #[arg(long)]
        all_large: bool,
        /// Allow explaining rows that are reasonable predictions
        #[arg(long)]
        force: bool,
    },
    /// Out-of-range statistics, importance frequencies and a prediction dump
    Report,
}

fn run(cli: Cli) -> anyhow::Result<Vec<String>> {
    let cfg = RunConfig::resolve(&cli.overrides)?;
    match cli.command {
        Command::GenData => commands::gen_data(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Explain {
            rows,
            all_large,
            force,
        } => {
            let selector = if all_large {
                Selector::AllLarge
            } else {
                Selector::Rows(rows)
            };
            commands::explain(&cfg, &selector, force)
        }
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
