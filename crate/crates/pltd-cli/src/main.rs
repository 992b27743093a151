//! `pltd`: validate splittings, run particle and field simulations, check
//! duality, sweep parameters and measure the large-μ limits.

mod commands;
mod config;
mod fail;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use fail::{classify, error_json, EXIT_CONFIG, EXIT_NUMERICAL};

#[derive(Parser)]
#[command(name = "pltd", version, about = "Poisson-Lie T-duality simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Subcommand)]
enum Command {
    /// Structural residuals of the bialgebra, double and splitting.
    Validate(Common),
    /// Point-particle trajectory as CSV.
    Particle(Common),
    /// Field simulation diagnostics as CSV.
    Field(Common),
    /// Compare both factorized descriptions of one loop.
    Duality(Common),
    /// Concurrent replicas over presets and seeds, with a manifest.
    Sweep(Common),
    /// Large-μ deviation of the rescaled Lagrangians and their slopes.
    Limits(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": "config", "message": e.to_string().trim() }));
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (run, common) = match cli.command {
        Command::Validate(c) => (commands::validate as fn(RunConfig) -> anyhow::Result<commands::Outcome>, c),
        Command::Particle(c) => (commands::particle as _, c),
        Command::Field(c) => (commands::field as _, c),
        Command::Duality(c) => (commands::duality as _, c),
        Command::Sweep(c) => (commands::sweep as _, c),
        Command::Limits(c) => (commands::limits as _, c),
    };
    let result = RunConfig::merged(common.config.as_deref(), &common.run).and_then(run);
    match result {
        Ok(o) => match o.failure {
            None => ExitCode::SUCCESS,
            Some(msg) => {
                eprintln!("{}", serde_json::json!({ "error": "numerical", "message": msg }));
                ExitCode::from(EXIT_NUMERICAL as u8)
            }
        },
        Err(e) => {
            let (code, kind) = classify(&e);
            eprintln!("{}", error_json(kind, &e));
            ExitCode::from(code as u8)
        }
    }
}
