use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use charblow::cli::commands::{execute, Command, Options};
use charblow::cli::config::{load_config, RunConfig};
use charblow::Error;

#[derive(Debug, Parser)]
#[command(name = "charblow", version, about = "Gradient blowup along characteristics of 1-D Lagrangian gas dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of grid doublings to add for a refinement study.
    #[arg(long, global = true, default_value_t = 0)]
    refine: u32,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evolve the configured data and analyze blowup.
    Simulate,
    /// Follow characteristics and report the Riccati residuals.
    Trace,
    /// Coefficient bounds and the threshold for the initial state.
    Threshold,
    /// Identity and closed-form checks.
    Verify,
    /// Evolve the variable-area duct system.
    Duct,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CHARBLOW_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = match &cli.config {
        Some(path) => load_config(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg {
        Ok(cfg) => cfg,
        Err(Error::Config(errors)) => {
            let file = cli.config.as_ref().map_or(String::new(), |p| format!("{}:", p.display()));
            for e in errors {
                eprintln!("{file}{e}");
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = {
        let opts = Options {
            out: cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir)),
            refine: cli.refine,
        };
        let command = match cli.command {
            Sub::Simulate => Command::Simulate,
            Sub::Trace => Command::Trace,
            Sub::Threshold => Command::Threshold,
            Sub::Verify => Command::Verify,
            Sub::Duct => Command::Duct,
        };
        execute(command, &cfg, &opts)
    };
    match result {
        Ok(outcome) => {
            if !cli.quiet || outcome.code != 0 {
                println!("{}", outcome.summary);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
