use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::{describe, run, validate, RunOptions};
use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "udnlab", version, about = "Ultra-dense network densification and coordination experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fields, defaults and outputs of an experiment.
    Describe { experiment: String },
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run {
            config,
            workers,
            output,
            seed,
        } => {
            if workers == Some(0) {
                eprintln!("error: --workers must be at least 1");
                return EXIT_CONFIG;
            }
            let opts = RunOptions {
                output_dir: output,
                seed,
                workers,
            };
            match run(&config, &opts) {
                Ok(out) => {
                    println!("{}", out.dir.display());
                    for d in &out.record.diagnostics {
                        eprintln!("note: {d}");
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Command::Validate { config } => match validate(&config) {
            Ok(v) if v.is_empty() => {
                println!("ok");
                0
            }
            Ok(v) => {
                for m in v {
                    eprintln!("violation: {m}");
                }
                EXIT_CONFIG
            }
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", config.display());
                EXIT_IO
            }
        },
        Command::Describe { experiment } => match describe(&experiment) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
    }
}

pub fn cli_main() -> i32 {
    dispatch(Cli::parse())
}
