use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qss_cli::{list_experiments, load, run, validate, RunOptions};

#[derive(Parser)]
#[command(name = "qss", version, about = "Run continuous-variable secret sharing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.path).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to all available cores.
        #[arg(long)]
        threads: Option<NonZeroUsize>,
        /// Seed for sampling (overrides the config seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List the available experiments.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for (name, about) in list_experiments() {
                println!("{name:<16} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::FAILURE;
                }
            };
            let report = validate(&text);
            print!("{}: {report}", config.display());
            if report.is_valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => {
            let result = load(&config).and_then(|cfg| {
                run(
                    &cfg,
                    &RunOptions {
                        out_dir: out,
                        threads,
                        seed,
                    },
                )
            });
            match result {
                Ok(report) => {
                    println!(
                        "wrote {} ({} rows)",
                        report.table_path.display(),
                        report.outcome.table.rows.len()
                    );
                    if let Some(s) = &report.outcome.summary {
                        println!("summary: {s}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
