use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pls_bench::summary::summary_csv;
use pls_bench::{run_experiment, summarize_dir, BenchError, ExperimentConfig, RunOptions};

/// Benchmark pseudo-label selection criteria on seeded splits.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (criterion, seed) pair of a config file.
    Run {
        config: PathBuf,
        /// Maximum number of worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for results; overrides `output_dir` in the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Recompute summary.csv from a result directory's results.csv.
    Summarize { result_dir: PathBuf },
    /// Print a ready-made config to stdout.
    GenerateConfig {
        #[arg(long, default_value = "overfit-prone")]
        preset: String,
    },
}

fn exit_for(error: &BenchError) -> ExitCode {
    eprintln!("error: {error}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            jobs,
            output_dir,
        } => {
            let config = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            let result = match run_experiment(&config, &RunOptions { jobs, output_dir }) {
                Ok(r) => r,
                Err(e) => return exit_for(&e),
            };
            match &result.summary {
                Some(rows) => print!("{}", summary_csv(rows)),
                None => eprintln!("no run succeeded; summary.csv not written"),
            }
            let failed = result.failed_runs();
            eprintln!(
                "{} runs, {} failed; results in {}",
                result.runs.len(),
                failed,
                result.output_dir.display()
            );
            if failed > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Summarize { result_dir } => match summarize_dir(&result_dir) {
            Ok(rows) => {
                print!("{}", summary_csv(&rows));
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        },
        Command::GenerateConfig { preset } => match ExperimentConfig::preset(&preset) {
            Some(config) => {
                print!("{}", config.to_toml());
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown preset {preset:?} (available: overfit-prone)");
                ExitCode::from(1)
            }
        },
    }
}
