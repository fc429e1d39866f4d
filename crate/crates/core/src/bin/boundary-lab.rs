use std::path::PathBuf;
use std::process::ExitCode;

use boundary_lab::runner::{self, RunOptions, THREADS_ENV};
use boundary_lab::LabError;
use clap::{Parser, Subcommand};

/// Random power series laboratory.
#[derive(Debug, Parser)]
#[command(name = "boundary-lab", version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config.
    Run { config: PathBuf },
    /// Print the experiment catalog and the CSV columns of each kind.
    List,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn exit_for(e: &LabError) -> ExitCode {
    match e {
        LabError::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for entry in runner::list_experiments() {
                println!("{}", entry.line);
                println!("    {}", entry.description);
                for (file, cols) in entry.outputs {
                    println!("    {file}.csv: {}", cols.join(","));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match runner::validate(&config) {
            Ok(plan) => {
                println!("ok: {}", plan_kind(&plan));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("invalid config {}: {e}", config.display());
                exit_for(&e)
            }
        },
        Command::Run { config } => {
            let opts = RunOptions { threads: cli.threads, seed: cli.seed, out: cli.out };
            match runner::run(&config, &opts) {
                Ok(outcome) => {
                    let m = &outcome.manifest;
                    println!(
                        "{} finished in {:.2}s ({} files in {})",
                        m.experiment,
                        m.wall_time_s,
                        m.outputs.len(),
                        outcome.out_dir.display()
                    );
                    for (k, v) in &m.summaries {
                        println!("  {k} = {v}");
                    }
                    if outcome.violated {
                        eprintln!("an explicit-constant inequality was violated");
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for(&e)
                }
            }
        }
    }
}

fn plan_kind(plan: &runner::Plan) -> &'static str {
    use runner::Plan::*;
    match plan {
        SnbProfile { .. } => "snb-profile",
        LogSnbProfile { .. } => "log-snb-profile",
        InequalitySuite(_) => "inequality-suite",
        RootsAnnulus { .. } => "roots-annulus",
        PotentialConvergence { .. } => "potential-convergence",
        LawCalibration { .. } => "law-calibration",
    }
}
