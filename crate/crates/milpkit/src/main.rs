//! Thin command-line front end; all logic lives in `milpkit::cli`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use milpkit::cli::{self, CmdOutcome};

#[derive(Parser)]
#[command(name = "milpkit", about = "Mini MILP toolkit: generate, solve, learn, tune", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance corpus with structure sidecars and a
    /// train/valid split manifest.
    Generate {
        /// item_placement | workload | time_indexed
        family: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with family parameter overrides.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "instances")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        train_ratio: f64,
    },
    /// Run the primal-task pipelines and report primal integrals.
    Primal {
        /// Glob over .mps files (or a directory).
        glob: String,
        #[arg(long, default_value_t = 10.0)]
        budget: f64,
        #[arg(long, default_value = "primal_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Measure with the wall clock instead of the simulated clock.
        #[arg(long)]
        wall_clock: bool,
    },
    /// Run the dual task (branching only, heuristics off) with a rule.
    Dual {
        glob: String,
        /// mostfrac | random:SEED | strong | pseudocost | learned:MODEL
        #[arg(long, default_value = "mostfrac")]
        rule: String,
        #[arg(long, default_value_t = 20.0)]
        budget: f64,
        #[arg(long, default_value = "dual_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        wall_clock: bool,
    },
    /// Train a branching scorer by dataset aggregation and pick the best
    /// weight-averaged model by validation cumulated reward.
    TrainBranching {
        train_glob: String,
        valid_glob: String,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 3)]
        omega_max: usize,
        #[arg(long, default_value = "model.json")]
        out_model: PathBuf,
        #[arg(long, default_value_t = 50)]
        node_cap: usize,
        #[arg(long, default_value_t = 20.0)]
        budget: f64,
        #[arg(long, default_value_t = 10.0)]
        cr_time_limit: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tune the solver configuration by surrogate optimization.
    Tune {
        glob: String,
        /// Number of sub-spaces (defaults to the built-in partition).
        #[arg(short = 'k', long)]
        subspaces: Option<usize>,
        /// Inner iterations per sub-space (N).
        #[arg(short = 'n', long, default_value_t = 2)]
        iterations: usize,
        /// Proposals per iteration (q).
        #[arg(short = 'q', long, default_value_t = 2)]
        proposals: usize,
        #[arg(long, default_value_t = 4)]
        init_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "tuned.json")]
        out_config: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        budget: f64,
        /// Tune one configuration per instance cluster.
        #[arg(long)]
        clusters: Option<usize>,
        /// Skip the importance-based space reduction.
        #[arg(long)]
        no_reduce: bool,
    },
    /// Aggregate metric CSVs, cross-check them against their run logs, and
    /// emit plot-ready bound series.
    Report {
        csv_glob: String,
        #[arg(long, default_value = "report_out")]
        out: PathBuf,
    },
}

fn run() -> Result<CmdOutcome, cli::CliError> {
    match Args::parse().command {
        Command::Generate {
            family,
            count,
            seed,
            params,
            out,
            train_ratio,
        } => cli::cmd_generate(&cli::GenerateArgs {
            family,
            count,
            seed,
            params_file: params,
            out_dir: out,
            train_ratio,
        }),
        Command::Primal {
            glob,
            budget,
            out,
            workers,
            wall_clock,
        } => cli::cmd_primal(&cli::PrimalArgs {
            glob,
            budget,
            out_dir: out,
            workers,
            wall_clock,
        }),
        Command::Dual {
            glob,
            rule,
            budget,
            out,
            workers,
            wall_clock,
        } => cli::cmd_dual(&cli::DualArgs {
            glob,
            rule,
            budget,
            out_dir: out,
            workers,
            wall_clock,
        }),
        Command::TrainBranching {
            train_glob,
            valid_glob,
            rounds,
            omega_max,
            out_model,
            node_cap,
            budget,
            cr_time_limit,
            seed,
        } => cli::cmd_train_branching(&cli::TrainArgs {
            train_glob,
            valid_glob,
            rounds,
            omega_max,
            out_model,
            node_cap,
            budget_per_instance: budget,
            cr_time_limit,
            seed,
        }),
        Command::Tune {
            glob,
            subspaces,
            iterations,
            proposals,
            init_samples,
            seed,
            out_config,
            budget,
            clusters,
            no_reduce,
        } => cli::cmd_tune(&cli::TuneArgs {
            glob,
            subspaces,
            iterations,
            proposals,
            init_samples,
            seed,
            out_config,
            budget,
            clusters,
            skip_reduction: no_reduce,
        }),
        Command::Report { csv_glob, out } => cli::cmd_report(&cli::ReportArgs {
            csv_glob,
            out_dir: out,
        }),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            eprintln!(
                "done: {} processed, {} failures",
                outcome.processed, outcome.partial_failures
            );
            if outcome.partial_failures > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
