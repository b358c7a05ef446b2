use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fedvet::cli::{self, CliError};

#[derive(Parser)]
#[command(
    name = "fedvet",
    version,
    about = "Deterministic simulator of hierarchical federated learning with validator vetting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments described by a config file, sweeping zeta,
    /// flip, and proportion, and write CSV/JSONL reports
    Run {
        /// Path to the TOML configuration file
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed from the config file
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config file's output_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-proposal consensus traces to trace.jsonl
        #[arg(long)]
        trace: bool,
    },
    /// Print the built-in five-validator trust/influence reference example
    /// and verify it against the expected values
    Table2,
    /// Run seeded Snowball consensus trials and print agreement and
    /// termination statistics
    ConsensusStats {
        /// Number of consensus participants
        #[arg(long)]
        n: usize,
        /// Quorum size sampled per poll
        #[arg(long)]
        k: usize,
        /// Majority threshold within a quorum
        #[arg(long)]
        alpha: u32,
        /// Consecutive successes required to decide
        #[arg(long)]
        beta: u32,
        /// Number of trials
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        /// Base seed for opinions and polling
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = match args.command {
        Command::Run {
            config,
            seed,
            out,
            trace,
        } => cli::cmd_run(&config, seed, out, trace),
        Command::Table2 => cli::cmd_table2(),
        Command::ConsensusStats {
            n,
            k,
            alpha,
            beta,
            trials,
            seed,
        } => cli::cmd_consensus_stats(n, k, alpha, beta, trials, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
