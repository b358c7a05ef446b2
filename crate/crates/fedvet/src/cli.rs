//! Command implementations behind the `fedvet` binary: sweep runs with
//! report files, the built-in trust/influence reference check, and
//! Snowball statistics.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{self, ConfigError};
use crate::orchestrator::{self, RoundSummary};
use crate::output;
use crate::seed::derive_seed;
use crate::snowball::{self, ConsensusParams};
use crate::trust::{self, OpinionMatrix};

/// Command failures split by exit code: configuration problems exit 2,
/// runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

/// Runs every sweep point of a config file and writes `summary.csv`,
/// `rounds.jsonl`, `ledger.jsonl`, and (optionally) `trace.jsonl` into the
/// output directory.
pub fn cmd_run(
    config_path: &Path,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
    collect_traces: bool,
) -> Result<(), CliError> {
    let mut file = config::load_config(config_path)?;
    if let Some(seed) = seed_override {
        file.experiment.master_seed = seed;
    }
    file.validate()?;

    let out_dir = out_override
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let config_hash = file.config_hash();
    let master_seed = file.experiment.master_seed;
    let open = |name: &str| -> Result<BufWriter<File>, CliError> {
        let path = out_dir.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
    };
    let io_err = |e: std::io::Error| CliError::Runtime(format!("write failed: {e}"));

    let mut summary = open("summary.csv")?;
    let mut rounds = open("rounds.jsonl")?;
    let mut ledger = open("ledger.jsonl")?;
    let mut trace = if collect_traces { Some(open("trace.jsonl")?) } else { None };

    output::write_summary_preamble(&mut summary, &config_hash, master_seed).map_err(io_err)?;

    for point in file.sweep_points() {
        let cfg = file.experiment_for(&point);
        let out = orchestrator::run_experiment_with(&cfg, collect_traces)
            .map_err(|e| CliError::Runtime(e.to_string()))?;

        output::write_summary_rows(&mut summary, &point, &out.reports).map_err(io_err)?;
        output::write_rounds_jsonl(&mut rounds, &point, &out.reports).map_err(io_err)?;
        output::write_ledger_jsonl(&mut ledger, &point, &out.ledgers).map_err(io_err)?;
        if let Some(writer) = trace.as_mut() {
            output::write_trace_jsonl(writer, &point, &out.traces).map_err(io_err)?;
        }

        print_point_summary(&point, &out.summary);
    }

    summary.flush().map_err(io_err)?;
    rounds.flush().map_err(io_err)?;
    ledger.flush().map_err(io_err)?;
    if let Some(mut writer) = trace {
        writer.flush().map_err(io_err)?;
    }

    println!(
        "wrote summary.csv, rounds.jsonl, ledger.jsonl{} to {}",
        if collect_traces { ", trace.jsonl" } else { "" },
        out_dir.display()
    );
    println!("config_hash={config_hash} master_seed={master_seed}");
    Ok(())
}

fn print_point_summary(point: &config::SweepPoint, summary: &[RoundSummary]) {
    if let Some(last) = summary.last() {
        println!(
            "zeta={} flip={} proportion={}: final defended {:.4} (sd {:.4}), baseline {:.4} (sd {:.4})",
            point.zeta,
            point.flip,
            point.proportion,
            last.mean_defended,
            last.std_defended,
            last.mean_baseline,
            last.std_baseline,
        );
    }
}

/// The five-validator reference example wired into the system: opinion
/// rows V1..V5 and consensus row C, accepted proposals W1 and W5, ζ = 5.
pub fn reference_example() -> (OpinionMatrix, usize) {
    let matrix = OpinionMatrix::new(
        vec![
            vec![true, false, false, true, true],
            vec![true, false, true, true, true],
            vec![true, true, false, false, true],
            vec![true, false, false, false, true],
            vec![true, true, false, false, true],
        ],
        vec![true, false, false, false, true],
    )
    .expect("reference matrix is square");
    (matrix, 5)
}

pub const REFERENCE_TRUST: [u32; 5] = [30, 10, 30, 50, 30];
pub const REFERENCE_FINAL_INFLUENCE: [f64; 5] = [0.32, 0.04, 0.12, 0.20, 0.32];
pub const REFERENCE_RESIDUAL: [f64; 5] = [0.12, 0.04, 0.12, 0.20, 0.12];

/// Prints the reference opinion matrix with its trust and influence rows
/// and verifies every value against the expected constants to 1e-9.
pub fn cmd_table2() -> Result<(), CliError> {
    let (matrix, zeta) = reference_example();
    let accepted = matrix.accepted();
    let breakdown = trust::influence_breakdown(&matrix, &accepted, zeta)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    println!("Opinion matrix (rows V1..V5, consensus row C; columns W1..W5):");
    let cell = |b: bool| if b { "1" } else { "0" };
    for (i, row) in matrix.rows().iter().enumerate() {
        let cells: Vec<&str> = row.iter().map(|&b| cell(b)).collect();
        println!("  V{}  {}", i + 1, cells.join(" "));
    }
    let consensus: Vec<&str> = matrix.consensus_row().iter().map(|&b| cell(b)).collect();
    println!("  C   {}", consensus.join(" "));
    println!();

    let fmt_row = |label: &str, values: &[f64]| {
        let cells: Vec<String> = values.iter().map(|v| format!("{v:>5.2}")).collect();
        println!("  {label:<22} {}", cells.join(" "));
    };
    let trust_values: Vec<String> = breakdown.trust.iter().map(|t| format!("{t:>5}")).collect();
    println!("  {:<22} {}", "Trust score", trust_values.join(" "));
    fmt_row("Influence", &breakdown.normalized_trust);
    fmt_row("Residual influence", &breakdown.residual_share);
    fmt_row("Final influence", &breakdown.final_influence);

    let trust_ok = breakdown.trust == REFERENCE_TRUST;
    let expected_influence = [0.2, 10.0 / 150.0, 0.2, 50.0 / 150.0, 0.2];
    let close = |got: &[f64], want: &[f64]| {
        got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-9)
    };
    let all_ok = trust_ok
        && close(&breakdown.normalized_trust, &expected_influence)
        && close(&breakdown.residual_share, &REFERENCE_RESIDUAL)
        && close(&breakdown.final_influence, &REFERENCE_FINAL_INFLUENCE);

    println!();
    if all_ok {
        println!("all values match the reference (tolerance 1e-9)");
        Ok(())
    } else {
        Err(CliError::Runtime(
            "computed values deviate from the reference".into(),
        ))
    }
}

/// Runs seeded Snowball trials over random initial opinions and prints
/// agreement, termination, and round statistics.
pub fn cmd_consensus_stats(
    n: usize,
    k: usize,
    alpha: u32,
    beta: u32,
    trials: u32,
    seed: u64,
) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config("trials must be >= 1".into()));
    }
    // validate once up front so bad parameters exit before any work
    ConsensusParams::new(n, k, alpha, beta, 200, 0).map_err(|e| CliError::Config(e.to_string()))?;

    const TAG_OPINIONS: u64 = 0xA11;
    const TAG_POLLING: u64 = 0xB22;
    let mut terminated = 0u32;
    let mut agreements = 0u32;
    let mut rounds_total = 0u64;
    for trial in 0..trials {
        let mut opinion_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_OPINIONS, u64::from(trial)]));
        let opinions: Vec<bool> = (0..n).map(|_| opinion_rng.gen()).collect();
        let params = ConsensusParams::new(
            n,
            k,
            alpha,
            beta,
            200,
            derive_seed(seed, &[TAG_POLLING, u64::from(trial)]),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let outcome =
            snowball::run_consensus(&opinions, &params).map_err(|e| CliError::Runtime(e.to_string()))?;
        if outcome.converged {
            terminated += 1;
            rounds_total += u64::from(outcome.rounds_used);
            let decisions: Vec<bool> = outcome
                .node_decisions
                .iter()
                .map(|d| d.expect("converged run decides every node"))
                .collect();
            if decisions.iter().all(|&d| d == decisions[0]) {
                agreements += 1;
            }
        }
    }

    println!("trials: {trials}");
    println!(
        "terminated: {terminated} ({:.1}%)",
        100.0 * f64::from(terminated) / f64::from(trials)
    );
    if terminated > 0 {
        println!(
            "agreement among terminating trials: {:.4}",
            f64::from(agreements) / f64::from(terminated)
        );
        println!(
            "mean polling rounds (terminating trials): {:.2}",
            rounds_total as f64 / f64::from(terminated)
        );
    }
    println!("non-convergent trials: {}", trials - terminated);
    Ok(())
}
