//! Report writers: the summary CSV and the JSONL streams for rounds,
//! ledger transactions, and consensus traces. Formats are stable; the
//! CSV leads with a comment line carrying the config hash and master seed
//! needed to reproduce the run.

use std::io::{self, Write};

use serde::Serialize;

use crate::config::SweepPoint;
use crate::ledger::TxEntry;
use crate::orchestrator::{RoundReport, TraceEvent};

pub const SUMMARY_HEADER: &str =
    "zeta,flip,proportion,round,repetition,path,accuracy_defended,accuracy_baseline";

pub fn write_summary_preamble<W: Write>(
    writer: &mut W,
    config_hash: &str,
    master_seed: u64,
) -> io::Result<()> {
    writeln!(writer, "# config_hash={config_hash} master_seed={master_seed}")?;
    writeln!(writer, "{SUMMARY_HEADER}")
}

pub fn write_summary_rows<W: Write>(
    writer: &mut W,
    point: &SweepPoint,
    reports: &[RoundReport],
) -> io::Result<()> {
    for report in reports {
        writeln!(
            writer,
            "{},{},{},{},{},{},{:.6},{:.6}",
            point.zeta,
            point.flip,
            point.proportion,
            report.round,
            report.repetition,
            report.path.as_str(),
            report.accuracy_defended,
            report.accuracy_baseline,
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RoundLine<'a> {
    zeta: usize,
    flip: usize,
    proportion: u8,
    #[serde(flatten)]
    report: &'a RoundReport,
}

pub fn write_rounds_jsonl<W: Write>(
    writer: &mut W,
    point: &SweepPoint,
    reports: &[RoundReport],
) -> io::Result<()> {
    for report in reports {
        let line = RoundLine {
            zeta: point.zeta,
            flip: point.flip,
            proportion: point.proportion,
            report,
        };
        serde_json::to_writer(&mut *writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LedgerLine<'a> {
    zeta: usize,
    flip: usize,
    proportion: u8,
    repetition: u32,
    #[serde(flatten)]
    entry: &'a TxEntry,
}

pub fn write_ledger_jsonl<W: Write>(
    writer: &mut W,
    point: &SweepPoint,
    ledgers: &[Vec<TxEntry>],
) -> io::Result<()> {
    for (repetition, entries) in ledgers.iter().enumerate() {
        for entry in entries {
            let line = LedgerLine {
                zeta: point.zeta,
                flip: point.flip,
                proportion: point.proportion,
                repetition: repetition as u32,
                entry,
            };
            serde_json::to_writer(&mut *writer, &line)?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    zeta: usize,
    flip: usize,
    proportion: u8,
    #[serde(flatten)]
    event: &'a TraceEvent,
}

pub fn write_trace_jsonl<W: Write>(
    writer: &mut W,
    point: &SweepPoint,
    traces: &[TraceEvent],
) -> io::Result<()> {
    for event in traces {
        let line = TraceLine {
            zeta: point.zeta,
            flip: point.flip,
            proportion: point.proportion,
            event,
        };
        serde_json::to_writer(&mut *writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
