//! C ABI over the simulator: trust/influence calculations, single
//! consensus runs, and a whole-experiment handle driven by the same TOML
//! configuration the CLI consumes.
//!
//! Conventions: every function returns a [`FedvetStatus`]; out-parameters
//! are written only on `Ok`; string/buffer outputs report the required
//! size through `written` and return `BufferTooSmall` when the caller's
//! buffer cannot hold the result (including the NUL terminator). A
//! per-thread message for the most recent failure is available through
//! [`fedvet_last_error`].

// The pointer contracts above apply uniformly; per-function safety
// sections would only restate them.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::slice;

use fedvet::config::CliConfigFile;
use fedvet::orchestrator;
use fedvet::output;
use fedvet::snowball::{self, ConsensusParams};
use fedvet::trust::{self, OpinionMatrix};

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedvetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RuntimeError = 3,
    BufferTooSmall = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FedvetStatus, message: impl Into<String>) -> FedvetStatus {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).unwrap_or_default();
    });
    status
}

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fedvet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message for this thread into `buffer` and
/// returns the number of bytes the full message needs, including the NUL
/// terminator. A zero return means no error has been recorded.
#[no_mangle]
pub unsafe extern "C" fn fedvet_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if bytes.len() <= 1 {
            return 0;
        }
        if !buffer.is_null() && capacity >= bytes.len() {
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer as *mut u8, bytes.len());
            }
        }
        bytes.len()
    })
}

unsafe fn opinion_slice<'a>(ptr: *const u8, len: usize) -> Option<&'a [u8]> {
    if ptr.is_null() {
        None
    } else {
        Some(unsafe { slice::from_raw_parts(ptr, len) })
    }
}

fn to_bools(raw: &[u8]) -> Result<Vec<bool>, FedvetStatus> {
    raw.iter()
        .map(|&v| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(fail(
                FedvetStatus::InvalidArgument,
                format!("opinions must be 0 or 1, found {v}"),
            )),
        })
        .collect()
}

/// Trust score of one opinion row against the consensus row: +10 per
/// matching position, -10 per mismatch, floored at 1. Both arrays hold
/// `len` entries of 0 or 1.
#[no_mangle]
pub unsafe extern "C" fn fedvet_trust_score(
    consensus: *const u8,
    individual: *const u8,
    len: usize,
    out_score: *mut u32,
) -> FedvetStatus {
    let (Some(consensus), Some(individual)) = (
        unsafe { opinion_slice(consensus, len) },
        unsafe { opinion_slice(individual, len) },
    ) else {
        return fail(FedvetStatus::NullPointer, "consensus/individual is null");
    };
    if out_score.is_null() {
        return fail(FedvetStatus::NullPointer, "out_score is null");
    }
    let (consensus, individual) = match (to_bools(consensus), to_bools(individual)) {
        (Ok(c), Ok(i)) => (c, i),
        _ => return FedvetStatus::InvalidArgument,
    };
    match trust::trust_calculation(&consensus, &individual) {
        Ok(score) => {
            unsafe { *out_score = score };
            FedvetStatus::Ok
        }
        Err(e) => fail(FedvetStatus::InvalidArgument, e.to_string()),
    }
}

/// Final per-validator influence for an `n` x `n` opinion matrix
/// (row-major, 0/1), its consensus row, and ζ. The accepted set is taken
/// from the consensus row. Writes `n` values summing to 1 into `out`.
#[no_mangle]
pub unsafe extern "C" fn fedvet_influence(
    opinions: *const u8,
    consensus: *const u8,
    n: usize,
    zeta: usize,
    out: *mut f64,
) -> FedvetStatus {
    if n == 0 {
        return fail(FedvetStatus::InvalidArgument, "n must be >= 1");
    }
    let (Some(raw_rows), Some(raw_consensus)) = (
        unsafe { opinion_slice(opinions, n * n) },
        unsafe { opinion_slice(consensus, n) },
    ) else {
        return fail(FedvetStatus::NullPointer, "opinions/consensus is null");
    };
    if out.is_null() {
        return fail(FedvetStatus::NullPointer, "out is null");
    }
    let Ok(flat) = to_bools(raw_rows) else {
        return FedvetStatus::InvalidArgument;
    };
    let Ok(consensus_row) = to_bools(raw_consensus) else {
        return FedvetStatus::InvalidArgument;
    };
    let rows: Vec<Vec<bool>> = flat.chunks(n).map(<[bool]>::to_vec).collect();
    let matrix = match OpinionMatrix::new(rows, consensus_row) {
        Ok(m) => m,
        Err(e) => return fail(FedvetStatus::InvalidArgument, e.to_string()),
    };
    match trust::compute_influence(&matrix, &matrix.accepted(), zeta) {
        Ok(influence) => {
            unsafe {
                std::ptr::copy_nonoverlapping(influence.values().as_ptr(), out, n);
            }
            FedvetStatus::Ok
        }
        Err(e) => fail(FedvetStatus::InvalidArgument, e.to_string()),
    }
}

/// Runs one seeded Snowball consensus instance over `n` initial opinions
/// (0/1). Writes the network decision, the polling rounds used, and
/// whether every node terminated.
#[no_mangle]
pub unsafe extern "C" fn fedvet_run_consensus(
    n: usize,
    quorum_k: usize,
    alpha: u32,
    beta: u32,
    max_rounds: u32,
    seed: u64,
    opinions: *const u8,
    out_decision: *mut u8,
    out_rounds: *mut u32,
    out_converged: *mut u8,
) -> FedvetStatus {
    let Some(raw) = (unsafe { opinion_slice(opinions, n) }) else {
        return fail(FedvetStatus::NullPointer, "opinions is null");
    };
    if out_decision.is_null() || out_rounds.is_null() || out_converged.is_null() {
        return fail(FedvetStatus::NullPointer, "output pointer is null");
    }
    let Ok(initial) = to_bools(raw) else {
        return FedvetStatus::InvalidArgument;
    };
    let params = match ConsensusParams::new(n, quorum_k, alpha, beta, max_rounds, seed) {
        Ok(p) => p,
        Err(e) => return fail(FedvetStatus::InvalidArgument, e.to_string()),
    };
    match snowball::run_consensus(&initial, &params) {
        Ok(outcome) => {
            unsafe {
                *out_decision = u8::from(outcome.decision);
                *out_rounds = outcome.rounds_used;
                *out_converged = u8::from(outcome.converged);
            }
            FedvetStatus::Ok
        }
        Err(e) => fail(FedvetStatus::RuntimeError, e.to_string()),
    }
}

/// Opaque experiment handle: a parsed configuration plus, after
/// `fedvet_experiment_run`, the collected reports.
pub struct FedvetExperiment {
    file: CliConfigFile,
    report_lines: Vec<String>,
    summary_csv: String,
}

/// Parses the same TOML document the CLI consumes and returns a handle,
/// or null (see `fedvet_last_error`) when parsing or validation fails.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_new(config_toml: *const c_char) -> *mut FedvetExperiment {
    if config_toml.is_null() {
        fail(FedvetStatus::NullPointer, "config_toml is null");
        return std::ptr::null_mut();
    }
    let text = match unsafe { CStr::from_ptr(config_toml) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            fail(FedvetStatus::InvalidArgument, "config_toml is not UTF-8");
            return std::ptr::null_mut();
        }
    };
    let file: CliConfigFile = match toml_parse(text) {
        Ok(f) => f,
        Err(message) => {
            fail(FedvetStatus::InvalidArgument, message);
            return std::ptr::null_mut();
        }
    };
    if let Err(e) = file.validate() {
        fail(FedvetStatus::InvalidArgument, e.to_string());
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(FedvetExperiment {
        file,
        report_lines: Vec::new(),
        summary_csv: String::new(),
    }))
}

fn toml_parse(text: &str) -> Result<CliConfigFile, String> {
    fedvet::config::parse_config_str(text).map_err(|e| e.to_string())
}

/// Runs every sweep point of the handle's configuration, collecting one
/// JSON line per round report and the full summary CSV.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_run(handle: *mut FedvetExperiment) -> FedvetStatus {
    let Some(experiment) = (unsafe { handle.as_mut() }) else {
        return fail(FedvetStatus::NullPointer, "handle is null");
    };
    let mut summary = Vec::new();
    let hash = experiment.file.config_hash();
    if output::write_summary_preamble(
        &mut summary,
        &hash,
        experiment.file.experiment.master_seed,
    )
    .is_err()
    {
        return fail(FedvetStatus::RuntimeError, "summary buffer write failed");
    }
    let mut lines = Vec::new();
    for point in experiment.file.sweep_points() {
        let cfg = experiment.file.experiment_for(&point);
        let out = match orchestrator::run_experiment(&cfg) {
            Ok(out) => out,
            Err(e) => return fail(FedvetStatus::RuntimeError, e.to_string()),
        };
        let mut rounds_buf = Vec::new();
        if output::write_rounds_jsonl(&mut rounds_buf, &point, &out.reports).is_err()
            || output::write_summary_rows(&mut summary, &point, &out.reports).is_err()
        {
            return fail(FedvetStatus::RuntimeError, "report buffer write failed");
        }
        lines.extend(
            String::from_utf8_lossy(&rounds_buf)
                .lines()
                .map(str::to_owned),
        );
    }
    experiment.report_lines = lines;
    experiment.summary_csv = String::from_utf8_lossy(&summary).into_owned();
    FedvetStatus::Ok
}

/// Number of round reports collected by the last run.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_report_count(
    handle: *const FedvetExperiment,
) -> usize {
    unsafe { handle.as_ref() }.map_or(0, |e| e.report_lines.len())
}

unsafe fn copy_string(
    text: &str,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> FedvetStatus {
    let needed = text.len() + 1;
    if !written.is_null() {
        unsafe { *written = needed };
    }
    if buffer.is_null() {
        return fail(FedvetStatus::NullPointer, "buffer is null");
    }
    if capacity < needed {
        return FedvetStatus::BufferTooSmall;
    }
    unsafe {
        std::ptr::copy_nonoverlapping(text.as_ptr(), buffer as *mut u8, text.len());
        *buffer.add(text.len()) = 0;
    }
    FedvetStatus::Ok
}

/// Copies one round report as a NUL-terminated JSON line. `written`
/// receives the required buffer size, including the terminator.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_report_json(
    handle: *const FedvetExperiment,
    index: usize,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> FedvetStatus {
    let Some(experiment) = (unsafe { handle.as_ref() }) else {
        return fail(FedvetStatus::NullPointer, "handle is null");
    };
    let Some(line) = experiment.report_lines.get(index) else {
        return fail(
            FedvetStatus::InvalidArgument,
            format!(
                "report index {index} out of range ({} collected)",
                experiment.report_lines.len()
            ),
        );
    };
    unsafe { copy_string(line, buffer, capacity, written) }
}

/// Copies the full summary CSV (comment line, header, data rows) as a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_summary_csv(
    handle: *const FedvetExperiment,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> FedvetStatus {
    let Some(experiment) = (unsafe { handle.as_ref() }) else {
        return fail(FedvetStatus::NullPointer, "handle is null");
    };
    unsafe { copy_string(&experiment.summary_csv, buffer, capacity, written) }
}

/// Releases a handle created by `fedvet_experiment_new`. Null is allowed.
#[no_mangle]
pub unsafe extern "C" fn fedvet_experiment_free(handle: *mut FedvetExperiment) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}
