//! Exercises the C ABI from Rust exactly as a foreign caller would:
//! through raw pointers and status codes.

use std::ffi::{c_char, CStr, CString};

use fedvet_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let needed = unsafe { fedvet_last_error(buf.as_mut_ptr(), buf.len()) };
    if needed == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_a_static_string() {
    let version = unsafe { CStr::from_ptr(fedvet_version()) };
    assert!(!version.to_str().unwrap().is_empty());
}

#[test]
fn trust_score_matches_reference_values() {
    let consensus = [1u8, 0, 0, 0, 1];
    let v1 = [1u8, 0, 0, 1, 1];
    let v4 = [1u8, 0, 0, 0, 1];

    let mut score = 0u32;
    let status = unsafe {
        fedvet_trust_score(consensus.as_ptr(), v1.as_ptr(), 5, &mut score)
    };
    assert_eq!(status, FedvetStatus::Ok);
    assert_eq!(score, 30);

    let status = unsafe {
        fedvet_trust_score(consensus.as_ptr(), v4.as_ptr(), 5, &mut score)
    };
    assert_eq!(status, FedvetStatus::Ok);
    assert_eq!(score, 50);
}

#[test]
fn trust_score_rejects_null_and_bad_values() {
    let consensus = [1u8, 0];
    let mut score = 0u32;
    let status = unsafe {
        fedvet_trust_score(std::ptr::null(), consensus.as_ptr(), 2, &mut score)
    };
    assert_eq!(status, FedvetStatus::NullPointer);
    assert!(!last_error().is_empty());

    let bad = [1u8, 7];
    let status = unsafe {
        fedvet_trust_score(consensus.as_ptr(), bad.as_ptr(), 2, &mut score)
    };
    assert_eq!(status, FedvetStatus::InvalidArgument);
}

#[test]
fn influence_reproduces_reference_example() {
    #[rustfmt::skip]
    let opinions = [
        1u8, 0, 0, 1, 1,
        1, 0, 1, 1, 1,
        1, 1, 0, 0, 1,
        1, 0, 0, 0, 1,
        1, 1, 0, 0, 1,
    ];
    let consensus = [1u8, 0, 0, 0, 1];
    let mut influence = [0.0f64; 5];
    let status = unsafe {
        fedvet_influence(
            opinions.as_ptr(),
            consensus.as_ptr(),
            5,
            5,
            influence.as_mut_ptr(),
        )
    };
    assert_eq!(status, FedvetStatus::Ok);
    let expected = [0.32, 0.04, 0.12, 0.20, 0.32];
    for (got, want) in influence.iter().zip(&expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn influence_rejects_zeta_zero() {
    let opinions = [1u8, 1, 1, 1];
    let consensus = [1u8, 1];
    let mut influence = [0.0f64; 2];
    let status = unsafe {
        fedvet_influence(
            opinions.as_ptr(),
            consensus.as_ptr(),
            2,
            0,
            influence.as_mut_ptr(),
        )
    };
    assert_eq!(status, FedvetStatus::InvalidArgument);
    assert!(last_error().contains("zeta"));
}

#[test]
fn consensus_decides_unanimous_opinions() {
    let opinions = [1u8; 5];
    let mut decision = 0u8;
    let mut rounds = 0u32;
    let mut converged = 0u8;
    let status = unsafe {
        fedvet_run_consensus(
            5,
            4,
            3,
            3,
            200,
            42,
            opinions.as_ptr(),
            &mut decision,
            &mut rounds,
            &mut converged,
        )
    };
    assert_eq!(status, FedvetStatus::Ok);
    assert_eq!(decision, 1);
    assert_eq!(converged, 1);
    assert!(rounds <= 3);
}

#[test]
fn consensus_rejects_bad_parameters() {
    let opinions = [1u8; 5];
    let mut decision = 0u8;
    let mut rounds = 0u32;
    let mut converged = 0u8;
    let status = unsafe {
        fedvet_run_consensus(
            5,
            5, // quorum cannot include the whole network minus nobody
            3,
            3,
            200,
            42,
            opinions.as_ptr(),
            &mut decision,
            &mut rounds,
            &mut converged,
        )
    };
    assert_eq!(status, FedvetStatus::InvalidArgument);
}

const CONFIG: &str = r#"
version = 1

[experiment]
zeta = 1
rounds = 2
repetitions = 1
master_seed = 5

[experiment.topology]
n_validators = 5
nodes_per_validator = 2

[experiment.train]
learning_rate = 0.3
epochs = 10

[experiment.consensus]
quorum_k = 4
alpha = 3
beta = 3

[experiment.attack]
flip = 0
proportion = 0
seed = 2

[experiment.dataset]
kind = "synthetic"
n_samples = 300
n_features = 2
class_sep = 3.0
imbalance_ratio = 0.5
seed = 8
"#;

#[test]
fn experiment_lifecycle_produces_reports_and_summary() {
    let config = CString::new(CONFIG).unwrap();
    let handle = unsafe { fedvet_experiment_new(config.as_ptr()) };
    assert!(!handle.is_null(), "last error: {}", last_error());

    assert_eq!(unsafe { fedvet_experiment_run(handle) }, FedvetStatus::Ok);
    let count = unsafe { fedvet_experiment_report_count(handle) };
    assert_eq!(count, 2, "1 sweep point x 1 repetition x 2 rounds");

    // query the needed size, then fetch
    let mut needed = 0usize;
    let status = unsafe {
        fedvet_experiment_report_json(handle, 0, std::ptr::null_mut(), 0, &mut needed)
    };
    assert_eq!(status, FedvetStatus::NullPointer);
    assert!(needed > 2);

    let mut buf = vec![0 as c_char; needed];
    let status = unsafe {
        fedvet_experiment_report_json(handle, 0, buf.as_mut_ptr(), buf.len(), &mut needed)
    };
    assert_eq!(status, FedvetStatus::Ok);
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(json.contains("\"round\":1"));
    assert!(json.contains("\"zeta\":1"));

    // undersized buffer reports BufferTooSmall and the required size
    let mut small = [0 as c_char; 4];
    let mut required = 0usize;
    let status = unsafe {
        fedvet_experiment_summary_csv(handle, small.as_mut_ptr(), small.len(), &mut required)
    };
    assert_eq!(status, FedvetStatus::BufferTooSmall);
    assert!(required > small.len());

    let mut csv_buf = vec![0 as c_char; required];
    let status = unsafe {
        fedvet_experiment_summary_csv(handle, csv_buf.as_mut_ptr(), csv_buf.len(), &mut required)
    };
    assert_eq!(status, FedvetStatus::Ok);
    let csv = unsafe { CStr::from_ptr(csv_buf.as_ptr()) }.to_str().unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.contains("zeta,flip,proportion,round,repetition,path"));

    unsafe { fedvet_experiment_free(handle) };
}

#[test]
fn experiment_new_rejects_invalid_config() {
    let bad = CString::new("version = 2\n").unwrap();
    let handle = unsafe { fedvet_experiment_new(bad.as_ptr()) };
    assert!(handle.is_null());
    assert!(!last_error().is_empty());

    let malformed = CString::new("not toml [").unwrap();
    let handle = unsafe { fedvet_experiment_new(malformed.as_ptr()) };
    assert!(handle.is_null());
}

#[test]
fn free_accepts_null() {
    unsafe { fedvet_experiment_free(std::ptr::null_mut()) };
}
