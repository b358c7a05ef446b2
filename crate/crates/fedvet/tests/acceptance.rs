//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers. Run with
//! `cargo test --test acceptance -- --nocapture`.

mod common;

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fedvet::data::{AttackConfig, SyntheticSpec};
use fedvet::fedavg;
use fedvet::ledger::{Address, Admission, Ledger, LedgerError, Role, TxPayload};
use fedvet::lof::LofModel;
use fedvet::model::{ClassWeighting, ModelKind, TrainConfig, WeightVector};
use fedvet::orchestrator::{
    self, ConsensusConfig, DatasetSource, ExperimentConfig, LofConfig, Topology,
};
use fedvet::seed::derive_seed;
use fedvet::snowball::{self, ConsensusParams};
use fedvet::trust::{self, GenerationPath, OpinionMatrix};
use fedvet::vault::{self, KeyPair, VaultStore};

fn reference_matrix() -> OpinionMatrix {
    OpinionMatrix::new(
        vec![
            vec![true, false, false, true, true],
            vec![true, false, true, true, true],
            vec![true, true, false, false, true],
            vec![true, false, false, false, true],
            vec![true, true, false, false, true],
        ],
        vec![true, false, false, false, true],
    )
    .unwrap()
}

/// Criterion 1: the worked five-validator example reproduces exactly and
/// the `table2` subcommand exits 0, in under a second.
#[test]
fn criterion_1_reference_example_reproduction() {
    let started = Instant::now();

    let matrix = reference_matrix();
    let breakdown = trust::influence_breakdown(&matrix, &matrix.accepted(), 5).unwrap();
    assert_eq!(breakdown.trust, vec![30, 10, 30, 50, 30]);
    let expected_final = [0.32, 0.04, 0.12, 0.20, 0.32];
    for (got, want) in breakdown.final_influence.iter().zip(&expected_final) {
        assert!((got - want).abs() < 1e-9, "influence {got} vs {want}");
    }

    let status = Command::new(env!("CARGO_BIN_EXE_fedvet"))
        .arg("table2")
        .output()
        .expect("spawn table2");
    assert!(status.status.success(), "table2 exited nonzero");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1 (reference example, table2 exit 0, {:.0} ms): PASS",
        elapsed.as_secs_f64() * 1e3
    );
}

/// Criterion 2: ζ in {1, 2} averages the accepted weights; ζ = 5 switches
/// to the influence path.
#[test]
fn criterion_2_model_generation_gating() {
    let proposals: Vec<WeightVector> = (0..5)
        .map(|i| WeightVector {
            coefficients: vec![i as f64, -(i as f64)],
            intercept: 10.0 + i as f64,
            sample_count: 100,
        })
        .collect();
    let matrix = reference_matrix();

    for zeta in [1, 2] {
        let (model, path) = trust::generate_global_model(&proposals, &matrix, zeta).unwrap();
        assert_eq!(path, GenerationPath::Consensus, "zeta={zeta}");
        let expected = fedavg::mean_of_accepted(&[proposals[0].clone(), proposals[4].clone()])
            .unwrap();
        assert_eq!(model.coefficients, expected.coefficients, "zeta={zeta}");
        assert_eq!(model.intercept, expected.intercept, "zeta={zeta}");
    }

    let (_, path) = trust::generate_global_model(&proposals, &matrix, 5).unwrap();
    assert_eq!(path, GenerationPath::Influence);
    println!("criterion 2 (zeta-gated generation paths): PASS");
}

/// Criterion 3: Snowball at N=5, k=4, alpha=3, beta=3 over 1000 seeded
/// trials: full agreement among decided nodes, unanimity preservation,
/// and at least 99% termination within 200 polling rounds, in under 30 s.
#[test]
fn criterion_3_snowball_properties() {
    let started = Instant::now();
    let trials = 1000u32;
    let mut terminated = 0u32;
    let mut agreement_failures = 0u32;

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xACCE, &[u64::from(trial)]));
        let opinions: Vec<bool> = (0..5).map(|_| rng.gen()).collect();
        let params =
            ConsensusParams::new(5, 4, 3, 3, 200, derive_seed(0x5EED, &[u64::from(trial)]))
                .unwrap();
        let outcome = snowball::run_consensus(&opinions, &params).unwrap();

        if outcome.converged {
            terminated += 1;
            let decisions: Vec<bool> =
                outcome.node_decisions.iter().map(|d| d.unwrap()).collect();
            if !decisions.iter().all(|&d| d == decisions[0]) {
                agreement_failures += 1;
            }
        }
        if opinions.iter().all(|&o| o == opinions[0]) {
            assert_eq!(
                outcome.decision, opinions[0],
                "trial {trial}: unanimity not preserved"
            );
        }
    }

    // explicit unanimity checks on top of whatever the random draws hit
    for seed in 0..100u64 {
        let params = ConsensusParams::new(5, 4, 3, 3, 200, seed).unwrap();
        assert!(snowball::run_consensus(&[true; 5], &params).unwrap().decision);
        assert!(!snowball::run_consensus(&[false; 5], &params).unwrap().decision);
    }

    assert_eq!(agreement_failures, 0, "agreement must hold in every terminating trial");
    let termination_rate = f64::from(terminated) / f64::from(trials);
    assert!(
        termination_rate >= 0.99,
        "termination rate {termination_rate}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!(
        "criterion 3 (snowball: agreement 100%, termination {:.1}%, {:.2} s): PASS",
        termination_rate * 100.0,
        elapsed.as_secs_f64()
    );
}

/// Criterion 4: from-scratch LOF matches the O(n^2) brute-force oracle to
/// 1e-9 on 50 random fixtures, and the unit-square corners score exactly 1.
#[test]
fn criterion_4_lof_oracle_equivalence() {
    let corners = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ];
    let model = LofModel::fit(corners, 2).unwrap();
    for score in model.training_scores() {
        assert_eq!(score, 1.0, "corner symmetry must give exactly 1.0");
    }

    let mut worst: f64 = 0.0;
    for fixture in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x10F, &[fixture]));
        let n = rng.gen_range(10..=100);
        let d = rng.gen_range(1..=10);
        let k = rng.gen_range(1..=(n - 1).min(8));
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();

        let model = LofModel::fit(points.clone(), k).unwrap();
        let training = model.training_scores();
        let oracle_training = common::brute_force_lof_training(&points, k);
        for (got, want) in training.iter().zip(&oracle_training) {
            let diff = (got - want).abs();
            worst = worst.max(diff);
            assert!(diff <= 1e-9, "fixture {fixture}: training {got} vs {want}");
        }

        for _ in 0..5 {
            let query: Vec<f64> = (0..d).map(|_| rng.gen_range(-12.0..12.0)).collect();
            let got = model.score(&query).unwrap().score;
            let want = common::brute_force_lof_query(&points, k, &query);
            let diff = (got - want).abs();
            worst = worst.max(diff);
            assert!(diff <= 1e-9, "fixture {fixture}: query {got} vs {want}");
        }
    }
    println!("criterion 4 (LOF vs brute-force oracle, worst |Δ| = {worst:.2e}): PASS");
}

/// Criterion 5: 1000 random weight vectors round-trip through
/// serialize/encrypt/store/decrypt; 10,000 randomized man-in-the-middle
/// mutations are all detected.
#[test]
fn criterion_5_vault_security_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A017);

    for case in 0..1000u32 {
        let keys = KeyPair::generate(&mut rng);
        let mut store = VaultStore::new();
        let dim = rng.gen_range(1..=16);
        let weights = WeightVector {
            coefficients: (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect(),
            intercept: rng.gen_range(-1e3..1e3),
            sample_count: rng.gen_range(0..1_000_000),
        };
        let sealed = vault::encrypt_for(
            keys.public(),
            &vault::serialize_weights(&weights).unwrap(),
            &mut rng,
        );
        let cid = store.put(sealed);
        let fetched = store.get(&cid).unwrap().to_vec();
        let opened = vault::decrypt(keys.secret(), &fetched).unwrap();
        let recovered = vault::deserialize_weights(&opened).unwrap();
        assert_eq!(recovered, weights, "case {case}: round trip must be identity");
    }

    let mut detected = 0u32;
    let mutations = 10_000u32;
    for case in 0..mutations {
        let keys = KeyPair::generate(&mut rng);
        let mut store = VaultStore::new();
        let weights = WeightVector {
            coefficients: vec![rng.gen_range(-1.0..1.0); 4],
            intercept: rng.gen_range(-1.0..1.0),
            sample_count: 7,
        };
        let plaintext = vault::serialize_weights(&weights).unwrap();
        let sealed = vault::encrypt_for(keys.public(), &plaintext, &mut rng);
        let cid = store.put(sealed.clone());

        let caught = match case % 3 {
            // in-place bit flip of the stored ciphertext
            0 => {
                let byte = rng.gen_range(0..sealed.len());
                let bit = 1u8 << rng.gen_range(0..8);
                store.tamper(&cid, |bytes| bytes[byte] ^= bit).unwrap();
                match store.get(&cid) {
                    Err(_) => true,
                    Ok(bytes) => vault::decrypt(keys.secret(), bytes).is_err(),
                }
            }
            // wholesale substitution with a ciphertext for another key
            1 => {
                let eve = KeyPair::generate(&mut rng);
                let forged = vault::encrypt_for(eve.public(), &plaintext, &mut rng);
                store.tamper(&cid, |bytes| *bytes = forged.clone()).unwrap();
                match store.get(&cid) {
                    Err(_) => true,
                    Ok(bytes) => vault::decrypt(keys.secret(), bytes).is_err(),
                }
            }
            // honest ciphertext, wrong recipient key
            _ => {
                let eve = KeyPair::generate(&mut rng);
                let bytes = store.get(&cid).unwrap();
                vault::decrypt(eve.secret(), bytes).is_err()
            }
        };
        if caught {
            detected += 1;
        }
    }
    assert_eq!(detected, mutations, "every mutation must be detected");
    println!("criterion 5 (vault: 1000 round trips, {mutations}/{mutations} mutations detected): PASS");
}

/// Criterion 6: the role/operation access matrix, the strict surety
/// threshold, and tamper evidence over 1000 randomized trials.
#[test]
fn criterion_6_ledger_contract() {
    let coordinator = Address::new("coordinator");
    let validator = Address::new("validator-0");
    let outsider = Address::new("outsider");

    let fresh = || {
        let mut ledger = Ledger::new(coordinator.clone());
        assert_eq!(
            ledger.add_validator(&validator, 0.006).unwrap(),
            Admission::Accepted
        );
        ledger.setup(&coordinator, 2).unwrap();
        ledger
    };

    // surety threshold is strictly greater-than
    let mut ledger = Ledger::new(coordinator.clone());
    assert_eq!(
        ledger.add_validator(&Address::new("v"), 0.005).unwrap(),
        Admission::Rejected
    );
    assert_eq!(
        ledger.add_validator(&Address::new("v"), 0.0051).unwrap(),
        Admission::Accepted
    );

    // exhaustive role x operation matrix
    let callers = [
        (coordinator.clone(), Role::Coordinator),
        (validator.clone(), Role::Validator),
        (outsider.clone(), Role::Other),
    ];
    for (caller, role) in &callers {
        let mut ledger = fresh();
        assert_eq!(ledger.role_of(caller), *role);

        // add_validator: open to any unregistered address with payment
        let addable = matches!(
            ledger.add_validator(&Address::new(format!("{caller}-new")), 0.01),
            Ok(Admission::Accepted)
        );
        assert!(addable, "{role:?} can register a new validator address");

        let setup_allowed = ledger.setup(caller, 2).is_ok();
        assert_eq!(setup_allowed, *role == Role::Coordinator, "{role:?} setup");

        let write_allowed = ledger.set_opinion(caller, 0, vec![true, false]).is_ok();
        assert_eq!(
            write_allowed,
            matches!(role, Role::Coordinator | Role::Validator),
            "{role:?} set_opinion"
        );

        let read_allowed = ledger.get_opinion(caller).is_ok();
        assert_eq!(read_allowed, *role == Role::Coordinator, "{role:?} get_opinion");
    }

    // duplicate registration is a hard error
    let mut ledger = fresh();
    assert!(matches!(
        ledger.add_validator(&validator, 1.0),
        Err(LedgerError::DuplicateValidator(_))
    ));

    // randomized single-entry tampering is always detected
    let mut rng = ChaCha8Rng::seed_from_u64(0x1ED6E);
    for trial in 0..1000u32 {
        let mut ledger = Ledger::new(coordinator.clone());
        let writes = rng.gen_range(2..12);
        for i in 0..writes {
            let address = Address::new(format!("validator-{i}"));
            ledger.add_validator(&address, 0.01).unwrap();
        }
        ledger.setup(&coordinator, writes).unwrap();
        for i in 0..writes {
            let address = Address::new(format!("validator-{i}"));
            let row: Vec<bool> = (0..writes).map(|_| rng.gen()).collect();
            ledger.set_opinion(&address, i, row).unwrap();
        }
        assert!(ledger.verify_chain(), "trial {trial}: untampered chain");

        let target = rng.gen_range(0..ledger.entries().len());
        if rng.gen() {
            ledger.tamper_payload(
                target,
                TxPayload::SetOpinion {
                    caller: Address::new("mallory"),
                    key: 0,
                    opinion: vec![rng.gen()],
                },
            );
        } else {
            let mut hash = [0u8; 32];
            rng.fill(&mut hash);
            ledger.tamper_hash(target, hash);
        }
        assert!(!ledger.verify_chain(), "trial {trial}: tampering undetected");
    }
    println!("criterion 6 (ledger access matrix, strict surety, 1000 tamper trials): PASS");
}

fn defense_fixture() -> ExperimentConfig {
    ExperimentConfig {
        topology: Topology {
            n_validators: 5,
            nodes_per_validator: 2,
        },
        train: TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            l2_penalty: 0.0,
            class_weighting: ClassWeighting::Uniform,
            seed: 0,
            model_kind: ModelKind::SgdHinge,
        },
        consensus: ConsensusConfig {
            quorum_k: 4,
            alpha: 3,
            beta: 3,
            max_rounds: 200,
        },
        zeta: 4,
        attack: AttackConfig {
            flip: 0,
            proportion: 0,
            seed: 9,
        },
        rounds: 10,
        dataset: DatasetSource::Synthetic(SyntheticSpec {
            n_samples: 1600,
            n_features: 2,
            class_sep: 2.5,
            imbalance_ratio: 0.5,
            seed: 7,
        }),
        repetitions: 10,
        master_seed: 42,
        test_fraction: 0.25,
        lof: LofConfig {
            window_rounds: 2,
            threshold: 2.2,
        },
    }
}

fn final_round_mean(reports: &[orchestrator::RoundReport], rounds: u32, pick: impl Fn(&orchestrator::RoundReport) -> f64) -> f64 {
    let values: Vec<f64> = reports
        .iter()
        .filter(|r| r.round == rounds)
        .map(&pick)
        .collect();
    orchestrator::mean(&values)
}

fn population_variance(values: &[f64]) -> f64 {
    let m = orchestrator::mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Criterion 7: end-to-end defense on synthetic separable data with
/// 5 validators x 2 nodes, 10 rounds, 10 repetitions:
/// (a) without an attack the defended model tracks centralized training
///     within 0.05;
/// (b) under flip=2 at proportions 4..8 with ζ=4 the defended final
///     accuracy beats or matches the undefended baseline, and accuracy
///     variance across ζ in {4,5} stays below ζ in {0,1};
/// all inside five minutes.
#[test]
fn criterion_7_end_to_end_defense() {
    let started = Instant::now();

    // (a) no attack: defended vs centralized at equal epoch budget
    let clean = defense_fixture();
    let out = orchestrator::run_experiment(&clean).unwrap();
    let defended = final_round_mean(&out.reports, clean.rounds, |r| r.accuracy_defended);
    let centralized_values: Vec<f64> = (0..clean.repetitions)
        .map(|rep| orchestrator::centralized_accuracy(&clean, rep).unwrap())
        .collect();
    let centralized = orchestrator::mean(&centralized_values);
    assert!(
        (defended - centralized).abs() <= 0.05,
        "no-attack defended {defended:.4} vs centralized {centralized:.4}"
    );

    // (b) attacked: flip=2, proportions 4..8
    let mut attacked_margin = f64::INFINITY;
    let mut low_zeta_pool = Vec::new();
    let mut high_zeta_pool = Vec::new();
    for proportion in 4..=8u8 {
        for zeta in [0usize, 1, 4, 5] {
            let mut cfg = defense_fixture();
            cfg.zeta = zeta;
            cfg.attack.flip = 2;
            cfg.attack.proportion = proportion;
            let out = orchestrator::run_experiment(&cfg).unwrap();

            let accuracies: Vec<f64> =
                out.reports.iter().map(|r| r.accuracy_defended).collect();
            match zeta {
                0 | 1 => low_zeta_pool.extend(accuracies),
                _ => high_zeta_pool.extend(accuracies),
            }

            if zeta == 4 {
                let defended = final_round_mean(&out.reports, cfg.rounds, |r| r.accuracy_defended);
                let baseline = final_round_mean(&out.reports, cfg.rounds, |r| r.accuracy_baseline);
                attacked_margin = attacked_margin.min(defended - baseline);
                assert!(
                    defended >= baseline,
                    "proportion {proportion}: defended {defended:.4} < baseline {baseline:.4}"
                );
            }
        }
    }

    let low_var = population_variance(&low_zeta_pool);
    let high_var = population_variance(&high_zeta_pool);
    assert!(
        high_var < low_var,
        "stability: var(zeta 4,5) = {high_var:.3e} must stay below var(zeta 0,1) = {low_var:.3e}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 7 (defense: |defended-centralized| = {:.4}, min margin {:+.4}, var {:.3e} < {:.3e}, {:.0} s): PASS",
        (defended - centralized).abs(),
        attacked_margin,
        high_var,
        low_var,
        elapsed.as_secs_f64()
    );
}

/// Criterion 8: two CLI runs with identical config and seed produce a
/// byte-identical summary.csv.
#[test]
fn criterion_8_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.toml");
    std::fs::write(
        &config_path,
        r#"
version = 1

[experiment]
zeta = 1
rounds = 3
repetitions = 2
master_seed = 42

[experiment.topology]
n_validators = 5
nodes_per_validator = 2

[experiment.train]
learning_rate = 0.3
epochs = 15

[experiment.consensus]
quorum_k = 4
alpha = 3
beta = 3

[experiment.attack]
flip = 1
proportion = 6
seed = 5

[experiment.dataset]
kind = "synthetic"
n_samples = 400
n_features = 2
class_sep = 3.0
imbalance_ratio = 0.5
seed = 11

[sweep]
zeta_values = [1, 4]
"#,
    )
    .unwrap();

    let run = |out: &str| -> Vec<u8> {
        let out_dir = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_fedvet"))
            .args(["run", "--config"])
            .arg(&config_path)
            .args(["--seed", "1", "--out"])
            .arg(&out_dir)
            .output()
            .expect("spawn run");
        assert!(status.status.success(), "run failed: {:?}", status);
        std::fs::read(out_dir.join("summary.csv")).unwrap()
    };

    let first = run("a");
    let second = run("b");
    assert!(!first.is_empty());
    assert_eq!(first, second, "summary.csv must be byte-identical");
    println!(
        "criterion 8 (byte-identical reruns, {} bytes): PASS",
        first.len()
    );
}
