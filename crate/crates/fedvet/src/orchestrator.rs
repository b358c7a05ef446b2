//! Wires the roles into the full round protocol: node training, encrypted
//! vault transfer, validator aggregation and novelty vetting, per-proposal
//! Snowball consensus, ledger recording, and ζ-gated global model
//! generation, with an undefended FedAvg baseline running alongside.

use std::collections::VecDeque;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{self, AttackConfig, DataError, Dataset, SyntheticSpec};
use crate::fedavg::{self, AggError};
use crate::ledger::{Address, Admission, Ledger, LedgerError, TxEntry};
use crate::lof::{self, LofError, LofModel};
use crate::model::{self, ModelError, TrainConfig, WeightVector};
use crate::seed::derive_seed;
use crate::snowball::{self, ConsensusParams, SnowballError, TraceRecord};
use crate::trust::{self, GenerationPath, OpinionMatrix, TrustError};
use crate::vault::{self, KeyPair, VaultError, VaultStore};

// Stream tags for seed derivation; distinct per purpose.
const TAG_REPETITION: u64 = 1;
const TAG_SPLIT: u64 = 2;
const TAG_PARTITION: u64 = 3;
const TAG_KEYS: u64 = 4;
const TAG_CRYPTO: u64 = 5;
const TAG_CONSENSUS: u64 = 6;
const TAG_FLIP: u64 = 7;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Aggregation(#[from] AggError),
    #[error(transparent)]
    Novelty(#[from] LofError),
    #[error(transparent)]
    Consensus(#[from] SnowballError),
    #[error("ledger fault, round aborted: {0}")]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Vault(#[from] VaultError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Hierarchy shape: every node belongs to exactly one validator's
/// federation; a single coordinator sits at the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub n_validators: usize,
    pub nodes_per_validator: usize,
}

impl Topology {
    pub fn total_nodes(&self) -> usize {
        self.n_validators * self.nodes_per_validator
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_validators == 0 || self.nodes_per_validator == 0 {
            return Err(PipelineError::Config(
                "topology requires at least one validator and one node per validator".into(),
            ));
        }
        Ok(())
    }
}

/// Snowball knobs shared by every consensus instance; the network size is
/// the validator count and per-instance seeds are derived internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusConfig {
    pub quorum_k: usize,
    pub alpha: u32,
    pub beta: u32,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
}

fn default_max_rounds() -> u32 {
    200
}

/// Validator-side novelty detection knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LofConfig {
    /// How many rounds of node updates stay in the training pool.
    #[serde(default = "default_window_rounds")]
    pub window_rounds: usize,
    #[serde(default = "default_lof_threshold")]
    pub threshold: f64,
}

fn default_window_rounds() -> usize {
    10
}

fn default_lof_threshold() -> f64 {
    lof::DEFAULT_THRESHOLD
}

impl Default for LofConfig {
    fn default() -> Self {
        Self {
            window_rounds: default_window_rounds(),
            threshold: default_lof_threshold(),
        }
    }
}

/// Where the experiment's dataset comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv { path: PathBuf, label_column: String },
}

fn default_test_fraction() -> f64 {
    0.25
}

/// Everything one experiment needs: topology, training and consensus
/// parameters, the ζ policy, the attack, and the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub train: TrainConfig,
    pub consensus: ConsensusConfig,
    pub zeta: usize,
    pub attack: AttackConfig,
    pub rounds: u32,
    pub dataset: DatasetSource,
    pub repetitions: u32,
    pub master_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub lof: LofConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.topology.validate()?;
        self.train.validate()?;
        if let DatasetSource::Synthetic(spec) = &self.dataset {
            spec.validate()?;
        }
        self.attack.validate(self.topology.n_validators)?;
        trust::PolicyConfig { zeta: self.zeta }
            .validate(self.topology.n_validators)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.rounds == 0 {
            return Err(PipelineError::Config("rounds must be >= 1".into()));
        }
        if self.repetitions == 0 {
            return Err(PipelineError::Config("repetitions must be >= 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(PipelineError::Config(
                "test_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.lof.window_rounds == 0 {
            return Err(PipelineError::Config("lof.window_rounds must be >= 1".into()));
        }
        if self.lof.threshold.is_nan() || self.lof.threshold <= 1.0 {
            return Err(PipelineError::Config("lof.threshold must be > 1".into()));
        }
        let n = self.topology.n_validators;
        if n > 1 {
            // constructing params validates k, alpha, beta against n
            ConsensusParams::new(
                n,
                self.consensus.quorum_k,
                self.consensus.alpha,
                self.consensus.beta,
                self.consensus.max_rounds,
                0,
            )
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(())
    }

    fn load_dataset(&self) -> Result<Dataset, PipelineError> {
        match &self.dataset {
            DatasetSource::Synthetic(spec) => Ok(data::make_synthetic(spec)?),
            DatasetSource::Csv { path, label_column } => Ok(data::load_csv(
                path,
                label_column,
                data::CategoricalEncoding::OneHot,
            )?),
        }
    }
}

/// Which rule produced a round's global model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundPath {
    Consensus,
    Influence,
    /// No model could be generated; the previous global model was reused.
    CarryForward,
}

impl From<GenerationPath> for RoundPath {
    fn from(path: GenerationPath) -> Self {
        match path {
            GenerationPath::Consensus => RoundPath::Consensus,
            GenerationPath::Influence => RoundPath::Influence,
        }
    }
}

impl RoundPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoundPath::Consensus => "consensus",
            RoundPath::Influence => "influence",
            RoundPath::CarryForward => "carry_forward",
        }
    }
}

/// Record of one defended round, including the baseline comparison.
#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub round: u32,
    pub repetition: u32,
    pub accepted: Vec<usize>,
    pub trust: Vec<u32>,
    /// Present only when the influence path generated the model.
    pub influence: Option<Vec<f64>>,
    pub path: RoundPath,
    pub accuracy_defended: f64,
    pub accuracy_baseline: f64,
    /// Snowball polling rounds used, one entry per proposal.
    pub consensus_rounds: Vec<u32>,
    pub ledger_root: String,
}

/// Consensus trace of one proposal's Snowball run, tagged with its
/// position in the experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEvent {
    pub repetition: u32,
    pub round: u32,
    pub proposal: usize,
    pub records: Vec<TraceRecord>,
}

/// Per-round accuracy summary over repetitions.
#[derive(Debug, Clone, Serialize)]
pub struct RoundSummary {
    pub round: u32,
    pub mean_defended: f64,
    pub std_defended: f64,
    pub mean_baseline: f64,
    pub std_baseline: f64,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub reports: Vec<RoundReport>,
    pub summary: Vec<RoundSummary>,
    /// One transaction log per repetition.
    pub ledgers: Vec<Vec<TxEntry>>,
    pub traces: Vec<TraceEvent>,
}

/// Mutable state of one repetition: shards, keys, vault, ledger, novelty
/// pools, and both evolving global models.
pub struct ExperimentState {
    repetition: u32,
    rep_seed: u64,
    test_set: Dataset,
    /// `shards[validator][node]`, already poisoned where the attack says so.
    shards: Vec<Vec<Dataset>>,
    validator_keys: Vec<KeyPair>,
    validator_addresses: Vec<Address>,
    coordinator: Address,
    vault: VaultStore,
    ledger: Ledger,
    /// Per validator: one entry per retained round, each holding the
    /// flattened node updates of that round.
    lof_pools: Vec<VecDeque<Vec<Vec<f64>>>>,
    global: WeightVector,
    baseline: WeightVector,
    round_index: u32,
    crypto_rng: ChaCha8Rng,
    collect_traces: bool,
    traces: Vec<TraceEvent>,
}

impl ExperimentState {
    /// Prepares one repetition: loads and splits the dataset, partitions
    /// the training half into per-node shards, poisons the attacked
    /// federations, generates validator keys, and registers everyone on a
    /// fresh ledger.
    pub fn init(cfg: &ExperimentConfig, repetition: u32) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let rep_seed = derive_seed(cfg.master_seed, &[TAG_REPETITION, u64::from(repetition)]);
        let dataset = cfg.load_dataset()?;

        let total_nodes = cfg.topology.total_nodes();
        if dataset.n_samples() < total_nodes + 1 {
            return Err(PipelineError::Config(format!(
                "dataset has {} samples; need more than {total_nodes}",
                dataset.n_samples()
            )));
        }
        let n_test = ((dataset.n_samples() as f64 * cfg.test_fraction).round() as usize)
            .clamp(1, dataset.n_samples() - total_nodes);
        let mut indices: Vec<usize> = (0..dataset.n_samples()).collect();
        let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, &[TAG_SPLIT]));
        rand::seq::SliceRandom::shuffle(indices.as_mut_slice(), &mut split_rng);
        let test_set = dataset.subset(&indices[..n_test], format!("{}-test", dataset.name()));
        let train_set = dataset.subset(&indices[n_test..], format!("{}-train", dataset.name()));

        let flat_shards = data::partition_data(
            &train_set,
            total_nodes,
            derive_seed(rep_seed, &[TAG_PARTITION]),
        )?;
        let mut shards: Vec<Vec<Dataset>> = Vec::with_capacity(cfg.topology.n_validators);
        let mut shard_iter = flat_shards.into_iter();
        for validator in 0..cfg.topology.n_validators {
            let mut federation = Vec::with_capacity(cfg.topology.nodes_per_validator);
            for node in 0..cfg.topology.nodes_per_validator {
                let shard = shard_iter.next().expect("one shard per node");
                let shard = if validator < cfg.attack.flip {
                    data::flip_labels(
                        &shard,
                        cfg.attack.proportion,
                        derive_seed(
                            cfg.attack.seed,
                            &[TAG_FLIP, u64::from(repetition), validator as u64, node as u64],
                        ),
                    )?
                } else {
                    shard
                };
                federation.push(shard);
            }
            shards.push(federation);
        }

        let mut key_rng = ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, &[TAG_KEYS]));
        let validator_keys: Vec<KeyPair> = (0..cfg.topology.n_validators)
            .map(|_| KeyPair::generate(&mut key_rng))
            .collect();
        let validator_addresses: Vec<Address> = (0..cfg.topology.n_validators)
            .map(|v| Address::new(format!("validator-{v}")))
            .collect();
        let coordinator = Address::new("coordinator");

        let mut ledger = Ledger::new(coordinator.clone());
        for address in &validator_addresses {
            let admission = ledger.add_validator(address, 2.0 * ledger.surety_fee())?;
            if admission != Admission::Accepted {
                return Err(PipelineError::Internal(format!(
                    "surety registration rejected for {address}"
                )));
            }
        }

        let dim = dataset.n_features();
        Ok(Self {
            repetition,
            rep_seed,
            test_set,
            shards,
            validator_keys,
            validator_addresses,
            coordinator,
            vault: VaultStore::new(),
            ledger,
            lof_pools: vec![VecDeque::new(); cfg.topology.n_validators],
            global: WeightVector::zeros(dim),
            baseline: WeightVector::zeros(dim),
            round_index: 0,
            crypto_rng: ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, &[TAG_CRYPTO])),
            collect_traces: false,
            traces: Vec::new(),
        })
    }

    pub fn collect_traces(&mut self, enable: bool) {
        self.collect_traces = enable;
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn traces(&self) -> &[TraceEvent] {
        &self.traces
    }

    pub fn global_model(&self) -> &WeightVector {
        &self.global
    }

    pub fn baseline_model(&self) -> &WeightVector {
        &self.baseline
    }

    pub fn test_set(&self) -> &Dataset {
        &self.test_set
    }

    pub fn shard(&self, validator: usize, node: usize) -> &Dataset {
        &self.shards[validator][node]
    }

    /// Ships one weight vector through the vault to a recipient validator
    /// and verifies the round trip bit for bit.
    fn transfer(
        &mut self,
        weights: &WeightVector,
        recipient: usize,
    ) -> Result<WeightVector, PipelineError> {
        let plaintext = vault::serialize_weights(weights)?;
        let sealed = vault::encrypt_for(
            self.validator_keys[recipient].public(),
            &plaintext,
            &mut self.crypto_rng,
        );
        let cid = self.vault.put(sealed);
        let fetched = self.vault.get(&cid)?.to_vec();
        let opened = vault::decrypt(self.validator_keys[recipient].secret(), &fetched)?;
        let received = vault::deserialize_weights(&opened)?;
        if received != *weights {
            return Err(PipelineError::Internal(
                "vault round trip altered a weight vector".into(),
            ));
        }
        Ok(received)
    }

    /// Trains every node of every federation from `from` and returns the
    /// updates grouped by validator.
    fn train_federations(
        &self,
        cfg: &ExperimentConfig,
        from: &WeightVector,
    ) -> Result<Vec<Vec<WeightVector>>, PipelineError> {
        self.shards
            .iter()
            .map(|federation| {
                federation
                    .iter()
                    .map(|shard| Ok(model::train_local(shard, from, &cfg.train)?))
                    .collect()
            })
            .collect()
    }

    /// One plain-FedAvg step over all nodes, no vetting; advances and
    /// returns the baseline model's test accuracy.
    fn baseline_step(&mut self, cfg: &ExperimentConfig) -> Result<f64, PipelineError> {
        let updates: Vec<WeightVector> = self
            .train_federations(cfg, &self.baseline.clone())?
            .into_iter()
            .flatten()
            .collect();
        self.baseline = fedavg::fedavg_by_samples(&updates)?;
        Ok(model::evaluate(&self.baseline, &self.test_set)?.accuracy)
    }
}

/// Executes one full defended round plus the baseline step and reports
/// both.
pub fn run_round(
    state: &mut ExperimentState,
    cfg: &ExperimentConfig,
) -> Result<RoundReport, PipelineError> {
    let n = cfg.topology.n_validators;
    let round = state.round_index;

    // (1)-(4) nodes train on the broadcast global model; updates travel
    // encrypted through the vault to their validator, which aggregates
    // them and extends its novelty pool.
    let federation_updates = state.train_federations(cfg, &state.global.clone())?;
    let mut proposals: Vec<WeightVector> = Vec::with_capacity(n);
    for (validator, updates) in federation_updates.iter().enumerate() {
        let mut received = Vec::with_capacity(updates.len());
        for update in updates {
            received.push(state.transfer(update, validator)?);
        }
        proposals.push(fedavg::fedavg_by_samples(&received)?);

        let pool = &mut state.lof_pools[validator];
        pool.push_back(received.iter().map(WeightVector::flatten).collect());
        while pool.len() > cfg.lof.window_rounds {
            pool.pop_front();
        }
    }

    // (5) proposals are exchanged through the vault; each validator forms
    // an initial opinion on every proposal. The first round has no history
    // to vet against, so everything is accepted; a validator always
    // accepts its own proposal.
    let mut opinions: Vec<Vec<bool>> = vec![vec![true; n]; n];
    if round > 0 {
        for (validator, row) in opinions.iter_mut().enumerate() {
            let points: Vec<Vec<f64>> = state.lof_pools[validator]
                .iter()
                .flat_map(|round_points| round_points.iter().cloned())
                .collect();
            let detector = if points.len() >= 2 {
                let k = lof::default_k(points.len());
                let mut detector = LofModel::fit(points, k)?;
                detector.set_threshold(cfg.lof.threshold)?;
                Some(detector)
            } else {
                None
            };
            for (proposer, proposal) in proposals.iter().enumerate() {
                if proposer == validator {
                    continue;
                }
                let received = state.transfer(proposal, validator)?;
                row[proposer] = match &detector {
                    Some(detector) => lof::vet_weights(detector, &received)?,
                    None => true,
                };
            }
        }
    }

    // (6) one Snowball instance per proposal over the validators' initial
    // opinions. A single-validator network has nobody to poll; its own
    // opinion stands.
    let mut consensus_row = vec![false; n];
    let mut consensus_rounds = vec![0u32; n];
    for proposal in 0..n {
        let column: Vec<bool> = (0..n).map(|v| opinions[v][proposal]).collect();
        if n == 1 {
            consensus_row[proposal] = column[0];
            continue;
        }
        let params = ConsensusParams::new(
            n,
            cfg.consensus.quorum_k,
            cfg.consensus.alpha,
            cfg.consensus.beta,
            cfg.consensus.max_rounds,
            derive_seed(
                state.rep_seed,
                &[TAG_CONSENSUS, u64::from(round), proposal as u64],
            ),
        )?;
        let outcome = snowball::run_consensus(&column, &params)?;
        consensus_row[proposal] = outcome.decision;
        consensus_rounds[proposal] = outcome.rounds_used;
        if state.collect_traces {
            state.traces.push(TraceEvent {
                repetition: state.repetition,
                round: round + 1,
                proposal,
                records: outcome.trace,
            });
        }
    }

    // (7) opinions and the consensus row land on the ledger; the store
    // holds one key per validator plus one for the consensus row.
    let coordinator = state.coordinator.clone();
    state.ledger.setup(&coordinator, n + 1)?;
    let addresses = state.validator_addresses.clone();
    for (validator, (address, row)) in addresses.iter().zip(&opinions).enumerate() {
        state.ledger.set_opinion(address, validator, row.clone())?;
    }
    state
        .ledger
        .set_opinion(&coordinator, n, consensus_row.clone())?;
    if !state.ledger.verify_chain() {
        return Err(PipelineError::Internal(
            "ledger chain failed verification".into(),
        ));
    }

    // (8) the coordinator rebuilds the matrix from the ledger snapshot and
    // generates the global model.
    let snapshot = state.ledger.get_opinion(&coordinator)?;
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|v| {
            snapshot
                .get(&v)
                .cloned()
                .ok_or_else(|| PipelineError::Internal(format!("ledger row {v} missing")))
        })
        .collect::<Result<_, _>>()?;
    let ledger_consensus = snapshot
        .get(&n)
        .cloned()
        .ok_or_else(|| PipelineError::Internal("ledger consensus row missing".into()))?;
    let matrix = OpinionMatrix::new(rows, ledger_consensus)?;
    let trust_scores = trust::trust_vector(&matrix)?.scores().to_vec();

    let (path, influence) = match trust::generate_global_model(&proposals, &matrix, cfg.zeta) {
        Ok((generated, path)) => {
            state.global = generated;
            let influence = match path {
                GenerationPath::Influence => Some(
                    trust::compute_influence(&matrix, &matrix.accepted(), cfg.zeta)?
                        .values()
                        .to_vec(),
                ),
                GenerationPath::Consensus => None,
            };
            (RoundPath::from(path), influence)
        }
        Err(TrustError::Fallback) => (RoundPath::CarryForward, None),
        Err(other) => return Err(other.into()),
    };

    // (9) evaluate the defended model and advance the baseline.
    let accuracy_defended = model::evaluate(&state.global, &state.test_set)?.accuracy;
    let accuracy_baseline = state.baseline_step(cfg)?;

    state.round_index += 1;
    Ok(RoundReport {
        round: round + 1,
        repetition: state.repetition,
        accepted: matrix.accepted(),
        trust: trust_scores,
        influence,
        path,
        accuracy_defended,
        accuracy_baseline,
        consensus_rounds,
        ledger_root: state.ledger.root_hash().unwrap_or_default(),
    })
}

/// Runs the configured number of repetitions and rounds and summarizes
/// accuracy per round across repetitions.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, PipelineError> {
    run_experiment_with(cfg, false)
}

pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    collect_traces: bool,
) -> Result<ExperimentOutput, PipelineError> {
    cfg.validate()?;
    let mut reports = Vec::with_capacity((cfg.repetitions * cfg.rounds) as usize);
    let mut ledgers = Vec::with_capacity(cfg.repetitions as usize);
    let mut traces = Vec::new();
    for repetition in 0..cfg.repetitions {
        let mut state = ExperimentState::init(cfg, repetition)?;
        state.collect_traces(collect_traces);
        for _ in 0..cfg.rounds {
            reports.push(run_round(&mut state, cfg)?);
        }
        ledgers.push(state.ledger.entries().to_vec());
        traces.append(&mut state.traces);
    }
    let summary = summarize(&reports, cfg.rounds);
    Ok(ExperimentOutput {
        reports,
        summary,
        ledgers,
        traces,
    })
}

fn summarize(reports: &[RoundReport], rounds: u32) -> Vec<RoundSummary> {
    (1..=rounds)
        .map(|round| {
            let defended: Vec<f64> = reports
                .iter()
                .filter(|r| r.round == round)
                .map(|r| r.accuracy_defended)
                .collect();
            let baseline: Vec<f64> = reports
                .iter()
                .filter(|r| r.round == round)
                .map(|r| r.accuracy_baseline)
                .collect();
            RoundSummary {
                round,
                mean_defended: mean(&defended),
                std_defended: std_dev(&defended),
                mean_baseline: mean(&baseline),
                std_baseline: std_dev(&baseline),
            }
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 divisor); zero below two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Per-round test accuracy of plain FedAvg over all nodes, poisoned
/// updates included: the undefended comparison run on the same shards.
pub fn run_baseline(cfg: &ExperimentConfig, repetition: u32) -> Result<Vec<f64>, PipelineError> {
    cfg.validate()?;
    let mut state = ExperimentState::init(cfg, repetition)?;
    (0..cfg.rounds).map(|_| state.baseline_step(cfg)).collect()
}

/// Test accuracy of one model trained centrally on the clean training
/// split at an equal epoch budget (`epochs * rounds`).
pub fn centralized_accuracy(
    cfg: &ExperimentConfig,
    repetition: u32,
) -> Result<f64, PipelineError> {
    cfg.validate()?;
    let mut clean = cfg.clone();
    clean.attack.flip = 0;
    let state = ExperimentState::init(&clean, repetition)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for federation in &state.shards {
        for shard in federation {
            for (i, row) in shard.rows().enumerate() {
                rows.push(row.to_vec());
                labels.push(shard.label(i));
            }
        }
    }
    let train_set = Dataset::new("centralized-train", rows, labels)?;

    let mut train_cfg = cfg.train.clone();
    train_cfg.epochs = cfg.train.epochs.saturating_mul(cfg.rounds).max(1);
    let dim = train_set.n_features();
    let weights = model::train_local(&train_set, &WeightVector::zeros(dim), &train_cfg)?;
    Ok(model::evaluate(&weights, &state.test_set)?.accuracy)
}
