//! Snowball binary consensus: repeated random quorum polling with a
//! consecutive-success counter, simulated in synchronous lock-step rounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum SnowballError {
    #[error("invalid consensus parameters: {0}")]
    Config(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

/// Parameters of one consensus instance: network size `n_nodes`, quorum
/// size `quorum_k`, majority threshold `alpha`, required consecutive
/// successes `beta`, and a safety valve on polling rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConsensusParams {
    pub n_nodes: usize,
    pub quorum_k: usize,
    pub alpha: u32,
    pub beta: u32,
    pub max_rounds: u32,
    pub seed: u64,
}

impl ConsensusParams {
    pub fn new(
        n_nodes: usize,
        quorum_k: usize,
        alpha: u32,
        beta: u32,
        max_rounds: u32,
        seed: u64,
    ) -> Result<Self, SnowballError> {
        if n_nodes < 2 {
            return Err(SnowballError::Config("n_nodes must be >= 2".into()));
        }
        if quorum_k < 1 || quorum_k > n_nodes - 1 {
            return Err(SnowballError::Config(format!(
                "quorum_k ({quorum_k}) must lie in [1, n_nodes - 1] = [1, {}]",
                n_nodes - 1
            )));
        }
        if alpha < 1 || alpha as usize > quorum_k {
            return Err(SnowballError::Config(format!(
                "alpha ({alpha}) must lie in [1, quorum_k] = [1, {quorum_k}]"
            )));
        }
        if beta < 1 {
            return Err(SnowballError::Config("beta must be >= 1".into()));
        }
        if max_rounds < 1 {
            return Err(SnowballError::Config("max_rounds must be >= 1".into()));
        }
        Ok(Self {
            n_nodes,
            quorum_k,
            alpha,
            beta,
            max_rounds,
            seed,
        })
    }
}

/// One node's Snowball state. `count` tracks consecutive quorum majorities
/// for `previous_decision` and never exceeds `beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnowballState {
    pub preference: bool,
    pub previous_decision: bool,
    pub count: u32,
    /// Vote tallies of the latest quorum: `[rejects, accepts]`.
    pub confidence_counter: [u32; 2],
    pub decided: bool,
    pub final_decision: Option<bool>,
}

/// Fresh undecided state holding the node's initial opinion.
pub fn init_state(initial_preference: bool) -> SnowballState {
    SnowballState {
        preference: initial_preference,
        previous_decision: initial_preference,
        count: 0,
        confidence_counter: [0, 0],
        decided: false,
        final_decision: None,
    }
}

/// Samples `quorum_k` distinct peer ids uniformly, excluding `self_id`.
pub fn sample_peers<R: Rng>(
    self_id: usize,
    params: &ConsensusParams,
    rng: &mut R,
) -> Result<Vec<usize>, SnowballError> {
    if self_id >= params.n_nodes {
        return Err(SnowballError::Config(format!(
            "self_id {self_id} out of range for n_nodes {}",
            params.n_nodes
        )));
    }
    let peers = rand::seq::index::sample(rng, params.n_nodes - 1, params.quorum_k)
        .into_iter()
        .map(|j| if j >= self_id { j + 1 } else { j })
        .collect();
    Ok(peers)
}

/// Applies one quorum of responses to an undecided state.
///
/// A quorum majority of at least `alpha` moves the preference to the
/// winning value; a repeat majority increments `count` while a flip
/// restarts it at 1 (the flipping round is the first success for the new
/// value). Reaching `beta` decides. Below `alpha`, `count` resets and the
/// preference is kept. Tied tallies favour reject.
pub fn step(
    state: &SnowballState,
    responses: &[bool],
    params: &ConsensusParams,
) -> Result<SnowballState, SnowballError> {
    if state.decided {
        return Err(SnowballError::Protocol(
            "cannot step a decided state".into(),
        ));
    }
    if responses.len() != params.quorum_k {
        return Err(SnowballError::Protocol(format!(
            "expected {} responses, got {}",
            params.quorum_k,
            responses.len()
        )));
    }

    let accepts = responses.iter().filter(|&&r| r).count() as u32;
    let rejects = params.quorum_k as u32 - accepts;
    let mut next = state.clone();
    next.confidence_counter = [rejects, accepts];

    let (max_votes, winner) = if accepts > rejects {
        (accepts, true)
    } else {
        (rejects, false)
    };

    if max_votes >= params.alpha {
        if winner == next.previous_decision {
            next.count += 1;
        } else {
            next.previous_decision = winner;
            next.count = 1;
        }
        next.preference = winner;
        if next.count >= params.beta {
            next.count = params.beta;
            next.decided = true;
            next.final_decision = Some(winner);
        }
    } else {
        next.count = 0;
    }
    Ok(next)
}

/// One polling event: who was asked, what they answered, and the node's
/// state right after applying the quorum.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub round: u32,
    pub node: usize,
    pub peers: Vec<usize>,
    pub responses: Vec<bool>,
    pub confidence_counter: [u32; 2],
    pub count: u32,
    pub preference: bool,
    pub decided: bool,
}

#[derive(Debug, Clone)]
pub struct ConsensusOutcome {
    pub decision: bool,
    pub rounds_used: u32,
    /// False when the safety valve fired and the decision is the majority
    /// of current preferences rather than a unanimous termination.
    pub converged: bool,
    pub node_decisions: Vec<Option<bool>>,
    pub trace: Vec<TraceRecord>,
}

fn majority(values: impl Iterator<Item = bool>, total: usize) -> bool {
    let accepts = values.filter(|&v| v).count();
    // exact tie favours reject
    accepts * 2 > total
}

/// Runs synchronous Snowball over all nodes until every node decides or
/// `max_rounds` elapses. Responses within a round are taken from the
/// states at the start of that round; each node draws peers from its own
/// seeded stream, so runs are deterministic and schedule-independent.
pub fn run_consensus(
    initial_opinions: &[bool],
    params: &ConsensusParams,
) -> Result<ConsensusOutcome, SnowballError> {
    if initial_opinions.len() != params.n_nodes {
        return Err(SnowballError::Config(format!(
            "expected {} initial opinions, got {}",
            params.n_nodes,
            initial_opinions.len()
        )));
    }

    let mut states: Vec<SnowballState> =
        initial_opinions.iter().map(|&o| init_state(o)).collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..params.n_nodes)
        .map(|node| ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[node as u64])))
        .collect();
    let mut trace = Vec::new();

    for round in 1..=params.max_rounds {
        let snapshot: Vec<bool> = states
            .iter()
            .map(|s| if s.decided { s.final_decision.unwrap() } else { s.preference })
            .collect();

        for node in 0..params.n_nodes {
            if states[node].decided {
                continue;
            }
            let peers = sample_peers(node, params, &mut rngs[node])?;
            let responses: Vec<bool> = peers.iter().map(|&p| snapshot[p]).collect();
            states[node] = step(&states[node], &responses, params)?;
            trace.push(TraceRecord {
                round,
                node,
                peers,
                responses,
                confidence_counter: states[node].confidence_counter,
                count: states[node].count,
                preference: states[node].preference,
                decided: states[node].decided,
            });
        }

        if states.iter().all(|s| s.decided) {
            let decision = majority(
                states.iter().map(|s| s.final_decision.unwrap()),
                params.n_nodes,
            );
            return Ok(ConsensusOutcome {
                decision,
                rounds_used: round,
                converged: true,
                node_decisions: states.iter().map(|s| s.final_decision).collect(),
                trace,
            });
        }
    }

    let decision = majority(states.iter().map(|s| s.preference), params.n_nodes);
    Ok(ConsensusOutcome {
        decision,
        rounds_used: params.max_rounds,
        converged: false,
        node_decisions: states.iter().map(|s| s.final_decision).collect(),
        trace,
    })
}
