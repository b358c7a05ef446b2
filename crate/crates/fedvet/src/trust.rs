//! Trust scores from ledger opinions, validator influence, and the
//! ζ-gated global model generation policy.
//!
//! Trust moves ±10 per position of agreement with the consensus row and is
//! floored at 1. When fewer than ζ proposals were accepted, the global
//! model falls back to an influence-weighted average over all proposals:
//! each accepted validator is granted 1/ζ, and the remaining pool is
//! shared in proportion to normalized trust.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::fedavg::{self, AggError, WeightedSet};
use crate::model::WeightVector;

#[derive(Debug, Error)]
pub enum TrustError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("no accepted weights and no influence path; carry the previous model forward")]
    Fallback,
    #[error("invalid opinion matrix: {0}")]
    Matrix(String),
    #[error(transparent)]
    Aggregation(#[from] AggError),
}

/// Per-validator opinion rows over the n proposals plus the consensus row,
/// all of length n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionMatrix {
    rows: Vec<Vec<bool>>,
    consensus_row: Vec<bool>,
}

impl OpinionMatrix {
    pub fn new(rows: Vec<Vec<bool>>, consensus_row: Vec<bool>) -> Result<Self, TrustError> {
        let n = rows.len();
        if n == 0 {
            return Err(TrustError::Matrix("matrix must have at least one row".into()));
        }
        if consensus_row.len() != n {
            return Err(TrustError::Matrix(format!(
                "consensus row length {} does not match validator count {n}",
                consensus_row.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(TrustError::Matrix(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
        }
        Ok(Self { rows, consensus_row })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.rows[i]
    }

    pub fn consensus_row(&self) -> &[bool] {
        &self.consensus_row
    }

    /// Indices of proposals the consensus accepted.
    pub fn accepted(&self) -> Vec<usize> {
        self.consensus_row
            .iter()
            .enumerate()
            .filter_map(|(i, &accepted)| accepted.then_some(i))
            .collect()
    }
}

/// Per-validator trust scores, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustVector(Vec<u32>);

impl TrustVector {
    pub fn scores(&self) -> &[u32] {
        &self.0
    }
}

/// Per-validator convex weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceVector(Vec<f64>);

impl InfluenceVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// The ζ policy: the minimum number of consensus-accepted proposals needed
/// to build the global model by plain averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyConfig {
    pub zeta: usize,
}

impl PolicyConfig {
    pub fn validate(&self, n_validators: usize) -> Result<(), TrustError> {
        if self.zeta > n_validators {
            return Err(TrustError::Policy(format!(
                "zeta ({}) must lie in [0, {n_validators}]",
                self.zeta
            )));
        }
        Ok(())
    }
}

/// +10 per position where the individual opinion matches the consensus
/// outcome, -10 per mismatch, floored at 1.
pub fn trust_calculation(
    final_opinion: &[bool],
    individual_opinion: &[bool],
) -> Result<u32, TrustError> {
    if final_opinion.len() != individual_opinion.len() {
        return Err(TrustError::Dimension {
            expected: final_opinion.len(),
            got: individual_opinion.len(),
        });
    }
    let mut score: i64 = 0;
    for (a, b) in final_opinion.iter().zip(individual_opinion) {
        score += if a == b { 10 } else { -10 };
    }
    Ok(score.max(1) as u32)
}

/// Every intermediate of the influence calculation, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceBreakdown {
    pub trust: Vec<u32>,
    /// Trust normalized to unit sum.
    pub normalized_trust: Vec<f64>,
    /// The 1/ζ grant given to each accepted validator.
    pub max_influence: f64,
    /// Each validator's share of the pool left after the grants.
    pub residual_share: Vec<f64>,
    /// Grant (where applicable) plus residual share; sums to 1.
    pub final_influence: Vec<f64>,
    pub accepted: Vec<usize>,
}

/// Computes trust and influence for every validator given the opinion
/// matrix, the set of accepted proposal indices, and ζ.
pub fn influence_breakdown(
    matrix: &OpinionMatrix,
    accepted: &[usize],
    zeta: usize,
) -> Result<InfluenceBreakdown, TrustError> {
    let n = matrix.n();
    if zeta == 0 {
        return Err(TrustError::Policy(
            "influence is undefined for zeta = 0".into(),
        ));
    }
    let accepted_set: BTreeSet<usize> = accepted.iter().copied().collect();
    if let Some(&bad) = accepted_set.iter().find(|&&i| i >= n) {
        return Err(TrustError::Policy(format!(
            "accepted index {bad} out of range for {n} proposals"
        )));
    }
    if accepted_set.len() > zeta {
        return Err(TrustError::Policy(format!(
            "{} accepted weights with zeta = {zeta} leaves a negative residual pool",
            accepted_set.len()
        )));
    }

    let trust: Vec<u32> = matrix
        .rows()
        .iter()
        .map(|row| trust_calculation(matrix.consensus_row(), row))
        .collect::<Result<_, _>>()?;
    let trust_total: f64 = trust.iter().map(|&t| f64::from(t)).sum();
    let normalized_trust: Vec<f64> =
        trust.iter().map(|&t| f64::from(t) / trust_total).collect();

    let max_influence = 1.0 / zeta as f64;
    let pool = (1.0 - accepted_set.len() as f64 * max_influence).max(0.0);
    let residual_share: Vec<f64> = normalized_trust.iter().map(|t| t * pool).collect();
    let final_influence: Vec<f64> = residual_share
        .iter()
        .enumerate()
        .map(|(i, share)| {
            share + if accepted_set.contains(&i) { max_influence } else { 0.0 }
        })
        .collect();

    Ok(InfluenceBreakdown {
        trust,
        normalized_trust,
        max_influence,
        residual_share,
        final_influence,
        accepted: accepted_set.into_iter().collect(),
    })
}

/// Final influence values only; see [`influence_breakdown`].
pub fn compute_influence(
    matrix: &OpinionMatrix,
    accepted: &[usize],
    zeta: usize,
) -> Result<InfluenceVector, TrustError> {
    Ok(InfluenceVector(
        influence_breakdown(matrix, accepted, zeta)?.final_influence,
    ))
}

/// Trust of every validator against the consensus row.
pub fn trust_vector(matrix: &OpinionMatrix) -> Result<TrustVector, TrustError> {
    let scores = matrix
        .rows()
        .iter()
        .map(|row| trust_calculation(matrix.consensus_row(), row))
        .collect::<Result<_, _>>()?;
    Ok(TrustVector(scores))
}

/// Which rule produced the global model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationPath {
    /// Unweighted mean of the consensus-accepted proposals.
    Consensus,
    /// Influence-weighted average of all proposals.
    Influence,
}

/// Builds the global model: plain averaging of the accepted proposals when
/// at least ζ were accepted, influence weighting over all proposals
/// otherwise. With ζ = 0 and nothing accepted there is nothing to average
/// and the caller must carry the previous model forward.
pub fn generate_global_model(
    proposals: &[WeightVector],
    matrix: &OpinionMatrix,
    zeta: usize,
) -> Result<(WeightVector, GenerationPath), TrustError> {
    if proposals.len() != matrix.n() {
        return Err(TrustError::Matrix(format!(
            "{} proposals but matrix covers {}",
            proposals.len(),
            matrix.n()
        )));
    }
    let accepted = matrix.accepted();
    if accepted.len() >= zeta {
        if accepted.is_empty() {
            return Err(TrustError::Fallback);
        }
        let selected: Vec<WeightVector> =
            accepted.iter().map(|&i| proposals[i].clone()).collect();
        let model = fedavg::mean_of_accepted(&selected)?;
        Ok((model, GenerationPath::Consensus))
    } else {
        let influence = compute_influence(matrix, &accepted, zeta)?;
        let set = WeightedSet::new(
            proposals
                .iter()
                .cloned()
                .zip(influence.values().iter().copied())
                .collect(),
        )?;
        Ok((fedavg::weighted_average(&set), GenerationPath::Influence))
    }
}
