//! Federated averaging: sample-weighted aggregation of node updates,
//! influence-weighted combination of validator models, and the plain mean
//! of consensus-accepted weights.

use thiserror::Error;

use crate::model::WeightVector;

#[derive(Debug, Error)]
pub enum AggError {
    #[error("cannot aggregate an empty update set")]
    EmptyAggregation,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("all sample counts are zero")]
    ZeroMass,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
}

/// Weight vectors paired with nonnegative combination weights, at least one
/// of which is positive. Validated at construction.
#[derive(Debug, Clone)]
pub struct WeightedSet {
    entries: Vec<(WeightVector, f64)>,
}

impl WeightedSet {
    pub fn new(entries: Vec<(WeightVector, f64)>) -> Result<Self, AggError> {
        check_uniform_dim(entries.iter().map(|(w, _)| w))?;
        let mut total = 0.0;
        for (_, weight) in &entries {
            if !weight.is_finite() || *weight < 0.0 {
                return Err(AggError::InvalidWeight(format!(
                    "weights must be finite and >= 0, got {weight}"
                )));
            }
            total += weight;
        }
        if total <= 0.0 {
            return Err(AggError::InvalidWeight(
                "at least one weight must be > 0".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(WeightVector, f64)] {
        &self.entries
    }
}

fn check_uniform_dim<'a>(
    mut vectors: impl Iterator<Item = &'a WeightVector>,
) -> Result<usize, AggError> {
    let first = vectors.next().ok_or(AggError::EmptyAggregation)?;
    let dim = first.dim();
    for w in vectors {
        if w.dim() != dim {
            return Err(AggError::Dimension {
                expected: dim,
                got: w.dim(),
            });
        }
    }
    Ok(dim)
}

// Shared convex-combination core. Sums in entry order so results are
// reproducible run to run.
fn combine<'a>(
    entries: impl Iterator<Item = (&'a WeightVector, f64)> + Clone,
    dim: usize,
    total: f64,
) -> WeightVector {
    let mut coefficients = vec![0.0; dim];
    let mut intercept = 0.0;
    let mut sample_count = 0u64;
    for (vector, weight) in entries {
        let factor = weight / total;
        for (acc, c) in coefficients.iter_mut().zip(&vector.coefficients) {
            *acc += factor * c;
        }
        intercept += factor * vector.intercept;
        sample_count += vector.sample_count;
    }
    WeightVector {
        coefficients,
        intercept,
        sample_count,
    }
}

/// Averages updates weighted by the number of examples each one was
/// trained on. The result carries the combined sample count.
pub fn fedavg_by_samples(updates: &[WeightVector]) -> Result<WeightVector, AggError> {
    let dim = check_uniform_dim(updates.iter())?;
    let total: u64 = updates.iter().map(|w| w.sample_count).sum();
    if total == 0 {
        return Err(AggError::ZeroMass);
    }
    Ok(combine(
        updates.iter().map(|w| (w, w.sample_count as f64)),
        dim,
        total as f64,
    ))
}

/// Convex combination of the set's vectors after normalizing the weights
/// to sum to one.
pub fn weighted_average(set: &WeightedSet) -> WeightVector {
    let total: f64 = set.entries.iter().map(|(_, weight)| weight).sum();
    let dim = set.entries[0].0.dim();
    combine(set.entries.iter().map(|(w, weight)| (w, *weight)), dim, total)
}

/// Unweighted coordinate-wise mean of the accepted weight vectors.
pub fn mean_of_accepted(accepted: &[WeightVector]) -> Result<WeightVector, AggError> {
    let dim = check_uniform_dim(accepted.iter())?;
    Ok(combine(
        accepted.iter().map(|w| (w, 1.0)),
        dim,
        accepted.len() as f64,
    ))
}
