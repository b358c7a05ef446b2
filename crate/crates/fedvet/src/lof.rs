//! Local Outlier Factor novelty detection, implemented from scratch.
//!
//! Validators fit a model on the node updates they have seen and score
//! incoming weight proposals; a score above the threshold marks the
//! proposal as novel and triggers an initial "reject" opinion.

use thiserror::Error;

use crate::model::WeightVector;

#[derive(Debug, Error)]
pub enum LofError {
    #[error("need at least {needed} points for k={k}, got {got}")]
    InsufficientData { needed: usize, got: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Score above which a point counts as novel, unless overridden.
pub const DEFAULT_THRESHOLD: f64 = 1.5;

/// Default neighbour count for a training corpus of `n_points`.
pub fn default_k(n_points: usize) -> usize {
    n_points.saturating_sub(1).clamp(1, 5)
}

/// LOF score of a query point together with the threshold verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoveltyVerdict {
    pub score: f64,
    pub is_novel: bool,
}

/// A fitted LOF model: training points with precomputed k-distances and
/// local reachability densities. Immutable after fit; scoring is
/// reentrant.
#[derive(Debug, Clone)]
pub struct LofModel {
    points: Vec<Vec<f64>>,
    k: usize,
    threshold: f64,
    k_distances: Vec<f64>,
    lrd: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// k nearest candidates by (distance, index); ties break towards the lower
// index so results are reproducible.
fn k_nearest(distances: &[(f64, usize)], k: usize) -> Vec<(f64, usize)> {
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    sorted.truncate(k);
    sorted
}

// Local reachability density: inverse mean reachability distance to the
// k nearest neighbours. A zero sum (all duplicates) maps to +inf.
fn lrd_from(reach_sum: f64, k: usize) -> f64 {
    if reach_sum == 0.0 {
        f64::INFINITY
    } else {
        k as f64 / reach_sum
    }
}

// lrd(neighbor) / lrd(query) with inf/inf resolving to 1.
fn density_ratio(neighbor_lrd: f64, query_lrd: f64) -> f64 {
    if neighbor_lrd.is_infinite() && query_lrd.is_infinite() {
        1.0
    } else {
        neighbor_lrd / query_lrd
    }
}

impl LofModel {
    /// Fits a model on `points` with `k` neighbours and the default
    /// threshold. Requires at least `k + 1` points.
    pub fn fit(points: Vec<Vec<f64>>, k: usize) -> Result<Self, LofError> {
        if k < 1 {
            return Err(LofError::Config("k must be >= 1".into()));
        }
        if points.len() < k + 1 {
            return Err(LofError::InsufficientData {
                needed: k + 1,
                got: points.len(),
                k,
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(LofError::Config("points must have dimension >= 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(LofError::Dimension {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(LofError::Config("points must be finite".into()));
            }
        }

        let n = points.len();
        let mut k_distances = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            let distances: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(&points[i], &points[j]), j))
                .collect();
            let nearest = k_nearest(&distances, k);
            k_distances[i] = nearest[k - 1].0;
            neighbors[i] = nearest.into_iter().map(|(_, j)| j).collect();
        }

        let mut lrd = vec![0.0; n];
        for i in 0..n {
            let reach_sum: f64 = neighbors[i]
                .iter()
                .map(|&j| euclidean(&points[i], &points[j]).max(k_distances[j]))
                .sum();
            lrd[i] = lrd_from(reach_sum, k);
        }

        Ok(Self {
            points,
            k,
            threshold: DEFAULT_THRESHOLD,
            k_distances,
            lrd,
            neighbors,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Overrides the novelty threshold; must stay above 1 (infinity makes
    /// the model accept everything).
    pub fn set_threshold(&mut self, threshold: f64) -> Result<(), LofError> {
        if threshold.is_nan() || threshold <= 1.0 {
            return Err(LofError::Config("threshold must be > 1".into()));
        }
        self.threshold = threshold;
        Ok(())
    }

    /// LOF of each training point with respect to the other training
    /// points (each point's own entry is excluded from its neighbourhood).
    pub fn training_scores(&self) -> Vec<f64> {
        (0..self.points.len())
            .map(|i| {
                let ratio_sum: f64 = self.neighbors[i]
                    .iter()
                    .map(|&j| density_ratio(self.lrd[j], self.lrd[i]))
                    .sum();
                ratio_sum / self.k as f64
            })
            .collect()
    }

    /// Scores an unseen point: the mean ratio of its neighbours' local
    /// reachability densities to its own.
    pub fn score(&self, query: &[f64]) -> Result<NoveltyVerdict, LofError> {
        if query.len() != self.dim() {
            return Err(LofError::Dimension {
                expected: self.dim(),
                got: query.len(),
            });
        }
        let distances: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| (euclidean(query, p), j))
            .collect();
        let nearest = k_nearest(&distances, self.k);
        let reach_sum: f64 = nearest
            .iter()
            .map(|&(d, j)| d.max(self.k_distances[j]))
            .sum();
        let query_lrd = lrd_from(reach_sum, self.k);
        let ratio_sum: f64 = nearest
            .iter()
            .map(|&(_, j)| density_ratio(self.lrd[j], query_lrd))
            .sum();
        let score = ratio_sum / self.k as f64;
        Ok(NoveltyVerdict {
            score,
            is_novel: score > self.threshold,
        })
    }
}

/// Initial opinion on a proposed weight vector: accept iff not novel.
pub fn vet_weights(model: &LofModel, proposal: &WeightVector) -> Result<bool, LofError> {
    Ok(!model.score(&proposal.flatten())?.is_novel)
}
