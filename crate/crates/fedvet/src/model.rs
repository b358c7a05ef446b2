//! Linear classifiers trained by full-batch gradient descent, plus
//! evaluation metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyData,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Flat model parameters exchanged between roles.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Number of training examples behind this vector; drives
    /// sample-weighted federated averaging.
    pub sample_count: u64,
}

impl WeightVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            coefficients: vec![0.0; dim],
            intercept: 0.0,
            sample_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficients followed by the intercept, as one flat vector.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = self.coefficients.clone();
        flat.push(self.intercept);
        flat
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.coefficients.iter().all(|c| c.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    LogisticRegression,
    SgdHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    #[default]
    Uniform,
    /// Per-class example weights inversely proportional to class frequency:
    /// `weight(c) = n / (2 * count(c))`.
    Balanced,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    #[serde(default)]
    pub l2_penalty: f64,
    #[serde(default)]
    pub class_weighting: ClassWeighting,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model_kind: ModelKind,
}

impl TrainConfig {
    pub fn new(
        learning_rate: f64,
        epochs: u32,
        l2_penalty: f64,
        class_weighting: ClassWeighting,
        seed: u64,
        model_kind: ModelKind,
    ) -> Result<Self, ModelError> {
        let cfg = Self {
            learning_rate,
            epochs,
            l2_penalty,
            class_weighting,
            seed,
            model_kind,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::Config("learning_rate must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(ModelError::Config("epochs must be >= 1".into()));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(ModelError::Config("l2_penalty must be >= 0".into()));
        }
        Ok(())
    }
}

/// Accuracy plus per-class recall (`None` when a class is absent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub recall: [Option<f64>; 2],
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn decision_value(weights: &WeightVector, row: &[f64]) -> f64 {
    weights
        .coefficients
        .iter()
        .zip(row)
        .map(|(w, x)| w * x)
        .sum::<f64>()
        + weights.intercept
}

pub fn predict(weights: &WeightVector, row: &[f64]) -> u8 {
    u8::from(decision_value(weights, row) > 0.0)
}

fn class_weights(data: &Dataset, weighting: ClassWeighting) -> [f64; 2] {
    match weighting {
        ClassWeighting::Uniform => [1.0, 1.0],
        ClassWeighting::Balanced => {
            let counts = data.class_counts();
            let n = data.n_samples() as f64;
            let weight = |count: usize| {
                if count == 0 {
                    0.0
                } else {
                    n / (2.0 * count as f64)
                }
            };
            [weight(counts[0]), weight(counts[1])]
        }
    }
}

fn check_dims(data: &Dataset, weights: &WeightVector) -> Result<(), ModelError> {
    if weights.dim() != data.n_features() {
        return Err(ModelError::Dimension {
            expected: data.n_features(),
            got: weights.dim(),
        });
    }
    Ok(())
}

/// Trains the configured linear model by full-batch gradient descent,
/// starting from `init`. Deterministic: the same inputs always produce the
/// same weights.
pub fn train_local(
    data: &Dataset,
    init: &WeightVector,
    cfg: &TrainConfig,
) -> Result<WeightVector, ModelError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    check_dims(data, init)?;

    let n = data.n_samples() as f64;
    let d = data.n_features();
    let cw = class_weights(data, cfg.class_weighting);
    let mut coef = init.coefficients.clone();
    let mut intercept = init.intercept;

    for _ in 0..cfg.epochs {
        let mut grad = vec![0.0; d];
        let mut grad_b = 0.0;
        for (i, row) in data.rows().enumerate() {
            let label = data.label(i);
            let weight = cw[label as usize];
            let z = coef.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
            let err = match cfg.model_kind {
                ModelKind::LogisticRegression => weight * (sigmoid(z) - f64::from(label)),
                ModelKind::SgdHinge => {
                    let y = 2.0 * f64::from(label) - 1.0;
                    if y * z < 1.0 {
                        -weight * y
                    } else {
                        0.0
                    }
                }
            };
            for (g, x) in grad.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        for (w, g) in coef.iter_mut().zip(&grad) {
            *w -= cfg.learning_rate * (g / n + cfg.l2_penalty * *w);
        }
        intercept -= cfg.learning_rate * grad_b / n;
    }

    Ok(WeightVector {
        coefficients: coef,
        intercept,
        sample_count: data.n_samples() as u64,
    })
}

/// The objective minimized by [`train_local`], including class weights and
/// the L2 term. Exposed so callers can check training progress.
pub fn training_loss(
    weights: &WeightVector,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<f64, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    check_dims(data, weights)?;
    let cw = class_weights(data, cfg.class_weighting);
    let mut total = 0.0;
    for (i, row) in data.rows().enumerate() {
        let label = data.label(i);
        let weight = cw[label as usize];
        let z = decision_value(weights, row);
        total += match cfg.model_kind {
            ModelKind::LogisticRegression => {
                // log(1 + e^-|z|) form avoids overflow
                weight * (z.max(0.0) - z * f64::from(label) + (-z.abs()).exp().ln_1p())
            }
            ModelKind::SgdHinge => {
                let y = 2.0 * f64::from(label) - 1.0;
                weight * (1.0 - y * z).max(0.0)
            }
        };
    }
    let l2 = 0.5 * cfg.l2_penalty * weights.coefficients.iter().map(|w| w * w).sum::<f64>();
    Ok(total / data.n_samples() as f64 + l2)
}

/// Computes accuracy and per-class recall of `weights` on `data`.
pub fn evaluate(weights: &WeightVector, data: &Dataset) -> Result<Metrics, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    check_dims(data, weights)?;
    let mut correct = 0usize;
    let mut per_class_correct = [0usize; 2];
    let counts = data.class_counts();
    for (i, row) in data.rows().enumerate() {
        let label = data.label(i);
        if predict(weights, row) == label {
            correct += 1;
            per_class_correct[label as usize] += 1;
        }
    }
    let recall = |class: usize| {
        (counts[class] > 0).then(|| per_class_correct[class] as f64 / counts[class] as f64)
    };
    Ok(Metrics {
        accuracy: correct as f64 / data.n_samples() as f64,
        recall: [recall(0), recall(1)],
    })
}
