//! Datasets: synthetic generation, CSV loading, label-flip poisoning, and
//! IID partitioning into per-node shards.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dataset is empty")]
    Empty,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error: {0}")]
    Schema(String),
}

/// A binary-labelled dataset with a dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Vec<f64>,
    labels: Vec<u8>,
    n_features: usize,
}

impl Dataset {
    /// Builds a dataset from per-row feature vectors, validating that rows
    /// have uniform width and labels are binary.
    pub fn new(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for row in &rows {
            if row.len() != n_features {
                return Err(DataError::Dimension {
                    expected: n_features,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(name, features, n_features, labels)
    }

    /// Builds a dataset from an already-flat row-major feature buffer.
    pub fn from_flat(
        name: impl Into<String>,
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        if n_features == 0 {
            return Err(DataError::Config("feature count must be >= 1".into()));
        }
        if !features.len().is_multiple_of(n_features) {
            return Err(DataError::Dimension {
                expected: n_features,
                got: features.len() % n_features,
            });
        }
        let n_rows = features.len() / n_features;
        if n_rows != labels.len() {
            return Err(DataError::Schema(format!(
                "row count {n_rows} does not match label count {}",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(DataError::Schema(format!(
                "labels must be 0 or 1, found {bad}"
            )));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            n_features,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Copies the selected rows into a new dataset.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            name: name.into(),
            features,
            labels,
            n_features: self.n_features,
        }
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }
}

/// Parameters for the two-blob synthetic generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    /// Distance between the two class centroids.
    pub class_sep: f64,
    /// Fraction of samples assigned to class 1.
    pub imbalance_ratio: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n_samples < 2 {
            return Err(DataError::Config("n_samples must be >= 2".into()));
        }
        if self.n_features < 1 {
            return Err(DataError::Config("n_features must be >= 1".into()));
        }
        if !self.class_sep.is_finite() || self.class_sep < 0.0 {
            return Err(DataError::Config("class_sep must be finite and >= 0".into()));
        }
        if !(self.imbalance_ratio > 0.0 && self.imbalance_ratio < 1.0) {
            return Err(DataError::Config(
                "imbalance_ratio must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

/// Generates two unit-variance Gaussian blobs separated by `class_sep`
/// along a random direction. Deterministic per seed.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.n_features;

    let mut direction: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        direction.iter_mut().for_each(|x| *x /= norm);
    } else {
        direction[0] = 1.0;
    }

    let n = spec.n_samples;
    let n_positive = ((n as f64 * spec.imbalance_ratio).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<u8> = vec![1; n_positive];
    labels.resize(n, 0);
    labels.shuffle(&mut rng);

    let half = spec.class_sep / 2.0;
    let mut features = Vec::with_capacity(n * d);
    for &label in &labels {
        let sign = if label == 1 { half } else { -half };
        for &u in &direction {
            let noise: f64 = rng.sample(StandardNormal);
            features.push(sign * u + noise);
        }
    }
    Dataset::from_flat(format!("synthetic-{}", spec.seed), features, d, labels)
}

/// Attack knobs: how many validators hold poisoned federations and which
/// fraction of their labels (in tenths) is inverted.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    /// Number of validators whose federations train on flipped labels.
    pub flip: usize,
    /// Tenths of labels flipped in poisoned shards, in `[0, 8]`.
    pub proportion: u8,
    #[serde(default)]
    pub seed: u64,
}

impl AttackConfig {
    pub fn validate(&self, n_validators: usize) -> Result<(), DataError> {
        if self.flip > n_validators {
            return Err(DataError::Config(format!(
                "attack.flip ({}) exceeds the number of validators ({n_validators})",
                self.flip
            )));
        }
        if self.proportion > 8 {
            return Err(DataError::Config(format!(
                "attack.proportion ({}) must lie in [0, 8]",
                self.proportion
            )));
        }
        Ok(())
    }
}

/// Inverts exactly `round(n * proportion / 10)` labels, chosen uniformly
/// without replacement by the seeded generator. Features are untouched;
/// applying the same flip twice restores the original labels.
pub fn flip_labels(data: &Dataset, proportion: u8, seed: u64) -> Result<Dataset, DataError> {
    if proportion > 8 {
        return Err(DataError::Config(format!(
            "proportion ({proportion}) must lie in [0, 8]"
        )));
    }
    let n = data.n_samples();
    let count = (n * proportion as usize + 5) / 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flipped = data.clone();
    for idx in rand::seq::index::sample(&mut rng, n, count) {
        flipped.labels[idx] ^= 1;
    }
    Ok(flipped)
}

/// How non-numeric CSV columns are expanded into features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalEncoding {
    /// One indicator column per category, in first-appearance order.
    #[default]
    OneHot,
}

/// Loads a headered CSV file: numeric columns are min-max scaled to
/// `[0, 1]` (constant columns map to 0), other columns are one-hot
/// encoded, and the label column must contain only `0` and `1`.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    encoding: CategoricalEncoding,
) -> Result<Dataset, DataError> {
    let CategoricalEncoding::OneHot = encoding;
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::Schema(format!("label column '{label_column}' not found")))?;

    let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        if record.len() != headers.len() {
            return Err(DataError::Schema(format!(
                "row has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for (i, field) in record.iter().enumerate() {
            columns[i].push(field.trim().to_string());
        }
    }
    let n_rows = columns[label_idx].len();
    if n_rows == 0 {
        return Err(DataError::Schema("no data rows".into()));
    }

    let mut labels = Vec::with_capacity(n_rows);
    for value in &columns[label_idx] {
        match value.as_str() {
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => {
                return Err(DataError::Schema(format!(
                    "label column '{label_column}' must be binary, found '{other}'"
                )))
            }
        }
    }

    enum Encoded {
        Numeric(Vec<f64>),
        OneHot { categories: usize, codes: Vec<usize> },
    }
    let mut encoded = Vec::new();
    for (i, column) in columns.iter().enumerate() {
        if i == label_idx {
            continue;
        }
        let numeric: Option<Vec<f64>> = column
            .iter()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        match numeric {
            Some(values) => {
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let scaled = if max > min {
                    values.iter().map(|v| (v - min) / (max - min)).collect()
                } else {
                    vec![0.0; values.len()]
                };
                encoded.push(Encoded::Numeric(scaled));
            }
            None => {
                let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
                let mut order = Vec::new();
                let mut codes = Vec::with_capacity(column.len());
                for value in column {
                    let code = *seen.entry(value.as_str()).or_insert_with(|| {
                        order.push(value.clone());
                        order.len() - 1
                    });
                    codes.push(code);
                }
                encoded.push(Encoded::OneHot {
                    categories: order.len(),
                    codes,
                });
            }
        }
    }

    let width: usize = encoded
        .iter()
        .map(|e| match e {
            Encoded::Numeric(_) => 1,
            Encoded::OneHot { categories, .. } => *categories,
        })
        .sum();
    if width == 0 {
        return Err(DataError::Schema("no feature columns".into()));
    }

    let mut features = vec![0.0; n_rows * width];
    let mut offset = 0;
    for enc in &encoded {
        match enc {
            Encoded::Numeric(values) => {
                for (row, &v) in values.iter().enumerate() {
                    features[row * width + offset] = v;
                }
                offset += 1;
            }
            Encoded::OneHot { categories, codes } => {
                for (row, &code) in codes.iter().enumerate() {
                    features[row * width + offset + code] = 1.0;
                }
                offset += categories;
            }
        }
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::from_flat(name, features, width, labels)
}

fn csv_error(err: csv::Error) -> DataError {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => DataError::Io(io),
            other => DataError::Schema(format!("{other:?}")),
        }
    } else {
        DataError::Schema(err.to_string())
    }
}

/// Splits a dataset into `n_shards` disjoint IID shards whose sizes differ
/// by at most one. Shard order and contents are deterministic per seed.
pub fn partition_data(data: &Dataset, n_shards: usize, seed: u64) -> Result<Vec<Dataset>, DataError> {
    if n_shards == 0 {
        return Err(DataError::Config("shard count must be >= 1".into()));
    }
    if data.n_samples() < n_shards {
        return Err(DataError::Config(format!(
            "cannot split {} samples into {n_shards} shards",
            data.n_samples()
        )));
    }
    let mut indices: Vec<usize> = (0..data.n_samples()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let base = data.n_samples() / n_shards;
    let extra = data.n_samples() % n_shards;
    let mut shards = Vec::with_capacity(n_shards);
    let mut start = 0;
    for shard in 0..n_shards {
        let size = base + usize::from(shard < extra);
        let slice = &indices[start..start + size];
        shards.push(data.subset(slice, format!("{}-shard-{shard}", data.name())));
        start += size;
    }
    Ok(shards)
}
