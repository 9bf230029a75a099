use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::net::{Batch, Targets};
use crate::error::{GoaError, Result};

/// Labelled samples stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.nrows()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_columns(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    pub fn batch(&self, idx: &[usize]) -> Batch {
        Batch {
            inputs: self.features.select_columns(idx),
            targets: Targets::Labels(idx.iter().map(|&i| self.labels[i]).collect()),
        }
    }

    /// Shuffled `(train, validation)` split.
    pub fn split(&self, validation: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        if validation >= self.len() {
            return Err(GoaError::InvalidConfig(format!(
                "validation size {validation} leaves no training samples out of {}",
                self.len()
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (val, train) = idx.split_at(validation);
        Ok((self.subset(train), self.subset(val)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub classes: usize,
    pub per_class: usize,
    /// Standard deviation of each blob; centres sit on the unit circle.
    pub spread: f64,
    /// Input width after zero padding (≥ 2).
    pub width: usize,
    pub seed: u64,
}

/// Gaussian blobs in the plane, padded with zeros up to `width` features.
pub fn blobs(spec: &BlobSpec) -> Result<Dataset> {
    if spec.width < 2 || spec.classes == 0 || !(spec.spread.is_finite() && spec.spread > 0.0) {
        return Err(GoaError::InvalidConfig(format!("bad blob spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.classes * spec.per_class;
    let mut features = DMatrix::zeros(spec.width, total);
    let mut labels = Vec::with_capacity(total);
    for s in 0..total {
        let c = s % spec.classes;
        let angle = TAU * c as f64 / spec.classes as f64;
        features[(0, s)] = angle.cos() + spec.spread * rng.sample::<f64, _>(StandardNormal);
        features[(1, s)] = angle.sin() + spec.spread * rng.sample::<f64, _>(StandardNormal);
        labels.push(c);
    }
    Ok(Dataset {
        features,
        labels,
        classes: spec.classes,
    })
}

/// Reads `feature, …, feature, label` rows; a non-numeric first row is taken
/// as a header. Features are zero padded up to `width`.
pub fn load_csv(path: &Path, width: usize) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| GoaError::InvalidConfig(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| GoaError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(GoaError::InvalidConfig(format!(
                    "{}:{}: {e}",
                    path.display(),
                    line + 1
                )))
            }
        };
        let Some((&label, feats)) = values.split_last() else {
            continue;
        };
        if label < 0.0 || label.fract() != 0.0 {
            return Err(GoaError::InvalidConfig(format!(
                "{}:{}: label {label} is not a class index",
                path.display(),
                line + 1
            )));
        }
        if feats.len() > width || rows.first().is_some_and(|r| r.len() != feats.len()) {
            return Err(GoaError::InvalidConfig(format!(
                "{}:{}: expected {} features (at most {width})",
                path.display(),
                line + 1,
                rows.first().map_or(feats.len(), Vec::len)
            )));
        }
        rows.push(feats.to_vec());
        labels.push(label as usize);
    }
    if rows.is_empty() {
        return Err(GoaError::InvalidConfig(format!("{} has no samples", path.display())));
    }
    let features = DMatrix::from_fn(width, rows.len(), |i, j| rows[j].get(i).copied().unwrap_or(0.0));
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    Ok(Dataset {
        features,
        labels,
        classes,
    })
}
