//! Per-feature min-max normalization to [-1, 1].

use crate::data_pipeline::{Dataset, FEATURE_NAMES};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Affine per-feature map `x -> 2*(x - min)/(max - min) - 1` and its inverse.
///
/// A scaler fitted on the full sample schema also records
/// `il_zero_normalized`: the image of 0 dB under the label map, i.e. the
/// positivity threshold in normalized space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub feature_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub il_zero_normalized: Option<f64>,
}

impl MinMaxScaler {
    /// Fit per-feature extrema over generic rows. Rejects constant features.
    pub fn fit_rows(names: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset {
                name: "scaler input".to_string(),
            });
        }
        let d = names.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in rows {
            debug_assert_eq!(row.len(), d);
            for (j, &x) in row.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        for j in 0..d {
            if max[j].is_nan() || min[j].is_nan() || max[j] <= min[j] {
                return Err(Error::ConstantFeature {
                    feature: names[j].to_string(),
                    value: min[j],
                });
            }
        }
        Ok(MinMaxScaler {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            min,
            max,
            il_zero_normalized: None,
        })
    }

    /// Fit a symmetric range `[-m, m]` with `m = max |x|` per feature, so the
    /// transform reduces to the pure scale `x / m`. Positive normalized values
    /// then map to positive physical values, which is what the softplus branch
    /// head relies on.
    pub fn fit_symmetric_rows(names: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset {
                name: "scaler input".to_string(),
            });
        }
        let d = names.len();
        let mut m = vec![0.0f64; d];
        for row in rows {
            for (j, &x) in row.iter().enumerate() {
                m[j] = m[j].max(x.abs());
            }
        }
        for j in 0..d {
            if m[j] == 0.0 {
                return Err(Error::ConstantFeature {
                    feature: names[j].to_string(),
                    value: 0.0,
                });
            }
        }
        Ok(MinMaxScaler {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            min: m.iter().map(|&v| -v).collect(),
            max: m,
            il_zero_normalized: None,
        })
    }

    /// Fit over the canonical 9-feature schema (8 inputs + label) and record
    /// the normalized zero-dB threshold.
    pub fn fit_dataset(dataset: &Dataset) -> Result<Self> {
        let rows: Vec<Vec<f64>> = dataset
            .samples
            .iter()
            .map(|s| {
                let mut row = s.input_features().to_vec();
                row.push(s.insertion_loss_db);
                row
            })
            .collect();
        let mut scaler = Self::fit_rows(&FEATURE_NAMES, &rows)?;
        scaler.il_zero_normalized = Some(scaler.transform_at(FEATURE_NAMES.len() - 1, 0.0));
        Ok(scaler)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn transform_at(&self, j: usize, x: f64) -> f64 {
        2.0 * (x - self.min[j]) / (self.max[j] - self.min[j]) - 1.0
    }

    pub fn inverse_at(&self, j: usize, y: f64) -> f64 {
        self.min[j] + (y + 1.0) * (self.max[j] - self.min[j]) / 2.0
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.n_features());
        row.iter()
            .enumerate()
            .map(|(j, &x)| self.transform_at(j, x))
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.n_features());
        row.iter()
            .enumerate()
            .map(|(j, &y)| self.inverse_at(j, y))
            .collect()
    }

    /// Normalize the 8 model inputs of a sample. Only valid for the canonical
    /// 9-feature scaler.
    pub fn transform_inputs(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .enumerate()
            .map(|(j, &x)| self.transform_at(j, x))
            .collect()
    }

    /// Normalize an insertion-loss label (last feature).
    pub fn transform_label(&self, il_db: f64) -> f64 {
        self.transform_at(self.n_features() - 1, il_db)
    }

    /// Map a normalized prediction back to physical dB.
    pub fn inverse_label(&self, y: f64) -> f64 {
        self.inverse_at(self.n_features() - 1, y)
    }

    /// The positivity threshold in normalized label space.
    pub fn t0(&self) -> f64 {
        self.il_zero_normalized
            .unwrap_or_else(|| self.transform_at(self.n_features() - 1, 0.0))
    }

    /// True when this scaler was fitted on the canonical sample schema.
    pub fn matches_canonical_schema(&self) -> bool {
        self.feature_names.len() == FEATURE_NAMES.len()
            && self
                .feature_names
                .iter()
                .zip(FEATURE_NAMES.iter())
                .all(|(a, b)| a == b)
    }
}
