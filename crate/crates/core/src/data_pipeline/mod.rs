//! Dataset schema, normalization, splits, curve grouping, and synthetic data.
//!
//! The schema is a flat table: seven geometric/material design parameters plus
//! a frequency form the input, insertion loss in dB is the label. Ground-truth
//! insertion loss is physically non-negative, and the loader enforces that.

mod csv_io;
mod scaler;
mod synthetic;

pub use csv_io::{load_csv, save_csv};
pub use scaler::MinMaxScaler;
pub use synthetic::{
    generate_synthetic, generate_synthetic_with, ground_truth_il, LossModelConstants,
    SyntheticConfig, PARAM_RANGES,
};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Canonical column names, in CSV order: 8 inputs then the label.
pub const FEATURE_NAMES: [&str; 9] = [
    "via_pitch_mm",
    "via_radius_mm",
    "antipad_radius_mm",
    "cavity_height_mm",
    "trace_length_mm",
    "permittivity",
    "loss_tangent",
    "frequency_ghz",
    "insertion_loss_db",
];

/// Number of model inputs (design parameters + frequency).
pub const N_INPUTS: usize = 8;

/// The seven geometric/material parameters describing one interconnect design.
///
/// Lengths are in millimetres; permittivity and loss tangent are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub via_pitch_mm: f64,
    pub via_radius_mm: f64,
    pub antipad_radius_mm: f64,
    pub cavity_height_mm: f64,
    pub trace_length_mm: f64,
    pub permittivity: f64,
    pub loss_tangent: f64,
}

impl DesignParams {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.via_pitch_mm,
            self.via_radius_mm,
            self.antipad_radius_mm,
            self.cavity_height_mm,
            self.trace_length_mm,
            self.permittivity,
            self.loss_tangent,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        DesignParams {
            via_pitch_mm: a[0],
            via_radius_mm: a[1],
            antipad_radius_mm: a[2],
            cavity_height_mm: a[3],
            trace_length_mm: a[4],
            permittivity: a[5],
            loss_tangent: a[6],
        }
    }

    /// Check the physical invariants: lengths > 0, permittivity >= 1,
    /// loss tangent >= 0, everything finite.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64, &str, bool); 7] = [
            (
                "via_pitch_mm",
                self.via_pitch_mm,
                "> 0",
                self.via_pitch_mm > 0.0,
            ),
            (
                "via_radius_mm",
                self.via_radius_mm,
                "> 0",
                self.via_radius_mm > 0.0,
            ),
            (
                "antipad_radius_mm",
                self.antipad_radius_mm,
                "> 0",
                self.antipad_radius_mm > 0.0,
            ),
            (
                "cavity_height_mm",
                self.cavity_height_mm,
                "> 0",
                self.cavity_height_mm > 0.0,
            ),
            (
                "trace_length_mm",
                self.trace_length_mm,
                "> 0",
                self.trace_length_mm > 0.0,
            ),
            (
                "permittivity",
                self.permittivity,
                ">= 1",
                self.permittivity >= 1.0,
            ),
            (
                "loss_tangent",
                self.loss_tangent,
                ">= 0",
                self.loss_tangent >= 0.0,
            ),
        ];
        for (name, value, constraint, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::InvalidValue {
                    row: 0,
                    column: name.to_string(),
                    value,
                    constraint: constraint.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Exact-bit grouping key. The dataset is a grid sweep, so identical
    /// designs repeat bit-for-bit across frequency rows.
    fn bit_key(&self) -> [u64; 7] {
        let a = self.as_array();
        [
            a[0].to_bits(),
            a[1].to_bits(),
            a[2].to_bits(),
            a[3].to_bits(),
            a[4].to_bits(),
            a[5].to_bits(),
            a[6].to_bits(),
        ]
    }
}

/// One labeled row: a design, a frequency, and the measured insertion loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub params: DesignParams,
    pub frequency_ghz: f64,
    pub insertion_loss_db: f64,
}

impl Sample {
    /// The 8 model inputs in canonical column order.
    pub fn input_features(&self) -> [f64; N_INPUTS] {
        let p = self.params.as_array();
        [p[0], p[1], p[2], p[3], p[4], p[5], p[6], self.frequency_ghz]
    }
}

/// An ordered, non-empty collection of samples sharing the canonical schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        let name = name.into();
        if samples.is_empty() {
            return Err(Error::EmptyDataset { name });
        }
        Ok(Dataset { name, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Deterministic train/test split specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of rows assigned to the training set, in (0, 1).
    pub train_fraction: f64,
    pub seed: u64,
}

/// Split a dataset into disjoint train/test parts by a seeded uniform shuffle
/// followed by a prefix cut. `|train| = round(fraction * N)`; row order within
/// each part follows the original dataset order.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if spec.train_fraction.is_nan() || spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let n = dataset.len();
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    if n_train == 0 {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {} of {n} rows leaves an empty training set",
            spec.train_fraction
        )));
    }
    if n_train == n {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {} of {n} rows leaves an empty test set",
            spec.train_fraction
        )));
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(spec.seed);
    rng.shuffle(&mut indices);

    let mut train_idx: Vec<usize> = indices[..n_train].to_vec();
    let mut test_idx: Vec<usize> = indices[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.samples[i]).collect::<Vec<_>>();
    Ok((
        Dataset::new(format!("{}[train]", dataset.name), pick(&train_idx))?,
        Dataset::new(format!("{}[test]", dataset.name), pick(&test_idx))?,
    ))
}

/// A per-design frequency sweep: `points` are `(frequency_ghz, insertion_loss_db)`
/// sorted by strictly increasing frequency, at least 4 of them.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGroup {
    pub params: DesignParams,
    pub points: Vec<(f64, f64)>,
}

/// A design that could not form a usable curve, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedGroup {
    pub params: DesignParams,
    pub n_points: usize,
    pub reason: String,
}

/// Result of [`group_curves`]: usable sweeps plus exclusion warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGrouping {
    pub groups: Vec<CurveGroup>,
    pub excluded: Vec<ExcludedGroup>,
}

/// Group rows with bit-identical design parameters into frequency sweeps.
///
/// Groups with fewer than 4 points (a cubic fit needs over-determination) or
/// duplicated frequencies are excluded and reported, never an error. Output
/// order is independent of input row order.
pub fn group_curves(dataset: &Dataset) -> CurveGrouping {
    type PendingGroup = (DesignParams, Vec<(f64, f64)>);
    let mut by_design: BTreeMap<[u64; 7], PendingGroup> = BTreeMap::new();
    for s in &dataset.samples {
        by_design
            .entry(s.params.bit_key())
            .or_insert_with(|| (s.params, Vec::new()))
            .1
            .push((s.frequency_ghz, s.insertion_loss_db));
    }

    let mut groups = Vec::new();
    let mut excluded = Vec::new();
    for (_, (params, mut points)) in by_design {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.len() < 4 {
            excluded.push(ExcludedGroup {
                params,
                n_points: points.len(),
                reason: format!("{} point(s), need at least 4 for a cubic fit", points.len()),
            });
            continue;
        }
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            excluded.push(ExcludedGroup {
                params,
                n_points: points.len(),
                reason: "duplicate frequency within the sweep".to_string(),
            });
            continue;
        }
        groups.push(CurveGroup { params, points });
    }
    CurveGrouping { groups, excluded }
}
