//! Metrics and the three-way comparison harness.
//!
//! MSE is reported in normalized label space; the positivity audit runs on
//! physical-dB predictions with a strict 0 dB threshold, so it does not
//! depend on how the labels were rescaled. Inference is timed around the
//! prediction loop only.

use crate::data_pipeline::{
    CurveGroup, Dataset, DesignParams, MinMaxScaler, Sample, FEATURE_NAMES,
};
use crate::deeponet::PDeepONetModel;
use crate::error::{Error, Result};
use crate::neural_net::MlpModel;
use crate::physics_loss;
use crate::polynomial::eval_poly;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which of the three compared methods produced a model or report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodTag {
    Nn,
    Pdnn,
    Pdeeponet,
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MethodTag::Nn => write!(f, "nn"),
            MethodTag::Pdnn => write!(f, "pdnn"),
            MethodTag::Pdeeponet => write!(f, "pdeeponet"),
        }
    }
}

impl std::str::FromStr for MethodTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(MethodTag::Nn),
            "pdnn" => Ok(MethodTag::Pdnn),
            "pdeeponet" => Ok(MethodTag::Pdeeponet),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// A wall-clock duration that is either one measurement or a two-stage pair
/// (coefficient fitting + network training, or branch pass + trunk pass).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeBreakdown {
    Single(f64),
    TwoPart { stage1_s: f64, stage2_s: f64 },
}

impl TimeBreakdown {
    pub fn total(&self) -> f64 {
        match self {
            TimeBreakdown::Single(s) => *s,
            TimeBreakdown::TwoPart { stage1_s, stage2_s } => stage1_s + stage2_s,
        }
    }

    /// Human rendering: plain seconds, or `x+y = z` for two-part times.
    pub fn render(&self) -> String {
        match self {
            TimeBreakdown::Single(s) => fmt_seconds(*s),
            TimeBreakdown::TwoPart { stage1_s, stage2_s } => format!(
                "{}+{} = {}",
                fmt_seconds(*stage1_s),
                fmt_seconds(*stage2_s),
                fmt_seconds(stage1_s + stage2_s)
            ),
        }
    }

    /// CSV cell: full-precision seconds, `x+y` for two-part times.
    pub fn to_csv_cell(&self) -> String {
        match self {
            TimeBreakdown::Single(s) => format!("{s}"),
            TimeBreakdown::TwoPart { stage1_s, stage2_s } => format!("{stage1_s}+{stage2_s}"),
        }
    }

    pub fn parse_csv_cell(cell: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse time cell `{cell}`"));
        if let Some((a, b)) = cell.split_once('+') {
            Ok(TimeBreakdown::TwoPart {
                stage1_s: a.parse().map_err(|_| bad())?,
                stage2_s: b.parse().map_err(|_| bad())?,
            })
        } else {
            Ok(TimeBreakdown::Single(cell.parse().map_err(|_| bad())?))
        }
    }
}

/// Format seconds for tables: three decimals, trailing zeros trimmed.
fn fmt_seconds(s: f64) -> String {
    let mut out = format!("{s:.3}");
    while out.contains('.') && out.ends_with('0') {
        out.pop();
    }
    if out.ends_with('.') {
        out.pop();
    }
    out
}

/// One method's accuracy, speed, and positivity audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default = "report_schema")]
    pub schema: String,
    pub method: MethodTag,
    /// Normalized-space MSE on the training split.
    pub train_mse: f64,
    /// Normalized-space MSE on the test split.
    pub test_mse: f64,
    pub train_time_s: TimeBreakdown,
    pub infer_time_s: TimeBreakdown,
    /// Test predictions strictly below 0 dB.
    pub n_negative: u64,
    pub n_test_evaluations: u64,
    pub negative_rate: f64,
    /// Smallest physical prediction on the test split, in dB.
    pub min_prediction_db: f64,
    /// Physical-space RMSE on the test split, in dB.
    pub test_rmse_db: f64,
}

fn report_schema() -> String {
    "evalreport/1".to_string()
}

impl EvalReport {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("report serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let report: EvalReport = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
            path: path.to_path_buf(),
            detail: format!("not an evaluation report: {e}"),
        })?;
        if report.schema != report_schema() {
            return Err(Error::ModelFormat {
                path: path.to_path_buf(),
                detail: format!("unsupported report schema `{}`", report.schema),
            });
        }
        Ok(report)
    }
}

/// Anything that predicts physical insertion loss for a (design, frequency).
pub trait Surrogate {
    fn method(&self) -> MethodTag;

    fn predict_db(&self, params: &DesignParams, frequency_ghz: f64) -> Result<f64>;

    /// Predict a whole sample slice, returning per-sample dB and the measured
    /// wall time. Two-pass models override this to report a split time.
    fn predict_batch_timed(&self, samples: &[Sample]) -> Result<(Vec<f64>, TimeBreakdown)> {
        let started = Instant::now();
        let mut out = Vec::with_capacity(samples.len());
        for s in samples {
            out.push(self.predict_db(&s.params, s.frequency_ghz)?);
        }
        Ok((out, TimeBreakdown::Single(started.elapsed().as_secs_f64())))
    }
}

/// A trained dense network plus the scaler that defined its normalized space.
#[derive(Debug, Clone)]
pub struct MlpSurrogate {
    pub model: MlpModel,
    pub scaler: MinMaxScaler,
    pub method: MethodTag,
}

impl Surrogate for MlpSurrogate {
    fn method(&self) -> MethodTag {
        self.method
    }

    fn predict_db(&self, params: &DesignParams, frequency_ghz: f64) -> Result<f64> {
        let p = params.as_array();
        let features = [p[0], p[1], p[2], p[3], p[4], p[5], p[6], frequency_ghz];
        let normalized = self.scaler.transform_inputs(&features);
        let out = self.model.predict(&normalized)?;
        Ok(self.scaler.inverse_label(out[0]))
    }
}

impl Surrogate for PDeepONetModel {
    fn method(&self) -> MethodTag {
        MethodTag::Pdeeponet
    }

    fn predict_db(&self, params: &DesignParams, frequency_ghz: f64) -> Result<f64> {
        self.predict(params, frequency_ghz)
    }

    /// Two passes, timed separately: branch coefficients, then trunk
    /// evaluation -- the analog of the table's two-part inference time.
    fn predict_batch_timed(&self, samples: &[Sample]) -> Result<(Vec<f64>, TimeBreakdown)> {
        let branch_started = Instant::now();
        let mut coeffs = Vec::with_capacity(samples.len());
        for s in samples {
            coeffs.push(self.coefficients(&s.params)?);
        }
        let stage1_s = branch_started.elapsed().as_secs_f64();

        let trunk_started = Instant::now();
        let mut out = Vec::with_capacity(samples.len());
        for (s, c) in samples.iter().zip(&coeffs) {
            if s.frequency_ghz < 0.0 {
                return Err(Error::NegativeFrequency(s.frequency_ghz));
            }
            out.push(eval_poly(c, s.frequency_ghz));
        }
        let stage2_s = trunk_started.elapsed().as_secs_f64();
        Ok((out, TimeBreakdown::TwoPart { stage1_s, stage2_s }))
    }
}

/// Evaluate a trained model on a train/test pair.
///
/// The scaler must be the training-time scaler over the canonical schema;
/// a mismatch is refused rather than silently rescaled.
pub fn evaluate(
    model: &dyn Surrogate,
    scaler: &MinMaxScaler,
    train: &Dataset,
    test: &Dataset,
    train_time_s: TimeBreakdown,
) -> Result<EvalReport> {
    if !scaler.matches_canonical_schema() {
        return Err(Error::ScalerMismatch {
            expected: FEATURE_NAMES.join(","),
            found: scaler.feature_names.join(","),
        });
    }

    let normalized_mse = |preds_db: &[f64], data: &Dataset| -> Result<f64> {
        let p: Vec<f64> = preds_db
            .iter()
            .map(|&v| scaler.transform_label(v))
            .collect();
        let t: Vec<f64> = data
            .samples
            .iter()
            .map(|s| scaler.transform_label(s.insertion_loss_db))
            .collect();
        physics_loss::mse(&p, &t)
    };

    let (train_preds, _) = model.predict_batch_timed(&train.samples)?;
    let train_mse = normalized_mse(&train_preds, train)?;

    let (test_preds, infer_time_s) = model.predict_batch_timed(&test.samples)?;
    let test_mse = normalized_mse(&test_preds, test)?;

    let n_negative = test_preds.iter().filter(|&&p| p < 0.0).count() as u64;
    let min_prediction_db = test_preds.iter().copied().fold(f64::INFINITY, f64::min);
    let sq_err_db: f64 = test_preds
        .iter()
        .zip(&test.samples)
        .map(|(&p, s)| (p - s.insertion_loss_db) * (p - s.insertion_loss_db))
        .sum();
    let n_test = test.samples.len() as u64;

    Ok(EvalReport {
        schema: report_schema(),
        method: model.method(),
        train_mse,
        test_mse,
        train_time_s,
        infer_time_s,
        n_negative,
        n_test_evaluations: n_test,
        negative_rate: n_negative as f64 / n_test as f64,
        min_prediction_db,
        test_rmse_db: (sq_err_db / n_test as f64).sqrt(),
    })
}

/// Fixed header of the comparison CSV.
pub const COMPARISON_CSV_HEADER: &str =
    "method,train_mse,train_time_s,test_mse,infer_time_s,n_negative,negative_rate,min_prediction_db";

/// The comparison table: reports ordered nn, pdnn, pdeeponet.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reports: Vec<EvalReport>,
}

/// One parsed row of the comparison CSV (the CSV carries a subset of the
/// full report, so parsing recovers rows, not complete reports).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: MethodTag,
    pub train_mse: f64,
    pub train_time_s: TimeBreakdown,
    pub test_mse: f64,
    pub infer_time_s: TimeBreakdown,
    pub n_negative: u64,
    pub negative_rate: f64,
    pub min_prediction_db: f64,
}

impl EvalReport {
    pub fn to_row(&self) -> ComparisonRow {
        ComparisonRow {
            method: self.method,
            train_mse: self.train_mse,
            train_time_s: self.train_time_s,
            test_mse: self.test_mse,
            infer_time_s: self.infer_time_s,
            n_negative: self.n_negative,
            negative_rate: self.negative_rate,
            min_prediction_db: self.min_prediction_db,
        }
    }
}

/// Build the comparison, ordering rows nn, pdnn, pdeeponet.
pub fn compare(mut reports: Vec<EvalReport>) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(Error::InvalidConfig(
            "compare needs at least one report".to_string(),
        ));
    }
    reports.sort_by_key(|r| r.method);
    Ok(Comparison { reports })
}

impl Comparison {
    /// Aligned text table in the layout of the published comparison:
    /// method, train MSE, train time, test MSE, test (inference) time,
    /// then the positivity audit columns.
    pub fn render_text(&self) -> String {
        let mut rows = vec![vec![
            "method".to_string(),
            "train_mse".to_string(),
            "train_time_s".to_string(),
            "test_mse".to_string(),
            "infer_time_s".to_string(),
            "n_negative".to_string(),
            "negative_rate".to_string(),
            "min_prediction_db".to_string(),
        ]];
        for r in &self.reports {
            rows.push(vec![
                r.method.to_string(),
                format!("{:.4}", r.train_mse),
                r.train_time_s.render(),
                format!("{:.4}", r.test_mse),
                r.infer_time_s.render(),
                r.n_negative.to_string(),
                format!("{:.4}", r.negative_rate),
                format!("{:.4}", r.min_prediction_db),
            ]);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap())
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Full-precision CSV under the fixed header; two-part times as `x+y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARISON_CSV_HEADER);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.method,
                r.train_mse,
                r.train_time_s.to_csv_cell(),
                r.test_mse,
                r.infer_time_s.to_csv_cell(),
                r.n_negative,
                r.negative_rate,
                r.min_prediction_db
            ));
        }
        out
    }

    /// Parse a comparison CSV back into rows; numeric fields round-trip at
    /// full double precision.
    pub fn from_csv(text: &str) -> Result<Vec<ComparisonRow>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == COMPARISON_CSV_HEADER => {}
            other => {
                return Err(Error::InvalidConfig(format!(
                    "bad comparison header: {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(Error::InvalidConfig(format!(
                    "comparison row {} has {} fields, expected 8",
                    i + 1,
                    cells.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad number `{s}`")))
            };
            rows.push(ComparisonRow {
                method: cells[0].parse()?,
                train_mse: num(cells[1])?,
                train_time_s: TimeBreakdown::parse_csv_cell(cells[2])?,
                test_mse: num(cells[3])?,
                infer_time_s: TimeBreakdown::parse_csv_cell(cells[4])?,
                n_negative: cells[5]
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad count `{}`", cells[5])))?,
                negative_rate: num(cells[6])?,
                min_prediction_db: num(cells[7])?,
            });
        }
        Ok(rows)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Envelope<'a> {
            schema: &'static str,
            reports: &'a [EvalReport],
        }
        let mut json = serde_json::to_string_pretty(&Envelope {
            schema: "evalcompare/1",
            reports: &self.reports,
        })
        .expect("comparison serializes");
        json.push('\n');
        json
    }
}

/// Per-frequency prediction profile as CSV, with optional ground truth and a
/// violation flag (prediction below 0 dB). Enough to redraw the comparison
/// figures externally.
pub fn frequency_profile(
    model: &dyn Surrogate,
    design: &DesignParams,
    frequencies: &[f64],
    truth: Option<&CurveGroup>,
) -> Result<String> {
    let mut out = String::new();
    if truth.is_some() {
        out.push_str("frequency_ghz,prediction_db,truth_db,violation\n");
    } else {
        out.push_str("frequency_ghz,prediction_db,violation\n");
    }
    for &f in frequencies {
        let pred = model.predict_db(design, f)?;
        let violation = u8::from(pred < 0.0);
        match truth {
            Some(curve) => {
                let t = curve
                    .points
                    .iter()
                    .find(|&&(tf, _)| tf == f)
                    .map(|&(_, il)| il);
                match t {
                    Some(il) => out.push_str(&format!("{f},{pred},{il},{violation}\n")),
                    None => out.push_str(&format!("{f},{pred},,{violation}\n")),
                }
            }
            None => out.push_str(&format!("{f},{pred},{violation}\n")),
        }
    }
    Ok(out)
}
