//! Polynomial-based operator model: a branch network maps the seven design
//! parameters to the three cubic coefficients, a fixed power-series trunk
//! supplies `(w, w^2, w^3)`, and the prediction is their dot product.
//!
//! Training is two-stage: per-curve coefficient fitting first, then plain MSE
//! regression of the branch network onto the normalized coefficients. In
//! `softplus_head` mode the branch head is softplus and the coefficient
//! scaler is a pure positive scale, so every denormalized coefficient is
//! positive and the prediction is non-negative for any `w >= 0` by
//! construction, not by observation.

use crate::data_pipeline::{Dataset, DesignParams, MinMaxScaler, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::neural_net::{
    init_model, train, Activation, MlpModel, OutputActivation, TrainConfig, TrainTrace,
};
use crate::physics_loss::LossSpec;
use crate::polynomial::{eval_poly, fit_all, FitAllResult, FitMethod, PolyCoeffs};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Names of the derived coefficient features.
pub const COEFF_NAMES: [&str; 3] = ["a", "b", "c"];

/// How the model guarantees (or does not guarantee) non-negative predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMode {
    /// Softplus branch head over a pure-scale coefficient map: predictions
    /// are non-negative for every input, structurally.
    SoftplusHead,
    /// Identity head over a standard min-max map: mirrors an unconstrained
    /// regression; positivity is measured, never guaranteed.
    Unconstrained,
}

impl std::fmt::Display for PositivityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PositivityMode::SoftplusHead => write!(f, "softplus_head"),
            PositivityMode::Unconstrained => write!(f, "unconstrained"),
        }
    }
}

/// Trained polynomial operator model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PDeepONetModel {
    /// Branch network, 7 inputs to 3 outputs (normalized coefficients).
    pub branch: MlpModel,
    /// Scaler over the 7 design parameters (branch inputs).
    pub param_scaler: MinMaxScaler,
    /// Scaler over the fitted `(a, b, c)` targets.
    pub coeff_scaler: MinMaxScaler,
    pub positivity_mode: PositivityMode,
    /// Stage-1 fitting method the coefficients came from.
    pub fit_method: FitMethod,
}

/// Everything produced by [`train_two_stage`], with the stage timings kept
/// separate the way the comparison table reports them.
#[derive(Debug, Clone)]
pub struct TwoStageOutcome {
    pub model: PDeepONetModel,
    pub trace: TrainTrace,
    pub fit_result: FitAllResult,
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
}

/// Default branch architecture: 7 -> 64 -> 64 -> 3, tanh hidden.
pub const BRANCH_HIDDEN: [usize; 2] = [64, 64];

/// Stage 1: fit per-curve cubic coefficients. Stage 2: regress the branch
/// network onto the normalized coefficients with plain MSE.
pub fn train_two_stage(
    dataset: &Dataset,
    fit_method: FitMethod,
    mode: PositivityMode,
    config: &TrainConfig,
) -> Result<TwoStageOutcome> {
    let stage1_started = Instant::now();
    let fit_result = fit_all(dataset, fit_method)?;
    if fit_result.fits.len() < 2 {
        return Err(Error::NoFittableCurves(format!(
            "branch regression needs at least 2 curves, got {}",
            fit_result.fits.len()
        )));
    }

    let rows = fit_result.coeff_rows();
    let param_rows: Vec<Vec<f64>> = rows.iter().map(|(p, _)| p.to_vec()).collect();
    let coeff_rows: Vec<Vec<f64>> = rows.iter().map(|(_, c)| c.to_vec()).collect();

    let param_scaler = MinMaxScaler::fit_rows(&FEATURE_NAMES[..7], &param_rows)?;
    let coeff_scaler = match mode {
        PositivityMode::SoftplusHead => {
            MinMaxScaler::fit_symmetric_rows(&COEFF_NAMES, &coeff_rows)?
        }
        PositivityMode::Unconstrained => MinMaxScaler::fit_rows(&COEFF_NAMES, &coeff_rows)?,
    };
    let stage1_seconds = stage1_started.elapsed().as_secs_f64();

    let inputs: Vec<Vec<f64>> = param_rows
        .iter()
        .map(|r| param_scaler.transform_row(r))
        .collect();
    let targets: Vec<Vec<f64>> = coeff_rows
        .iter()
        .map(|r| coeff_scaler.transform_row(r))
        .collect();

    let head = match mode {
        PositivityMode::SoftplusHead => OutputActivation::Softplus,
        PositivityMode::Unconstrained => OutputActivation::Identity,
    };
    let sizes = [7, BRANCH_HIDDEN[0], BRANCH_HIDDEN[1], 3];
    let branch = init_model(&sizes, &[Activation::Tanh; 2], head, config.seed)?;

    // The curve table is much smaller than the row table; cap the batch.
    let mut stage2_config = *config;
    stage2_config.batch_size = config.batch_size.min(inputs.len());

    let stage2_started = Instant::now();
    let (branch, trace) = train(
        branch,
        &inputs,
        &targets,
        &LossSpec::mse_only(),
        &stage2_config,
    )?;
    let stage2_seconds = stage2_started.elapsed().as_secs_f64();

    Ok(TwoStageOutcome {
        model: PDeepONetModel {
            branch,
            param_scaler,
            coeff_scaler,
            positivity_mode: mode,
            fit_method,
        },
        trace,
        fit_result,
        stage1_seconds,
        stage2_seconds,
    })
}

impl PDeepONetModel {
    /// Denormalized cubic coefficients for one design.
    pub fn coefficients(&self, params: &DesignParams) -> Result<PolyCoeffs> {
        let row = params.as_array();
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design parameters".to_string()));
        }
        let normalized = self.param_scaler.transform_row(&row);
        let out = self.branch.predict(&normalized)?;
        let coeffs = self.coeff_scaler.inverse_row(&out);
        Ok(PolyCoeffs {
            a: coeffs[0],
            b: coeffs[1],
            c: coeffs[2],
        })
    }

    /// Predict insertion loss in dB: the branch coefficients composed with
    /// the power-series trunk. This is the only prediction path.
    pub fn predict(&self, params: &DesignParams, frequency_ghz: f64) -> Result<f64> {
        if frequency_ghz < 0.0 || !frequency_ghz.is_finite() {
            return Err(Error::NegativeFrequency(frequency_ghz));
        }
        let coeffs = self.coefficients(params)?;
        Ok(eval_poly(&coeffs, frequency_ghz))
    }

    /// Elementwise [`predict`] over a frequency list, order preserved.
    pub fn predict_curve(
        &self,
        params: &DesignParams,
        frequencies: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        let coeffs = self.coefficients(params)?;
        frequencies
            .iter()
            .map(|&f| {
                if f < 0.0 || !f.is_finite() {
                    return Err(Error::NegativeFrequency(f));
                }
                Ok((f, eval_poly(&coeffs, f)))
            })
            .collect()
    }
}
