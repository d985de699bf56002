//! Composite training loss: MSE data term plus a positivity hinge.
//!
//! All quantities live in normalized label space. The hinge threshold `t0` is
//! the normalized image of 0 dB, so `max(0, t0 - p)` in normalized space is
//! the same constraint as `max(0, -IL)` in physical space, up to the constant
//! half-label-range factor that gets absorbed into the penalty weight.
//! Both terms average over the batch so the weight's meaning does not depend
//! on batch size.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Loss configuration: penalty weight and the normalized zero-dB threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub lambda_penalty: f64,
    pub il_zero_normalized: f64,
}

impl LossSpec {
    /// Plain MSE: zero penalty weight, threshold irrelevant.
    pub fn mse_only() -> Self {
        LossSpec {
            lambda_penalty: 0.0,
            il_zero_normalized: -1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_penalty.is_nan()
            || self.lambda_penalty < 0.0
            || !self.lambda_penalty.is_finite()
        {
            return Err(Error::InvalidConfig(format!(
                "lambda_penalty must be finite and >= 0, got {}",
                self.lambda_penalty
            )));
        }
        if !self.il_zero_normalized.is_finite() {
            return Err(Error::InvalidConfig(
                "il_zero_normalized must be finite".to_string(),
            ));
        }
        Ok(())
    }
}

/// Decomposed loss. `total` is computed as `mse + lambda * penalty`, the same
/// floating-point expression everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossValue {
    pub total: f64,
    pub mse: f64,
    pub penalty: f64,
}

/// Mean squared error `(1/N) * sum (p_i - t_i)^2`.
pub fn mse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let n = predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Gradient of [`mse`] with respect to the predictions: `(2/N) * (p_i - t_i)`.
pub fn mse_gradient(predictions: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    check_lengths(predictions, targets)?;
    let scale = 2.0 / predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| scale * (p - t))
        .collect())
}

/// Mean positivity hinge `(1/N) * sum max(0, t0 - p_i)`: zero when every
/// prediction is at or above the normalized zero-dB threshold.
pub fn positivity_penalty(predictions: &[f64], t0: f64) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidConfig(
            "positivity penalty needs at least one prediction".to_string(),
        ));
    }
    let n = predictions.len() as f64;
    Ok(predictions.iter().map(|p| (t0 - p).max(0.0)).sum::<f64>() / n)
}

/// Subgradient of [`positivity_penalty`]: `-1/N` strictly below the threshold,
/// `0` at and above it (the hinge's kink breaks toward the satisfied side).
pub fn positivity_subgradient(predictions: &[f64], t0: f64) -> Vec<f64> {
    let n = predictions.len() as f64;
    predictions
        .iter()
        .map(|&p| if p < t0 { -1.0 / n } else { 0.0 })
        .collect()
}

/// Combined loss of the data term and the weighted positivity hinge.
pub fn combined_loss(predictions: &[f64], targets: &[f64], spec: &LossSpec) -> Result<LossValue> {
    let mse = mse(predictions, targets)?;
    let penalty = positivity_penalty(predictions, spec.il_zero_normalized)?;
    Ok(LossValue {
        total: mse + spec.lambda_penalty * penalty,
        mse,
        penalty,
    })
}

/// Combined loss plus its gradient with respect to the predictions.
pub fn combined_loss_with_gradient(
    predictions: &[f64],
    targets: &[f64],
    spec: &LossSpec,
) -> Result<(LossValue, Vec<f64>)> {
    let value = combined_loss(predictions, targets, spec)?;
    let mut grad = mse_gradient(predictions, targets)?;
    let hinge = positivity_subgradient(predictions, spec.il_zero_normalized);
    for (g, h) in grad.iter_mut().zip(hinge) {
        *g += spec.lambda_penalty * h;
    }
    Ok((value, grad))
}

fn check_lengths(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::InvalidConfig(
            "loss needs at least one prediction".to_string(),
        ));
    }
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch {
            context: "loss predictions vs targets".to_string(),
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    Ok(())
}
