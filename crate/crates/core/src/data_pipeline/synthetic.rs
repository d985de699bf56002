//! Physics-plausible synthetic datasets.
//!
//! The ground-truth curve combines a square-root conductor-loss term, a
//! dielectric term linear in frequency, and a via/cavity term quadratic in
//! frequency. It is smooth, increasing, and near zero at low frequency --
//! the regime where unconstrained regressors tend to predict negative loss.
//! It is a stand-in for measured data, not a field solution.

use crate::data_pipeline::{Dataset, DesignParams, Sample};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Uniform sampling ranges for the seven design parameters, in field order.
/// Lengths in mm; permittivity and loss tangent dimensionless.
pub const PARAM_RANGES: [(f64, f64); 7] = [
    (0.8, 1.2),     // via_pitch_mm
    (0.1, 0.25),    // via_radius_mm
    (0.3, 0.6),     // antipad_radius_mm
    (0.2, 0.8),     // cavity_height_mm
    (10.0, 100.0),  // trace_length_mm
    (3.0, 4.5),     // permittivity
    (0.005, 0.025), // loss_tangent
];

/// Positive coefficients of the loss model, all in dB per the stated units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModelConstants {
    /// Conductor (skin-effect) loss, dB / (mm * sqrt(GHz)).
    pub conductor: f64,
    /// Dielectric loss, dB / (mm * GHz), scaled by sqrt(eps_r) * tan_delta.
    pub dielectric: f64,
    /// Via/cavity loss, dB / (mm * GHz^2), scaled by the radius ratio.
    pub via: f64,
}

impl Default for LossModelConstants {
    fn default() -> Self {
        LossModelConstants {
            conductor: 0.002,
            dielectric: 0.02,
            via: 0.002,
        }
    }
}

/// Noise-free insertion loss of the synthetic model, in dB:
///
/// `IL(f) = L*(k_c*sqrt(f) + k_d*sqrt(eps_r)*tan_d*f) + k_v*h*(r_via/r_antipad)*f^2`
///
/// Non-negative for all valid parameters and `f >= 0`, zero at `f = 0`, and
/// monotone non-decreasing in trace length.
pub fn ground_truth_il(params: &DesignParams, frequency_ghz: f64, k: &LossModelConstants) -> f64 {
    let conductor = k.conductor * frequency_ghz.sqrt();
    let dielectric =
        k.dielectric * params.permittivity.sqrt() * params.loss_tangent * frequency_ghz;
    let via = k.via
        * params.cavity_height_mm
        * (params.via_radius_mm / params.antipad_radius_mm)
        * frequency_ghz
        * frequency_ghz;
    params.trace_length_mm * (conductor + dielectric) + via
}

/// Full generator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_designs: usize,
    pub frequencies: Vec<f64>,
    pub seed: u64,
    /// Standard deviation of additive Gaussian label noise, in dB.
    pub noise_sd: f64,
    pub constants: LossModelConstants,
}

/// Generate `n_designs` random designs swept over `frequencies`, with the
/// default loss constants. Labels are clipped at 0 so they stay physical;
/// identical seeds produce bit-identical datasets.
pub fn generate_synthetic(
    n_designs: usize,
    frequencies: &[f64],
    seed: u64,
    noise_sd: f64,
) -> Result<Dataset> {
    generate_synthetic_with(&SyntheticConfig {
        n_designs,
        frequencies: frequencies.to_vec(),
        seed,
        noise_sd,
        constants: LossModelConstants::default(),
    })
}

/// Generator with explicit loss constants (e.g. `conductor = 0` makes the
/// ground truth exactly cubic in frequency).
pub fn generate_synthetic_with(cfg: &SyntheticConfig) -> Result<Dataset> {
    if cfg.n_designs == 0 {
        return Err(Error::InvalidConfig("n_designs must be >= 1".to_string()));
    }
    if cfg.frequencies.is_empty() {
        return Err(Error::InvalidConfig("frequency grid is empty".to_string()));
    }
    if let Some(&f) = cfg
        .frequencies
        .iter()
        .find(|&&f| f.is_nan() || f < 0.0 || !f.is_finite())
    {
        return Err(Error::NegativeFrequency(f));
    }
    if cfg.noise_sd.is_nan() || cfg.noise_sd < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise_sd must be >= 0, got {}",
            cfg.noise_sd
        )));
    }

    let mut rng = SeededRng::new(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.n_designs * cfg.frequencies.len());
    for _ in 0..cfg.n_designs {
        let mut a = [0.0f64; 7];
        for (value, (lo, hi)) in a.iter_mut().zip(PARAM_RANGES.iter()) {
            *value = rng.uniform(*lo, *hi);
        }
        let params = DesignParams::from_array(a);
        for &f in &cfg.frequencies {
            let truth = ground_truth_il(&params, f, &cfg.constants);
            let label = (truth + cfg.noise_sd * rng.standard_normal()).max(0.0);
            samples.push(Sample {
                params,
                frequency_ghz: f,
                insertion_loss_db: label,
            });
        }
    }
    Dataset::new(
        format!(
            "synthetic-d{}-f{}-s{}",
            cfg.n_designs,
            cfg.frequencies.len(),
            cfg.seed
        ),
        samples,
    )
}
