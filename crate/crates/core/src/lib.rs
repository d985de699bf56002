//! Parameterized surrogate models of transmission-line insertion loss that
//! respect the physical constraint `IL >= 0`.
//!
//! Insertion loss of a passive interconnect can never be negative, but plain
//! regression models trained on sampled sweeps routinely dip below zero at
//! low frequency. This crate implements three surrogates over the same
//! dataset schema and compares them:
//!
//! - **nn** -- a baseline dense network trained on MSE alone (reproduces the
//!   violation),
//! - **pdnn** -- the same network with a hinge penalty on negative
//!   predictions added to the loss,
//! - **pdeeponet** -- a branch network predicting the coefficients of a
//!   no-intercept cubic in frequency; with the softplus head the prediction
//!   is non-negative by construction.
//!
//! Everything is `f64`, seeded, and bit-for-bit reproducible; see the CLI
//! crate for the end-to-end pipeline.

pub mod data_pipeline;
pub mod deeponet;
pub mod error;
pub mod evaluation;
pub mod neural_net;
pub mod persist;
pub mod physics_loss;
pub mod polynomial;
pub mod rng;

pub use data_pipeline::{
    generate_synthetic, group_curves, load_csv, save_csv, split, CurveGroup, Dataset, DesignParams,
    MinMaxScaler, Sample, SplitSpec, FEATURE_NAMES, N_INPUTS,
};
pub use deeponet::{train_two_stage, PDeepONetModel, PositivityMode, TwoStageOutcome};
pub use error::{Error, ErrorClass, Result};
pub use evaluation::{
    compare, evaluate, frequency_profile, Comparison, EvalReport, MethodTag, MlpSurrogate,
    Surrogate, TimeBreakdown,
};
pub use neural_net::{
    adam_step, backward, batch_gradients, init_model, train, Activation, AdamState, Gradients,
    MlpModel, OutputActivation, TrainConfig, TrainTrace,
};
pub use persist::{save_trace_csv, ModelFile, Provenance};
pub use physics_loss::{
    combined_loss, combined_loss_with_gradient, mse, mse_gradient, positivity_penalty,
    positivity_subgradient, LossSpec, LossValue,
};
pub use polynomial::{
    eval_poly, fit_all, fit_nnls, fit_ols, power_series, FitAllResult, FitMethod, PolyCoeffs,
    PolyFitReport,
};
pub use rng::SeededRng;
