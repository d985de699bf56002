//! Shared fixtures for the criterion benchmarks.

use ilnet_core::{
    generate_synthetic, group_curves, init_model, train_two_stage, Activation, CurveGroup, Dataset,
    FitMethod, MinMaxScaler, MlpModel, OutputActivation, PDeepONetModel, PositivityMode,
    TrainConfig,
};

/// A mid-sized seeded dataset: 32 designs swept over 37 frequencies.
pub fn bench_dataset() -> Dataset {
    let freqs: Vec<f64> = (0..37).map(|i| 0.1 + i as f64 * (39.9 / 36.0)).collect();
    generate_synthetic(32, &freqs, 7, 0.12).expect("benchmark dataset generates")
}

/// Normalized training arrays for the dense-network benchmarks.
pub fn normalized_training_set(dataset: &Dataset) -> (MinMaxScaler, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let scaler = MinMaxScaler::fit_dataset(dataset).expect("scaler fits");
    let inputs = dataset
        .samples
        .iter()
        .map(|s| scaler.transform_inputs(&s.input_features()))
        .collect();
    let targets = dataset
        .samples
        .iter()
        .map(|s| vec![scaler.transform_label(s.insertion_loss_db)])
        .collect();
    (scaler, inputs, targets)
}

/// The default surrogate architecture, untrained.
pub fn default_mlp(seed: u64) -> MlpModel {
    init_model(
        &[8, 64, 64, 64, 1],
        &[Activation::Tanh; 3],
        OutputActivation::Identity,
        seed,
    )
    .expect("default architecture initializes")
}

/// One frequency sweep from the benchmark dataset.
pub fn bench_curve() -> CurveGroup {
    group_curves(&bench_dataset())
        .groups
        .into_iter()
        .next()
        .expect("dataset groups into curves")
}

/// A small trained polynomial operator model for inference benchmarks.
pub fn trained_pdeeponet() -> PDeepONetModel {
    let config = TrainConfig {
        epochs: 50,
        batch_size: 32,
        ..TrainConfig::default()
    };
    train_two_stage(
        &bench_dataset(),
        FitMethod::Nnls,
        PositivityMode::SoftplusHead,
        &config,
    )
    .expect("two-stage training succeeds")
    .model
}
