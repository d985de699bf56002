//! Library-level end-to-end run: generate, split, normalize, train all three
//! methods at desk scale, evaluate, and compare, without touching the CLI.

use ilnet_core::evaluation::{MethodTag, MlpSurrogate, TimeBreakdown};
use ilnet_core::*;

fn normalized(scaler: &MinMaxScaler, data: &Dataset) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let inputs = data
        .samples
        .iter()
        .map(|s| scaler.transform_inputs(&s.input_features()))
        .collect();
    let targets = data
        .samples
        .iter()
        .map(|s| vec![scaler.transform_label(s.insertion_loss_db)])
        .collect();
    (inputs, targets)
}

#[test]
fn three_method_pipeline_end_to_end() {
    let freqs: Vec<f64> = (0..16).map(|i| 0.1 + i as f64 * 2.5).collect();
    let dataset = generate_synthetic(30, &freqs, 11, 0.1).unwrap();
    let (train_set, test_set) = split(
        &dataset,
        &SplitSpec {
            train_fraction: 0.8,
            seed: 2,
        },
    )
    .unwrap();
    let scaler = MinMaxScaler::fit_dataset(&train_set).unwrap();
    let (inputs, targets) = normalized(&scaler, &train_set);

    let config = TrainConfig {
        epochs: 40,
        batch_size: 64,
        ..TrainConfig::default()
    };

    let mut reports = Vec::new();
    for (method, lambda) in [(MethodTag::Nn, 0.0), (MethodTag::Pdnn, 1.0)] {
        let spec = LossSpec {
            lambda_penalty: lambda,
            il_zero_normalized: scaler.t0(),
        };
        let model = init_model(
            &[N_INPUTS, 64, 64, 64, 1],
            &[Activation::Tanh; 3],
            OutputActivation::Identity,
            config.seed,
        )
        .unwrap();
        let (model, trace) = train(model, &inputs, &targets, &spec, &config).unwrap();
        assert_eq!(trace.epochs.len(), config.epochs);
        let surrogate = MlpSurrogate {
            model,
            scaler: scaler.clone(),
            method,
        };
        let report = evaluate(
            &surrogate,
            &scaler,
            &train_set,
            &test_set,
            TimeBreakdown::Single(trace.total_seconds()),
        )
        .unwrap();
        assert!(report.test_mse.is_finite() && report.test_mse > 0.0);
        reports.push(report);
    }

    let outcome = train_two_stage(
        &train_set,
        FitMethod::Nnls,
        PositivityMode::SoftplusHead,
        &TrainConfig {
            epochs: 400,
            ..config
        },
    )
    .unwrap();
    let report = evaluate(
        &outcome.model,
        &scaler,
        &train_set,
        &test_set,
        TimeBreakdown::TwoPart {
            stage1_s: outcome.stage1_seconds,
            stage2_s: outcome.stage2_seconds,
        },
    )
    .unwrap();
    assert_eq!(
        report.n_negative, 0,
        "softplus mode cannot predict negatives"
    );
    reports.push(report);

    let comparison = compare(reports).unwrap();
    let order: Vec<MethodTag> = comparison.reports.iter().map(|r| r.method).collect();
    assert_eq!(
        order,
        vec![MethodTag::Nn, MethodTag::Pdnn, MethodTag::Pdeeponet]
    );

    let parsed = evaluation::Comparison::from_csv(&comparison.to_csv()).unwrap();
    assert_eq!(parsed.len(), 3);
    for (row, report) in parsed.iter().zip(&comparison.reports) {
        assert_eq!(*row, report.to_row());
    }
}

#[test]
fn models_are_send_and_sync_for_shared_inference() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Dataset>();
    assert_send_sync::<MinMaxScaler>();
    assert_send_sync::<MlpModel>();
    assert_send_sync::<PDeepONetModel>();
    assert_send_sync::<EvalReport>();
    assert_send_sync::<ModelFile>();

    // Concurrent predictions against one shared trained model.
    let freqs: Vec<f64> = (1..=8).map(|i| i as f64 * 2.0).collect();
    let dataset = generate_synthetic(12, &freqs, 5, 0.05).unwrap();
    let outcome = train_two_stage(
        &dataset,
        FitMethod::Nnls,
        PositivityMode::SoftplusHead,
        &TrainConfig {
            epochs: 20,
            batch_size: 12,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let model = std::sync::Arc::new(outcome.model);

    let sequential: Vec<f64> = dataset
        .samples
        .iter()
        .map(|s| model.predict(&s.params, s.frequency_ghz).unwrap())
        .collect();

    let handles: Vec<_> = (0..4)
        .map(|worker| {
            let model = model.clone();
            let samples = dataset.samples.clone();
            std::thread::spawn(move || {
                samples
                    .iter()
                    .skip(worker)
                    .step_by(4)
                    .map(|s| model.predict(&s.params, s.frequency_ghz).unwrap())
                    .collect::<Vec<f64>>()
            })
        })
        .collect();
    for (worker, handle) in handles.into_iter().enumerate() {
        let got = handle.join().unwrap();
        let expected: Vec<f64> = sequential.iter().skip(worker).step_by(4).copied().collect();
        assert_eq!(
            got, expected,
            "concurrent predictions must match sequential"
        );
    }
}
