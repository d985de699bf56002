//! Subcommand implementations. Diagnostics go to stderr; data goes to files
//! (and, for `compare`/`predict`, the result itself to stdout).

use crate::args::*;
use ilnet_core::data_pipeline as data;
use ilnet_core::evaluation::{self, MethodTag, TimeBreakdown};
use ilnet_core::persist::{save_trace_csv, ModelFile, Provenance};
use ilnet_core::{
    deeponet, neural_net, polynomial, Activation, DesignParams, Error, EvalReport, FitMethod,
    LossSpec, MinMaxScaler, OutputActivation, PositivityMode, SplitSpec, TrainConfig,
};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// CLI-layer failure: either a usage problem or a propagated library error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.class() {
                ilnet_core::ErrorClass::Usage => 1,
                ilnet_core::ErrorClass::Data => 2,
                ilnet_core::ErrorClass::Numeric => 3,
            },
        }
    }
}

type CliResult = Result<(), CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::GenData(args) => gen_data(args),
        Command::Train(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Compare(args) => compare(args),
        Command::Predict(args) => predict(args),
        Command::FitPoly(args) => fit_poly(args),
    }
}

/// Parse `start:stop:count` into an inclusive linear grid (GHz).
pub fn parse_freq_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--freqs expects start:stop:count, got `{spec}`"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid start `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid stop `{}`", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid count `{}`", parts[2])))?;
    if count == 0 {
        return Err(CliError::Usage("grid count must be >= 1".to_string()));
    }
    if start.is_nan() || start < 0.0 || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage(format!(
            "grid must be finite and non-negative, got {start}:{stop}"
        )));
    }
    if stop < start {
        return Err(CliError::Usage(format!(
            "grid stop {stop} is below start {start}"
        )));
    }
    if count == 1 {
        if start != stop {
            return Err(CliError::Usage(
                "grid count 1 requires start == stop".to_string(),
            ));
        }
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn gen_data(args: GenDataArgs) -> CliResult {
    if args.designs == 0 {
        return Err(CliError::Usage("--designs must be >= 1".to_string()));
    }
    if args.noise_sd.is_nan() || args.noise_sd < 0.0 {
        return Err(CliError::Usage("--noise-sd must be >= 0".to_string()));
    }
    let grid = parse_freq_grid(&args.freqs)?;
    let dataset = data::generate_synthetic(args.designs, &grid, args.seed, args.noise_sd)?;
    data::save_csv(&dataset, &args.output)?;
    eprintln!(
        "wrote {} rows ({} designs x {} frequencies, {:.3}..{:.3} GHz, seed {}) to {}",
        dataset.len(),
        args.designs,
        grid.len(),
        grid[0],
        grid[grid.len() - 1],
        args.seed,
        args.output.display()
    );
    Ok(())
}

fn default_trace_path(output: &Path) -> PathBuf {
    output.with_extension("trace.csv")
}

fn train(args: TrainArgs) -> CliResult {
    if args.train_fraction.is_nan() || args.train_fraction <= 0.0 || args.train_fraction >= 1.0 {
        return Err(CliError::Usage(
            "--train-fraction must be in (0, 1)".to_string(),
        ));
    }
    let dataset = data::load_csv(&args.data)?;
    let split_spec = SplitSpec {
        train_fraction: args.train_fraction,
        seed: args.split_seed,
    };
    let (train_set, test_set) = data::split(&dataset, &split_spec)?;
    let scaler = MinMaxScaler::fit_dataset(&train_set)?;

    let lambda = match args.method {
        MethodArg::Nn => 0.0,
        _ => args.lambda,
    };
    let epochs = args.epochs.unwrap_or(match args.method {
        MethodArg::Nn | MethodArg::Pdnn => 200,
        MethodArg::Pdeeponet => 2000,
    });
    let mut config = TrainConfig {
        learning_rate: args.lr,
        epochs,
        batch_size: args.batch,
        seed: args.seed,
        lambda_penalty: lambda,
        ..TrainConfig::default()
    };

    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| default_trace_path(&args.output));

    let model_file = match args.method {
        MethodArg::Nn | MethodArg::Pdnn => {
            if config.batch_size > train_set.len() {
                eprintln!(
                    "note: batch {} exceeds {} training rows; clamping",
                    config.batch_size,
                    train_set.len()
                );
                config.batch_size = train_set.len();
            }
            let inputs: Vec<Vec<f64>> = train_set
                .samples
                .iter()
                .map(|s| scaler.transform_inputs(&s.input_features()))
                .collect();
            let targets: Vec<Vec<f64>> = train_set
                .samples
                .iter()
                .map(|s| vec![scaler.transform_label(s.insertion_loss_db)])
                .collect();
            let loss_spec = LossSpec {
                lambda_penalty: lambda,
                il_zero_normalized: scaler.t0(),
            };
            let sizes = [data::N_INPUTS, 64, 64, 64, 1];
            let model = neural_net::init_model(
                &sizes,
                &[Activation::Tanh; 3],
                OutputActivation::Identity,
                config.seed,
            )?;
            let started = Instant::now();
            let (model, trace) = neural_net::train(model, &inputs, &targets, &loss_spec, &config)?;
            let seconds = started.elapsed().as_secs_f64();
            save_trace_csv(&trace, &trace_path)?;
            eprintln!(
                "{}: {} epochs in {seconds:.2}s, final train mse {:.6}",
                args.method.tag(),
                config.epochs,
                trace.final_mse().unwrap_or(f64::NAN)
            );
            ModelFile::new_mlp(
                args.method.tag(),
                model,
                scaler,
                Provenance {
                    dataset: dataset.name.clone(),
                    split: split_spec,
                    train_config: config,
                },
                TimeBreakdown::Single(seconds),
            )
        }
        MethodArg::Pdeeponet => {
            let fit_method = args.fit.into();
            let mode = match args.positivity {
                PositivityArg::SoftplusHead => PositivityMode::SoftplusHead,
                PositivityArg::Unconstrained => PositivityMode::Unconstrained,
            };
            let outcome = deeponet::train_two_stage(&train_set, fit_method, mode, &config)?;
            save_trace_csv(&outcome.trace, &trace_path)?;
            for failure in &outcome.fit_result.failures {
                eprintln!("warning: curve fit failed: {}", failure.reason);
            }
            for excluded in &outcome.fit_result.excluded {
                eprintln!(
                    "warning: curve excluded ({} points): {}",
                    excluded.n_points, excluded.reason
                );
            }
            let flagged = outcome
                .fit_result
                .poorly_cubic(polynomial::RESIDUAL_WARN_DB)
                .len();
            if flagged > 0 {
                eprintln!(
                    "note: {flagged} curve(s) exceed the {} dB cubic-misfit threshold",
                    polynomial::RESIDUAL_WARN_DB
                );
            }
            eprintln!(
                "pdeeponet: {} curves fitted (max residual {:.4} dB) in {:.2}s, branch trained in {:.2}s",
                outcome.fit_result.fits.len(),
                outcome.fit_result.max_abs_residual,
                outcome.stage1_seconds,
                outcome.stage2_seconds
            );
            ModelFile::new_pdeeponet(
                outcome.model,
                scaler,
                Provenance {
                    dataset: dataset.name.clone(),
                    split: split_spec,
                    train_config: config,
                },
                TimeBreakdown::TwoPart {
                    stage1_s: outcome.stage1_seconds,
                    stage2_s: outcome.stage2_seconds,
                },
            )
        }
    };

    // Unused for training itself; kept so reruns of evaluate see the same data.
    let _ = test_set;

    model_file.save(&args.output)?;
    eprintln!("model written to {}", args.output.display());
    eprintln!("trace written to {}", trace_path.display());
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> CliResult {
    let model_file = ModelFile::load(&args.model)?;
    let dataset = data::load_csv(&args.data)?;
    let (train_set, test_set) = data::split(&dataset, &model_file.provenance.split)?;
    let surrogate = model_file.surrogate();
    let report = evaluation::evaluate(
        surrogate.as_ref(),
        &model_file.scaler,
        &train_set,
        &test_set,
        model_file.timing,
    )?;
    report.save(&args.output)?;
    eprintln!(
        "{}: train mse {:.6}, test mse {:.6}, {} negative of {} ({} dB min), report {}",
        report.method,
        report.train_mse,
        report.test_mse,
        report.n_negative,
        report.n_test_evaluations,
        report.min_prediction_db,
        args.output.display()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> CliResult {
    let mut reports = Vec::with_capacity(args.reports.len());
    for path in &args.reports {
        reports.push(EvalReport::load(path)?);
    }
    let comparison = evaluation::compare(reports)?;
    print!("{}", comparison.render_text());
    if let Some(path) = &args.output_csv {
        std::fs::write(path, comparison.to_csv()).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        eprintln!("comparison CSV written to {}", path.display());
    }
    if let Some(path) = &args.output_json {
        std::fs::write(path, comparison.to_json()).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        eprintln!("comparison JSON written to {}", path.display());
    }
    Ok(())
}

fn predict(args: PredictArgs) -> CliResult {
    let model_file = ModelFile::load(&args.model)?;
    let params = DesignParams {
        via_pitch_mm: args.via_pitch,
        via_radius_mm: args.via_radius,
        antipad_radius_mm: args.antipad_radius,
        cavity_height_mm: args.cavity_height,
        trace_length_mm: args.trace_length,
        permittivity: args.permittivity,
        loss_tangent: args.loss_tangent,
    };
    params.validate()?;
    if args.frequency < 0.0 || !args.frequency.is_finite() {
        return Err(CliError::Usage(format!(
            "--frequency must be finite and >= 0, got {}",
            args.frequency
        )));
    }
    let il = model_file.surrogate().predict_db(&params, args.frequency)?;
    println!("{il}");
    Ok(())
}

fn fit_poly(args: FitPolyArgs) -> CliResult {
    let dataset = data::load_csv(&args.data)?;
    let result = polynomial::fit_all(&dataset, args.method.into())?;
    polynomial::save_coeff_csv(&result, &args.output)?;
    for failure in &result.failures {
        eprintln!("warning: curve fit failed: {}", failure.reason);
    }
    for excluded in &result.excluded {
        eprintln!(
            "warning: curve excluded ({} points): {}",
            excluded.n_points, excluded.reason
        );
    }
    for (_, report) in result.poorly_cubic(args.warn_residual) {
        eprintln!(
            "warning: poorly cubic curve: max |residual| {:.4} dB exceeds {} dB",
            report.max_abs_residual, args.warn_residual
        );
    }
    eprintln!(
        "{} curves fitted ({} failed, {} excluded), max |residual| {:.6} dB, coefficients in {}",
        result.fits.len(),
        result.failures.len(),
        result.excluded.len(),
        result.max_abs_residual,
        args.output.display()
    );
    Ok(())
}

impl MethodArg {
    pub fn tag(self) -> MethodTag {
        match self {
            MethodArg::Nn => MethodTag::Nn,
            MethodArg::Pdnn => MethodTag::Pdnn,
            MethodArg::Pdeeponet => MethodTag::Pdeeponet,
        }
    }
}

impl From<FitArg> for FitMethod {
    fn from(f: FitArg) -> Self {
        match f {
            FitArg::Ols => FitMethod::Ols,
            FitArg::Nnls => FitMethod::Nnls,
        }
    }
}
