//! From-scratch fully connected network with analytic gradients and Adam.
//!
//! This is the shared substrate for the baseline regressor, the
//! penalty-trained variant, and the branch network of the polynomial
//! operator model. Everything is `f64`, single-threaded, and bit-for-bit
//! reproducible from `(seed, config, data)`.

use crate::error::{Error, Result};
use crate::physics_loss::{combined_loss, combined_loss_with_gradient, LossSpec, LossValue};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative given pre-activation `z` and activation value `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Output-head activation. Softplus keeps the head strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Softplus,
}

impl OutputActivation {
    fn apply(self, x: f64) -> f64 {
        match self {
            OutputActivation::Identity => x,
            // Stable softplus: ln(1 + e^x) without overflow.
            OutputActivation::Softplus => x.max(0.0) + (-x.abs()).exp().ln_1p(),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Softplus => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

/// One dense layer's parameters: `weights` is row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl ParamBlock {
    fn zeros(rows: usize, cols: usize) -> Self {
        ParamBlock {
            weights: vec![0.0; rows * cols],
            biases: vec![0.0; rows],
        }
    }

    /// Overwrite every weight and bias with `value`.
    pub fn fill(&mut self, value: f64) {
        self.weights.iter_mut().for_each(|w| *w = value);
        self.biases.iter_mut().for_each(|b| *b = value);
    }
}

/// A fully connected network: `layer_sizes` runs input -> hidden... -> output,
/// `activations` holds one tag per hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub output_activation: OutputActivation,
    pub layers: Vec<ParamBlock>,
}

/// Intermediate values of one forward pass, sufficient for backprop.
/// `activations[0]` is the input; `activations[l + 1]` and `preacts[l]` belong
/// to layer `l`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
    pub preacts: Vec<Vec<f64>>,
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<ParamBlock>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            layers: model
                .layer_sizes
                .windows(2)
                .map(|w| ParamBlock::zeros(w[1], w[0]))
                .collect(),
        }
    }

    pub fn zero(&mut self) {
        for block in &mut self.layers {
            block.fill(0.0);
        }
    }

    fn is_finite(&self) -> bool {
        self.layers.iter().all(|b| {
            b.weights.iter().all(|w| w.is_finite()) && b.biases.iter().all(|x| x.is_finite())
        })
    }
}

/// Xavier-uniform initialization: weights in `+-sqrt(6 / (fan_in + fan_out))`,
/// biases zero. Deterministic given the seed.
pub fn init_model(
    layer_sizes: &[usize],
    activations: &[Activation],
    output_activation: OutputActivation,
    seed: u64,
) -> Result<MlpModel> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least an input and an output layer, got sizes {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidConfig(format!(
            "layer sizes must all be >= 1, got {layer_sizes:?}"
        )));
    }
    let n_hidden = layer_sizes.len() - 2;
    if activations.len() != n_hidden {
        return Err(Error::ShapeMismatch {
            context: "hidden activations vs hidden layers".to_string(),
            expected: n_hidden,
            found: activations.len(),
        });
    }

    let mut rng = SeededRng::new(seed);
    let layers = layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            ParamBlock {
                weights: (0..fan_in * fan_out)
                    .map(|_| rng.uniform(-bound, bound))
                    .collect(),
                biases: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        activations: activations.to_vec(),
        output_activation,
        layers,
    })
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|b| b.weights.len() + b.biases.len())
            .sum()
    }

    /// Validate that stored shapes are mutually consistent and finite.
    pub fn validate(&self) -> Result<()> {
        if self.layers.len() + 1 != self.layer_sizes.len() {
            return Err(Error::ShapeMismatch {
                context: "layer blocks vs layer_sizes".to_string(),
                expected: self.layer_sizes.len().saturating_sub(1),
                found: self.layers.len(),
            });
        }
        if self.activations.len() + 2 != self.layer_sizes.len() {
            return Err(Error::ShapeMismatch {
                context: "activation tags vs hidden layers".to_string(),
                expected: self.layer_sizes.len().saturating_sub(2),
                found: self.activations.len(),
            });
        }
        for (l, block) in self.layers.iter().enumerate() {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            if block.weights.len() != rows * cols || block.biases.len() != rows {
                return Err(Error::ShapeMismatch {
                    context: format!("layer {l} parameter block"),
                    expected: rows * cols,
                    found: block.weights.len(),
                });
            }
            if !block.weights.iter().all(|w| w.is_finite())
                || !block.biases.iter().all(|b| b.is_finite())
            {
                return Err(Error::NonFinite(format!("layer {l} parameters")));
            }
        }
        Ok(())
    }

    /// Forward pass returning the output and the cache needed by [`backward`].
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "forward input".to_string(),
                expected: self.input_dim(),
                found: input.len(),
            });
        }
        let n_layers = self.layers.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        let mut preacts = Vec::with_capacity(n_layers);
        activations.push(input.to_vec());

        for (l, block) in self.layers.iter().enumerate() {
            let a_in = &activations[l];
            let cols = self.layer_sizes[l];
            let mut z = Vec::with_capacity(self.layer_sizes[l + 1]);
            for (r, &bias) in block.biases.iter().enumerate() {
                let mut acc = bias;
                let row = &block.weights[r * cols..(r + 1) * cols];
                for (w, x) in row.iter().zip(a_in.iter()) {
                    acc += w * x;
                }
                z.push(acc);
            }
            let a_out: Vec<f64> = if l + 1 == n_layers {
                z.iter().map(|&v| self.output_activation.apply(v)).collect()
            } else {
                let act = self.activations[l];
                z.iter().map(|&v| act.apply(v)).collect()
            };
            preacts.push(z);
            activations.push(a_out);
        }
        let output = activations.last().unwrap().clone();
        Ok((
            output,
            ForwardCache {
                activations,
                preacts,
            },
        ))
    }

    /// Forward pass without keeping the cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.0)
    }
}

/// Backpropagate `output_gradient` (dLoss/dOutput) through the cached pass,
/// returning parameter gradients shaped like the model.
pub fn backward(
    model: &MlpModel,
    cache: &ForwardCache,
    output_gradient: &[f64],
) -> Result<Gradients> {
    let mut grads = Gradients::zeros_like(model);
    backward_into(model, cache, output_gradient, &mut grads)?;
    Ok(grads)
}

/// Like [`backward`] but accumulates into an existing gradient buffer, which
/// is how mini-batches sum per-sample gradients in a fixed order.
pub fn backward_into(
    model: &MlpModel,
    cache: &ForwardCache,
    output_gradient: &[f64],
    grads: &mut Gradients,
) -> Result<()> {
    let n_layers = model.layers.len();
    if output_gradient.len() != model.output_dim() {
        return Err(Error::ShapeMismatch {
            context: "backward output gradient".to_string(),
            expected: model.output_dim(),
            found: output_gradient.len(),
        });
    }
    if cache.activations.len() != n_layers + 1 || cache.preacts.len() != n_layers {
        return Err(Error::ShapeMismatch {
            context: "backward cache".to_string(),
            expected: n_layers + 1,
            found: cache.activations.len(),
        });
    }
    if cache.activations[0].len() != model.input_dim() {
        return Err(Error::ShapeMismatch {
            context: "backward cache input width".to_string(),
            expected: model.input_dim(),
            found: cache.activations[0].len(),
        });
    }

    // dLoss/dz for the output layer.
    let z_out = &cache.preacts[n_layers - 1];
    let mut dz: Vec<f64> = output_gradient
        .iter()
        .zip(z_out.iter())
        .map(|(g, &z)| g * model.output_activation.derivative(z))
        .collect();

    for l in (0..n_layers).rev() {
        let cols = model.layer_sizes[l];
        let a_in = &cache.activations[l];
        let block = &mut grads.layers[l];
        for (r, &d) in dz.iter().enumerate() {
            block.biases[r] += d;
            let row = &mut block.weights[r * cols..(r + 1) * cols];
            for (w, x) in row.iter_mut().zip(a_in.iter()) {
                *w += d * x;
            }
        }
        if l > 0 {
            let weights = &model.layers[l].weights;
            let act = model.activations[l - 1];
            let z_prev = &cache.preacts[l - 1];
            debug_assert_eq!(cache.activations[l].len(), cols);
            let mut da = vec![0.0; cols];
            for (r, &d) in dz.iter().enumerate() {
                let row = &weights[r * cols..(r + 1) * cols];
                for (acc, w) in da.iter_mut().zip(row.iter()) {
                    *acc += w * d;
                }
            }
            dz = da
                .iter()
                .zip(z_prev.iter())
                .zip(cache.activations[l].iter())
                .map(|((&g, &z), &a)| g * act.derivative(z, a))
                .collect();
        }
    }
    Ok(())
}

/// Training hyperparameters. `lambda_penalty` is the configured positivity
/// weight; callers turn it into a [`LossSpec`] together with the scaler's
/// normalized zero threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub lambda_penalty: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 128,
            seed: 0,
            lambda_penalty: 1.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || !self.learning_rate.is_finite()
        {
            return Err(Error::InvalidConfig(
                "learning_rate must be > 0".to_string(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".to_string()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".to_string()));
        }
        if self.lambda_penalty.is_nan() || self.lambda_penalty < 0.0 {
            return Err(Error::InvalidConfig(
                "lambda_penalty must be >= 0".to_string(),
            ));
        }
        for (name, b) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if b.is_nan() || b <= 0.0 || b >= 1.0 {
                return Err(Error::InvalidConfig(format!("{name} must be in (0, 1)")));
            }
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return Err(Error::InvalidConfig("adam_eps must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Adam moment accumulators, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<ParamBlock>,
    pub v: Vec<ParamBlock>,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let zeros = || {
            model
                .layer_sizes
                .windows(2)
                .map(|w| ParamBlock::zeros(w[1], w[0]))
                .collect::<Vec<_>>()
        };
        AdamState {
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Increments the step counter by exactly 1.
pub fn adam_step(
    model: &mut MlpModel,
    grads: &Gradients,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if grads.layers.len() != model.layers.len() {
        return Err(Error::ShapeMismatch {
            context: "adam gradients".to_string(),
            expected: model.layers.len(),
            found: grads.layers.len(),
        });
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient passed to adam_step".to_string()));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.adam_beta1.powi(t);
    let c2 = 1.0 - config.adam_beta2.powi(t);
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);

    for l in 0..model.layers.len() {
        let params = &mut model.layers[l];
        let g = &grads.layers[l];
        let (m, v) = (&mut state.m[l], &mut state.v[l]);
        update_slice(
            &mut params.weights,
            &g.weights,
            &mut m.weights,
            &mut v.weights,
            b1,
            b2,
            c1,
            c2,
            config,
        );
        update_slice(
            &mut params.biases,
            &g.biases,
            &mut m.biases,
            &mut v.biases,
            b1,
            b2,
            c1,
            c2,
            config,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    config: &TrainConfig,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
    }
}

/// Loss and parameter gradients over a batch, with predictions flattened in
/// sample order. This is exactly the quantity one optimizer step consumes.
pub fn batch_gradients(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    loss_spec: &LossSpec,
) -> Result<(LossValue, Gradients)> {
    let out_dim = model.output_dim();
    let mut preds = Vec::with_capacity(inputs.len() * out_dim);
    let mut flat_targets = Vec::with_capacity(inputs.len() * out_dim);
    let mut caches = Vec::with_capacity(inputs.len());
    for (x, t) in inputs.iter().zip(targets) {
        if t.len() != out_dim {
            return Err(Error::ShapeMismatch {
                context: "training target".to_string(),
                expected: out_dim,
                found: t.len(),
            });
        }
        let (out, cache) = model.forward(x)?;
        preds.extend_from_slice(&out);
        flat_targets.extend_from_slice(t);
        caches.push(cache);
    }
    let (value, grad_flat) = combined_loss_with_gradient(&preds, &flat_targets, loss_spec)?;
    let mut grads = Gradients::zeros_like(model);
    for (i, cache) in caches.iter().enumerate() {
        backward_into(
            model,
            cache,
            &grad_flat[i * out_dim..(i + 1) * out_dim],
            &mut grads,
        )?;
    }
    Ok((value, grads))
}

/// Per-epoch training record. Loss components are measured by a full pass
/// over the training set at the end of the epoch, so they agree with an
/// immediate re-evaluation of the final model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total_loss: f64,
    pub mse: f64,
    pub penalty: f64,
    pub seconds: f64,
}

/// One record per completed epoch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn total_seconds(&self) -> f64 {
        self.epochs.iter().map(|e| e.seconds).sum()
    }

    pub fn final_mse(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mse)
    }
}

/// Train by mini-batch Adam on the combined loss. Batches are drawn by a
/// seeded shuffle each epoch; everything is deterministic given
/// `(seed, config, data)`.
pub fn train(
    model: MlpModel,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    loss_spec: &LossSpec,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainTrace)> {
    config.validate()?;
    loss_spec.validate()?;
    let n = inputs.len();
    if n == 0 {
        return Err(Error::EmptyDataset {
            name: "training inputs".to_string(),
        });
    }
    if targets.len() != n {
        return Err(Error::ShapeMismatch {
            context: "training inputs vs targets".to_string(),
            expected: n,
            found: targets.len(),
        });
    }
    if config.batch_size > n {
        return Err(Error::InvalidConfig(format!(
            "batch_size {} exceeds training-set size {n}",
            config.batch_size
        )));
    }

    let mut model = model;
    let mut state = AdamState::new(&model);
    let mut rng = SeededRng::new(config.seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut trace = TrainTrace::default();

    let mut batch_inputs: Vec<Vec<f64>> = Vec::with_capacity(config.batch_size);
    let mut batch_targets: Vec<Vec<f64>> = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        rng.shuffle(&mut indices);
        for chunk in indices.chunks(config.batch_size) {
            batch_inputs.clear();
            batch_targets.clear();
            for &i in chunk {
                batch_inputs.push(inputs[i].clone());
                batch_targets.push(targets[i].clone());
            }
            let (value, grads) = batch_gradients(&model, &batch_inputs, &batch_targets, loss_spec)?;
            if !value.total.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: value.total,
                });
            }
            adam_step(&mut model, &grads, &mut state, config)?;
        }

        // End-of-epoch loss over the full training set, in dataset order.
        let mut preds = Vec::with_capacity(n * model.output_dim());
        let mut flat_targets = Vec::with_capacity(n * model.output_dim());
        for (x, t) in inputs.iter().zip(targets) {
            preds.extend_from_slice(&model.predict(x)?);
            flat_targets.extend_from_slice(t);
        }
        let value = combined_loss(&preds, &flat_targets, loss_spec)?;
        if !value.total.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: value.total,
            });
        }
        trace.epochs.push(EpochRecord {
            epoch,
            total_loss: value.total,
            mse: value.mse,
            penalty: value.penalty,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok((model, trace))
}
