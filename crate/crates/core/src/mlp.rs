//! Feedforward regressor mapping feature vectors to (x, y).
//!
//! Hidden layers use tanh (or ReLU), the output layer is linear with width 2. Training
//! minimises mean squared error over z-scored labels with mini-batch Adam and stops early
//! once the epoch training loss stops improving.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{fit_normalizer, FeatureVector, NormalizationStats};

pub const OUTPUT_WIDTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_layer_widths: Vec<usize>,
    pub hidden_activation: Activation,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub adam: AdamParams,
    /// Epochs without a `min_delta` improvement of the training loss before stopping.
    pub patience: usize,
    pub min_delta: f64,
    pub rng_seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layer_widths: vec![64],
            hidden_activation: Activation::Tanh,
            batch_size: 32,
            max_epochs: 500,
            adam: AdamParams::default(),
            patience: 20,
            min_delta: 1e-4,
            rng_seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layer_widths.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        if self.batch_size == 0 || self.patience == 0 {
            return Err(Error::Config("batch_size and patience must be at least 1".into()));
        }
        if !(self.adam.learning_rate > 0.0) || self.min_delta.is_nan() {
            return Err(Error::Config("learning rate must be > 0 and min_delta a number".into()));
        }
        Ok(())
    }

    /// Short tag such as `mlp[64x64]tanh`.
    pub fn descriptor(&self) -> String {
        let widths: Vec<String> = self.hidden_layer_widths.iter().map(|w| w.to_string()).collect();
        let act = match self.hidden_activation {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        };
        format!("mlp[{}]{act}", widths.join("x"))
    }
}

/// Fully connected layer; `weights` is row-major `n_out x n_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
        }
    }

    #[inline]
    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.n_in..(o + 1) * self.n_in]
    }
}

/// Glorot-uniform bound for a layer.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Parameter gradients, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            layers: model.layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect(),
        }
    }

    fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.fill(0.0);
            l.biases.fill(0.0);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub layers: Vec<Dense>,
    pub normalizer: Option<NormalizationStats>,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Last epoch's MSE in normalised label units.
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub stopped_early: bool,
}

/// Glorot-uniform weights, zero biases, deterministic in `config.rng_seed`.
pub fn init(config: &MlpConfig, input_width: usize) -> Result<MlpModel> {
    config.validate()?;
    if input_width == 0 {
        return Err(Error::Config("input width must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut widths = vec![input_width];
    widths.extend(&config.hidden_layer_widths);
    widths.push(OUTPUT_WIDTH);
    let layers = widths
        .windows(2)
        .map(|w| {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = glorot_limit(n_in, n_out);
            let mut layer = Dense::zeros(n_in, n_out);
            for v in &mut layer.weights {
                *v = rng.random_range(-limit..limit);
            }
            layer
        })
        .collect();
    Ok(MlpModel {
        config: config.clone(),
        layers,
        normalizer: None,
        loss_history: Vec::new(),
    })
}

/// Scratch buffers for one forward/backward pass.
struct Workspace {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(model: &MlpModel) -> Self {
        let mut acts = vec![vec![0.0; model.input_width()]];
        acts.extend(model.layers.iter().map(|l| vec![0.0; l.n_out]));
        let deltas = model.layers.iter().map(|l| vec![0.0; l.n_out]).collect();
        Workspace { acts, deltas }
    }
}

impl MlpModel {
    pub fn input_width(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn forward_into(&self, ws: &mut Workspace) {
        let last = self.layers.len() - 1;
        let act = self.config.hidden_activation;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let output = &mut after[0];
            for (o, out) in output.iter_mut().enumerate() {
                let z = layer.biases[o] + dot(layer.row(o), input);
                *out = if l == last { z } else { act.apply(z) };
            }
        }
    }

    /// Output in normalised label units for an already normalised input.
    pub fn forward(&self, input: &[f64]) -> Result<[f64; 2]> {
        if input.len() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                actual: input.len(),
            });
        }
        let mut ws = Workspace::new(self);
        ws.acts[0].copy_from_slice(input);
        self.forward_into(&mut ws);
        let out = ws.acts.last().expect("output layer");
        Ok([out[0], out[1]])
    }

    /// Adds one sample's gradient (scaled by `scale`) and returns its squared error sum.
    fn accumulate(&self, ws: &mut Workspace, target: &[f64], scale: f64, grads: &mut Gradients) -> f64 {
        self.forward_into(ws);
        let n_layers = self.layers.len();
        let act = self.config.hidden_activation;
        let mut sq = 0.0;
        {
            let out = &ws.acts[n_layers];
            let d = &mut ws.deltas[n_layers - 1];
            for k in 0..OUTPUT_WIDTH {
                let e = out[k] - target[k];
                sq += e * e;
                d[k] = 2.0 * e * scale;
            }
        }
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let g = &mut grads.layers[l];
            let input = &ws.acts[l];
            let (lower, upper) = ws.deltas.split_at_mut(l);
            let delta = &upper[0];
            for (o, &d) in delta.iter().enumerate().take(layer.n_out) {
                g.biases[o] += d;
                let grow = &mut g.weights[o * layer.n_in..(o + 1) * layer.n_in];
                for (gw, a) in grow.iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l > 0 {
                let prev = &mut lower[l - 1];
                prev.fill(0.0);
                for (o, &d) in delta.iter().enumerate().take(layer.n_out) {
                    for (p, w) in prev.iter_mut().zip(layer.row(o)) {
                        *p += w * d;
                    }
                }
                for (p, a) in prev.iter_mut().zip(input) {
                    *p *= act.derivative_from_output(*a);
                }
            }
        }
        sq
    }

    /// Mean squared error over the batch and both outputs, with its exact gradient.
    pub fn loss_and_gradients(&self, inputs: &[Vec<f64>], targets: &[[f64; 2]]) -> Result<(f64, Gradients)> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Data(format!(
                "batch needs matching non-empty inputs/targets ({} vs {})",
                inputs.len(),
                targets.len()
            )));
        }
        let mut grads = Gradients::zeros_like(self);
        let mut ws = Workspace::new(self);
        let scale = 1.0 / (inputs.len() * OUTPUT_WIDTH) as f64;
        let mut sq = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            if x.len() != self.input_width() {
                return Err(Error::DimensionMismatch {
                    expected: self.input_width(),
                    actual: x.len(),
                });
            }
            ws.acts[0].copy_from_slice(x);
            sq += self.accumulate(&mut ws, t, scale, &mut grads);
        }
        Ok((sq * scale, grads))
    }

    pub fn normalizer(&self) -> Result<&NormalizationStats> {
        self.normalizer
            .as_ref()
            .ok_or_else(|| Error::Config("model has no bound normalizer".into()))
    }

    /// Position in meters for raw (unnormalised) features.
    pub fn predict(&self, features: &[f64]) -> Result<[f64; 2]> {
        let stats = self.normalizer()?;
        let z = stats.apply(features)?;
        Ok(stats.invert_label(self.forward(&z)?))
    }

    pub fn predict_batch(&self, vectors: &[FeatureVector]) -> Result<Vec<[f64; 2]>> {
        let stats = self.normalizer()?;
        let mut ws = Workspace::new(self);
        vectors
            .iter()
            .map(|v| {
                stats.apply_in_place({
                    ws.acts[0].clear();
                    ws.acts[0].extend_from_slice(&v.values);
                    &mut ws.acts[0]
                })?;
                self.forward_into(&mut ws);
                let out = ws.acts.last().expect("output layer");
                Ok(stats.invert_label([out[0], out[1]]))
            })
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Adam moment estimates for every parameter.
pub struct Adam {
    params: AdamParams,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(model: &MlpModel, params: AdamParams) -> Self {
        Adam {
            params,
            step: 0,
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
        }
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients) {
        self.step += 1;
        let p = self.params;
        let bc1 = 1.0 - p.beta1.powi(self.step);
        let bc2 = 1.0 - p.beta2.powi(self.step);
        for (l, layer) in model.layers.iter_mut().enumerate() {
            let g = &grads.layers[l];
            let m = &mut self.m.layers[l];
            let v = &mut self.v.layers[l];
            let update = |w: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..w.len() {
                    m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g[i];
                    v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g[i] * g[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    w[i] -= p.learning_rate * m_hat / (v_hat.sqrt() + p.epsilon);
                }
            };
            update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights);
            update(&mut layer.biases, &g.biases, &mut m.biases, &mut v.biases);
        }
    }
}

/// Fits the normaliser on `train`, then runs mini-batch Adam with early stopping.
///
/// The epoch loss is the sample-weighted mean of the mini-batch losses seen during the
/// epoch. The model from the last epoch is returned (no rollback to the best epoch).
pub fn train(mut model: MlpModel, train: &[FeatureVector], config: &MlpConfig) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    let stats = fit_normalizer(train)?;
    let width = model.input_width();
    if stats.width() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: stats.width(),
        });
    }
    let n = train.len();
    let mut xs = Vec::with_capacity(n * width);
    let mut ys = Vec::with_capacity(n * OUTPUT_WIDTH);
    for v in train {
        let start = xs.len();
        xs.extend_from_slice(&v.values);
        stats.apply_in_place(&mut xs[start..])?;
        ys.extend_from_slice(&stats.normalize_label(v.label));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    shuffle_rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut adam = Adam::new(&model, config.adam);
    let mut grads = Gradients::zeros_like(&model);
    let mut ws = Workspace::new(&model);
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    let mut stopped_early = false;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_sq = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let scale = 1.0 / (batch.len() * OUTPUT_WIDTH) as f64;
            for &i in batch {
                ws.acts[0].copy_from_slice(&xs[i * width..(i + 1) * width]);
                epoch_sq += model.accumulate(&mut ws, &ys[i * OUTPUT_WIDTH..(i + 1) * OUTPUT_WIDTH], scale, &mut grads);
            }
            adam.step(&mut model, &grads);
        }
        let loss = epoch_sq / (n * OUTPUT_WIDTH) as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        history.push(loss);
        if epoch == 0 || loss < best - config.min_delta {
            best = loss.min(best);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    model.config = config.clone();
    model.normalizer = Some(stats);
    model.loss_history = history.clone();
    let report = TrainReport {
        epochs_run: history.len(),
        final_loss: history.last().copied().unwrap_or(f64::NAN),
        loss_history: history,
        stopped_early,
    };
    Ok((model, report))
}

/// `init` followed by `train`.
pub fn fit(config: &MlpConfig, train_set: &[FeatureVector]) -> Result<(MlpModel, TrainReport)> {
    let width = train_set
        .first()
        .ok_or_else(|| Error::Data("empty training set".into()))?
        .values
        .len();
    train(init(config, width)?, train_set, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(widths: Vec<usize>) -> MlpConfig {
        MlpConfig {
            hidden_layer_widths: widths,
            ..MlpConfig::default()
        }
    }

    #[test]
    fn init_is_seeded_glorot() {
        let a = init(&cfg(vec![64]), 7).unwrap();
        let b = init(&cfg(vec![64]), 7).unwrap();
        assert_eq!(a, b);
        assert!(a.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        let limit = glorot_limit(7, 64);
        assert!((limit - 0.2907).abs() < 1e-4);
        assert!(a.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert_eq!(a.layers.last().unwrap().n_out, 2);
        let c = init(&MlpConfig { rng_seed: 1, ..cfg(vec![64]) }, 7).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut m = init(&cfg(vec![4]), 3).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
        }
        m.layers[1].biases = vec![1.5, -2.0];
        assert_eq!(m.forward(&[9.0, -3.0, 0.1]).unwrap(), [1.5, -2.0]);
        assert!(matches!(m.forward(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hand_computed_forward() {
        let mut m = init(&cfg(vec![1]), 1).unwrap();
        m.layers[0].weights = vec![0.5];
        m.layers[0].biases = vec![0.1];
        m.layers[1].weights = vec![2.0, -1.0];
        m.layers[1].biases = vec![0.3, 0.0];
        let h = (0.5f64 * 0.8 + 0.1).tanh();
        let out = m.forward(&[0.8]).unwrap();
        assert!((out[0] - (2.0 * h + 0.3)).abs() < 1e-12);
        assert!((out[1] + h).abs() < 1e-12);
        assert!((h - 0.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn tanh_net_is_odd_without_biases() {
        let m = init(&cfg(vec![5, 4]), 3).unwrap();
        let x = [0.3, -1.2, 0.7];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = m.forward(&x).unwrap();
        let b = m.forward(&neg).unwrap();
        assert!((a[0] + b[0]).abs() < 1e-14 && (a[1] + b[1]).abs() < 1e-14);
    }

    #[test]
    fn perfect_predictions_have_zero_loss_and_gradient() {
        let m = init(&cfg(vec![3]), 2).unwrap();
        let xs = vec![vec![0.1, 0.2], vec![-0.5, 0.4]];
        let ts: Vec<[f64; 2]> = xs.iter().map(|x| m.forward(x).unwrap()).collect();
        let (loss, g) = m.loss_and_gradients(&xs, &ts).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn duplicated_batch_same_loss_and_gradients() {
        let m = init(&cfg(vec![4]), 2).unwrap();
        let xs = vec![vec![0.1, 0.2], vec![-0.5, 0.4], vec![1.0, -1.0]];
        let ts = vec![[0.3, 0.1], [-0.2, 0.9], [0.0, 0.5]];
        let (l1, g1) = m.loss_and_gradients(&xs, &ts).unwrap();
        let xs2: Vec<_> = xs.iter().chain(&xs).cloned().collect();
        let ts2: Vec<_> = ts.iter().chain(&ts).cloned().collect();
        let (l2, g2) = m.loss_and_gradients(&xs2, &ts2).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut m = init(&cfg(vec![4]), 2).unwrap();
        let before = m.clone();
        let zero = Gradients::zeros_like(&m);
        let mut opt = Adam::new(&m, AdamParams::default());
        opt.step(&mut m, &zero);
        assert_eq!(m, before);
    }

    #[test]
    fn input_permutation_consistency() {
        let m = init(&cfg(vec![6]), 3).unwrap();
        let perm = [2usize, 0, 1];
        let mut p = m.clone();
        for o in 0..6 {
            for (new_i, &old_i) in perm.iter().enumerate() {
                p.layers[0].weights[o * 3 + new_i] = m.layers[0].weights[o * 3 + old_i];
            }
        }
        let x = [0.4, -0.9, 1.3];
        let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let a = m.forward(&x).unwrap();
        let b = p.forward(&px).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }

    fn toy_set() -> Vec<FeatureVector> {
        (0..10)
            .map(|i| {
                let t = i as f64;
                FeatureVector {
                    values: vec![t, (t * 0.7).sin()],
                    label: [3.0 * t - 2.0, (t * 0.5).cos() * 10.0],
                }
            })
            .collect()
    }

    #[test]
    fn memorizes_ten_samples() {
        let config = MlpConfig {
            hidden_layer_widths: vec![32],
            max_epochs: 500,
            batch_size: 10,
            adam: AdamParams {
                learning_rate: 1e-2,
                ..AdamParams::default()
            },
            min_delta: 0.0,
            patience: 500,
            ..MlpConfig::default()
        };
        let (_, report) = fit(&config, &toy_set()).unwrap();
        assert!(report.final_loss < 1e-3, "final loss {}", report.final_loss);
    }

    #[test]
    fn stopping_rule_patience_one_infinite_delta() {
        let config = MlpConfig {
            patience: 1,
            min_delta: f64::INFINITY,
            ..cfg(vec![4])
        };
        let (m, report) = fit(&config, &toy_set()).unwrap();
        assert_eq!(report.epochs_run, 2);
        assert!(report.stopped_early);
        assert_eq!(m.loss_history.len(), 2);
    }

    #[test]
    fn constant_labels_predict_constant() {
        let data: Vec<_> = (0..200)
            .map(|i| FeatureVector {
                values: vec![i as f64 * 0.1, (i as f64).sin()],
                label: [42.0, -7.0],
            })
            .collect();
        let (m, _) = fit(&cfg(vec![8]), &data).unwrap();
        for x in [[0.0, 0.0], [5.0, 0.3], [20.0, -1.0]] {
            let p = m.predict(&x).unwrap();
            assert!((p[0] - 42.0).abs() < 0.1 && (p[1] + 7.0).abs() < 0.1, "{p:?}");
        }
    }

    #[test]
    fn predict_requires_normalizer_and_matches_batch() {
        let data = toy_set();
        let untrained = init(&cfg(vec![4]), 2).unwrap();
        assert!(untrained.predict(&[0.0, 0.0]).is_err());
        let (m, _) = fit(&cfg(vec![4]), &data).unwrap();
        let batch = m.predict_batch(&data).unwrap();
        for (v, p) in data.iter().zip(&batch) {
            assert_eq!(m.predict(&v.values).unwrap(), *p);
            let stats = m.normalizer.as_ref().unwrap();
            let manual = stats.invert_label(m.forward(&stats.apply(&v.values).unwrap()).unwrap());
            assert_eq!(manual, *p);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (a, ra) = fit(&cfg(vec![8]), &toy_set()).unwrap();
        let (b, rb) = fit(&cfg(vec![8]), &toy_set()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn divergence_is_reported() {
        let config = MlpConfig {
            adam: AdamParams {
                learning_rate: f64::MAX,
                ..AdamParams::default()
            },
            hidden_activation: Activation::Relu,
            ..cfg(vec![4])
        };
        assert!(matches!(fit(&config, &toy_set()), Err(Error::Divergence { .. })));
    }
}
