//! Feedforward sigmoid network with one-hot thickness codes, trained by
//! per-sample backpropagation of the mean squared error.
//!
//! Every layer, the output layer included, applies an affine map followed by
//! the logistic sigmoid. Weights are stored row-major as `outputs x inputs`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ThicknessGrid, FEATURE_COUNT};
use crate::detector::RngState;
use crate::error::{Error, Result};

/// Input, two hidden layers, output.
pub const ARCHITECTURE: [usize; 4] = [FEATURE_COUNT, 64, 64, 20];

const MODEL_MAGIC: &str = "MLPFRINGE 1";

pub fn sigmoid(z: f64) -> f64 {
    // evaluated on the side where exp() cannot overflow
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Row-major `outputs x inputs`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.outputs).map(|o| {
            let z = self.biases[o] + self.row(o).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            sigmoid(z)
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layers: Vec<Layer>,
}

impl MlpNetwork {
    /// Weights and biases drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        let mut rng = RngState::new(seed);
        for layer in &mut net.layers {
            let bound = (1.0 / layer.inputs as f64).sqrt();
            let rng = rng.inner();
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    /// The 40-64-64-20 network.
    pub fn standard(seed: u64) -> Self {
        Self::new(&ARCHITECTURE, seed).expect("architecture is valid")
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::Validation(format!(
                "layer sizes {layer_sizes:?} need at least two nonzero entries"
            )));
        }
        Ok(Self {
            layers: layer_sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::dimension("network input", self.input_size(), x.len()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Activations of every layer, input first.
    fn trace(&self, x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.resize_with(self.layers.len() + 1, Vec::new);
        acts[0].clear();
        acts[0].extend_from_slice(x);
        for (i, layer) in self.layers.iter().enumerate() {
            let (head, tail) = acts.split_at_mut(i + 1);
            layer.forward_into(&head[i], &mut tail[0]);
        }
    }

    /// Gradient of [`mse_loss`] with respect to every weight and bias.
    pub fn gradient(&self, x: &[f64], target: &ClassCode) -> Result<Gradients> {
        self.check_input(x)?;
        check_target(self.output_size(), target)?;
        let mut scratch = Scratch::default();
        let mut grads = Gradients::zeros_like(self);
        self.backprop(x, target.one_hot(), &mut scratch, &mut grads);
        Ok(grads)
    }

    /// Fills `grads` and returns the loss at `x`. Shapes are checked by callers.
    fn backprop(&self, x: &[f64], target: &[f64], s: &mut Scratch, grads: &mut Gradients) -> f64 {
        self.trace(x, &mut s.acts);
        let out = &s.acts[self.layers.len()];
        let n = out.len() as f64;
        let loss = out.iter().zip(target).map(|(o, t)| (o - t).powi(2)).sum::<f64>() / n;

        // delta = dL/dz for the current layer
        s.delta.clear();
        s.delta
            .extend(out.iter().zip(target).map(|(o, t)| 2.0 * (o - t) / n * o * (1.0 - o)));

        for (li, layer) in self.layers.iter().enumerate().rev() {
            let input = &s.acts[li];
            let g = &mut grads.layers[li];
            for (o, d) in s.delta.iter().enumerate() {
                g.biases[o] = *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, a) in row.iter_mut().zip(input) {
                    *w = d * a;
                }
            }
            if li > 0 {
                s.next.clear();
                s.next.extend((0..layer.inputs).map(|i| {
                    let back: f64 = (0..layer.outputs)
                        .map(|o| layer.weights[o * layer.inputs + i] * s.delta[o])
                        .sum();
                    back * input[i] * (1.0 - input[i])
                }));
                std::mem::swap(&mut s.delta, &mut s.next);
            }
        }
        loss
    }

    fn descend(&mut self, grads: &Gradients, learning_rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, d) in layer.weights.iter_mut().zip(&g.weights) {
                *w -= learning_rate * d;
            }
            for (b, d) in layer.biases.iter_mut().zip(&g.biases) {
                *b -= learning_rate * d;
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }
}

#[derive(Default)]
struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next: Vec<f64>,
}

/// Parameter-shaped gradient, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Gradients {
    fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }
}

/// One-hot output code for a training class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCode {
    class_index: usize,
    thickness_nm: f64,
    one_hot: Vec<f64>,
}

impl ClassCode {
    pub fn new(class_index: usize, grid: &ThicknessGrid) -> Result<Self> {
        if class_index >= grid.count() {
            return Err(Error::Validation(format!(
                "class {class_index} outside a {}-class grid",
                grid.count()
            )));
        }
        let mut one_hot = vec![0.0; grid.count()];
        one_hot[class_index] = 1.0;
        Ok(Self {
            class_index,
            thickness_nm: grid.value(class_index),
            one_hot,
        })
    }

    pub fn for_thickness(nm: f64, grid: &ThicknessGrid) -> Result<Self> {
        let i = grid.index_of(nm).ok_or_else(|| {
            Error::Validation(format!("{nm} nm is not a class of grid {grid}"))
        })?;
        Self::new(i, grid)
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn thickness_nm(&self) -> f64 {
        self.thickness_nm
    }

    pub fn one_hot(&self) -> &[f64] {
        &self.one_hot
    }
}

fn check_target(outputs: usize, target: &ClassCode) -> Result<()> {
    if target.one_hot.len() != outputs {
        return Err(Error::dimension("target code", outputs, target.one_hot.len()));
    }
    Ok(())
}

/// `(1/n) * sum_j (outputs[j] - one_hot[j])^2`.
pub fn mse_loss(outputs: &[f64], target: &ClassCode) -> Result<f64> {
    check_target(outputs.len(), target)?;
    let n = outputs.len() as f64;
    Ok(outputs
        .iter()
        .zip(target.one_hot())
        .map(|(o, t)| (o - t).powi(2))
        .sum::<f64>()
        / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Training stops once the mean per-sample loss of an epoch reaches this.
    pub target_mse: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2.0,
            max_epochs: 50_000,
            target_mse: 1e-4,
            seed: 7,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Validation(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.target_mse > 0.0) {
            return Err(Error::Validation(format!(
                "target MSE must be positive, got {}",
                self.target_mse
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Validation("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-sample stochastic gradient descent.
///
/// Returns the trained network and the mean loss of every epoch, measured on
/// each sample just before its update. Reaching `max_epochs` without meeting
/// `target_mse` is not an error; inspect the last history entry.
pub fn train(
    mut net: MlpNetwork,
    train_set: &Dataset,
    grid: &ThicknessGrid,
    cfg: &TrainConfig,
) -> Result<(MlpNetwork, Vec<f64>)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if net.output_size() != grid.count() {
        return Err(Error::dimension("network outputs vs grid classes", grid.count(), net.output_size()));
    }
    let samples = train_set
        .records
        .iter()
        .map(|r| {
            net.check_input(r.features.as_slice())?;
            Ok((r.features.as_slice(), ClassCode::for_thickness(r.thickness_nm, grid)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = RngState::new(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut scratch = Scratch::default();
    let mut grads = Gradients::zeros_like(&net);
    let mut history = Vec::new();

    for _ in 0..cfg.max_epochs {
        if cfg.shuffle {
            order.shuffle(rng.inner());
        }
        let mut total = 0.0;
        for &i in &order {
            let (x, code) = &samples[i];
            total += net.backprop(x, code.one_hot(), &mut scratch, &mut grads);
            net.descend(&grads, cfg.learning_rate);
        }
        let mean = total / samples.len() as f64;
        history.push(mean);
        if !mean.is_finite() || !net.all_finite() {
            return Err(Error::Validation("training diverged to non-finite parameters".into()));
        }
        if mean <= cfg.target_mse {
            break;
        }
    }
    Ok((net, history))
}

fn check_outputs(outputs: &[f64], grid: &ThicknessGrid) -> Result<()> {
    if outputs.len() != grid.count() {
        return Err(Error::dimension("decoder input", grid.count(), outputs.len()));
    }
    Ok(())
}

/// Thickness of the largest output; ties go to the lower class.
pub fn decode_argmax(outputs: &[f64], grid: &ThicknessGrid) -> Result<f64> {
    check_outputs(outputs, grid)?;
    let mut best = 0;
    for (j, &o) in outputs.iter().enumerate().skip(1) {
        if o > outputs[best] {
            best = j;
        }
    }
    Ok(grid.value(best))
}

/// Output-weighted mean of the class thicknesses.
pub fn decode_expectation(outputs: &[f64], grid: &ThicknessGrid) -> Result<f64> {
    check_outputs(outputs, grid)?;
    if outputs.iter().any(|o| !(o.is_finite() && *o >= 0.0)) {
        return Err(Error::Validation("expectation decoding needs finite nonnegative outputs".into()));
    }
    let mass: f64 = outputs.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Validation("expectation decoding of an all-zero output".into()));
    }
    let weighted: f64 = outputs.iter().enumerate().map(|(j, o)| o * grid.value(j)).sum();
    Ok(weighted / mass)
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{v:.16e}"));
    }
    out.push('\n');
}

/// Text model file: magic line, layer sizes, then per layer a bias line and
/// one weight line per output node. Values carry 17 significant digits.
pub fn save_model(net: &MlpNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    text.push_str(MODEL_MAGIC);
    text.push('\n');
    let sizes: Vec<String> = net.layer_sizes().iter().map(|s| s.to_string()).collect();
    text.push_str(&sizes.join(" "));
    text.push('\n');
    for layer in &net.layers {
        push_row(&mut text, &layer.biases);
        for o in 0..layer.outputs {
            push_row(&mut text, layer.row(o));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

struct ModelReader<'a> {
    path: &'a Path,
    lines: std::iter::Enumerate<std::io::Lines<BufReader<File>>>,
    line_no: u64,
}

impl ModelReader<'_> {
    fn err(&self, line: u64, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<String> {
        match self.lines.next() {
            Some((i, Ok(line))) => {
                self.line_no = i as u64 + 1;
                Ok(line)
            }
            Some((_, Err(e))) => Err(Error::io(self.path, e)),
            None => Err(self.err(self.line_no + 1, 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    /// Whitespace-separated numbers with the 1-based column of each token.
    fn numbers<T: std::str::FromStr>(&mut self, what: &str, expected: usize) -> Result<Vec<T>> {
        let line = self.next_line(what)?;
        let mut values = Vec::with_capacity(expected);
        let mut col = 0;
        for token in line.split(' ') {
            let column = col + 1;
            col += token.len() + 1;
            if token.is_empty() {
                return Err(self.err(self.line_no, column, format!("empty field in {what}")));
            }
            let v = token
                .parse()
                .map_err(|_| self.err(self.line_no, column, format!("`{token}` is not a valid number in {what}")))?;
            values.push(v);
        }
        if values.len() != expected {
            return Err(self.err(
                self.line_no,
                line.len() + 1,
                format!("{what}: expected {expected} values, found {}", values.len()),
            ));
        }
        Ok(values)
    }
}

/// Reads a model written by [`save_model`] and checks it against
/// [`ARCHITECTURE`]. Nothing is returned unless the whole file parses.
pub fn load_model(path: impl AsRef<Path>) -> Result<MlpNetwork> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = ModelReader {
        path,
        lines: BufReader::new(file).lines().enumerate(),
        line_no: 0,
    };
    let magic = r.next_line("magic line")?;
    if magic != MODEL_MAGIC {
        return Err(r.err(1, 1, format!("expected `{MODEL_MAGIC}`, found `{magic}`")));
    }
    let sizes: Vec<usize> = {
        let line = r.next_line("layer sizes")?;
        line.split(' ')
            .map(|t| t.parse().map_err(|_| r.err(2, 1, format!("bad layer size `{t}`"))))
            .collect::<Result<_>>()?
    };
    if sizes.len() != ARCHITECTURE.len() {
        return Err(Error::dimension("layer count", ARCHITECTURE.len(), sizes.len()));
    }
    for (i, (&found, &expected)) in sizes.iter().zip(&ARCHITECTURE).enumerate() {
        if found != expected {
            return Err(Error::dimension(format!("layer {i} width"), expected, found));
        }
    }
    let mut net = MlpNetwork::zeros(&sizes)?;
    for (li, layer) in net.layers.iter_mut().enumerate() {
        layer.biases = r.numbers(&format!("layer {li} biases"), layer.outputs)?;
        for o in 0..layer.outputs {
            let row: Vec<f64> = r.numbers(&format!("layer {li} weights of node {o}"), layer.inputs)?;
            layer.weights[o * layer.inputs..(o + 1) * layer.inputs].copy_from_slice(&row);
        }
    }
    if let Some((i, _)) = r.lines.next() {
        return Err(r.err(i as u64 + 1, 1, "unexpected trailing content"));
    }
    if !net.all_finite() {
        return Err(Error::Validation(format!("{}: non-finite parameter", path.display())));
    }
    Ok(net)
}
