//! Fully connected feedforward network trained with Adam.
//!
//! Hidden layers use ReLU, the output layer is affine. Parameters live in
//! one flat vector; layer `k` stores its `n_{k+1} × n_k` weight matrix row
//! by row, followed by its bias.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::io::{fmt_real, LineReader};
use crate::{Error, Result};

const SCALE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("relu")
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Self::Relu),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    widths: Vec<usize>,
    params: Vec<f64>,
    activation: Activation,
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::invalid("a network needs at least input and output widths"));
    }
    if widths.contains(&0) {
        return Err(Error::invalid(format!("zero layer width in {widths:?}")));
    }
    Ok(())
}

impl MlpModel {
    /// All-zero parameters.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        check_widths(widths)?;
        let count = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self { widths: widths.to_vec(), params: vec![0.0; count], activation: Activation::Relu })
    }

    /// He initialisation: weights from N(0, 2/fan_in), zero biases.
    pub fn init(widths: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..model.n_layers() {
            let fan_in = model.widths[k];
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let (w, _) = model.layer_mut(k);
            w.iter_mut().for_each(|x| *x = normal.sample(&mut rng));
        }
        Ok(model)
    }

    pub fn from_params(widths: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut model = Self::zeros(widths)?;
        if params.len() != model.params.len() {
            return Err(Error::dims("network parameters", model.params.len(), params.len()));
        }
        model.params = params;
        Ok(model)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of affine layers `K`.
    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("non-empty widths")
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offset(&self, k: usize) -> usize {
        self.widths[..=k].windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Weights (row-major) and bias of layer `k`.
    pub fn layer(&self, k: usize) -> (&[f64], &[f64]) {
        let (start, rows, cols) = (self.offset(k), self.widths[k + 1], self.widths[k]);
        let (w, rest) = self.params[start..].split_at(rows * cols);
        (w, &rest[..rows])
    }

    pub fn layer_mut(&mut self, k: usize) -> (&mut [f64], &mut [f64]) {
        let (start, rows, cols) = (self.offset(k), self.widths[k + 1], self.widths[k]);
        let (w, rest) = self.params[start..].split_at_mut(rows * cols);
        (w, &mut rest[..rows])
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::dims("network input", self.input_dim(), x.len()));
        }
        let mut a = x.to_vec();
        for k in 0..self.n_layers() {
            let mut z = vec![0.0; self.widths[k + 1]];
            self.affine(k, &a, &mut z);
            if k + 1 < self.n_layers() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        Ok(a)
    }

    fn affine(&self, k: usize, a: &[f64], out: &mut [f64]) {
        let (w, b) = self.layer(k);
        let cols = a.len();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &w[i * cols..(i + 1) * cols];
            *o = b[i] + row.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
        }
    }

    /// Mean squared error over the batch (averaged over rows and outputs)
    /// and its gradient with respect to [`Self::params`].
    pub fn loss_and_grad(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; self.n_params()];
        let loss = self.accumulate(inputs, targets, &mut grad)?;
        Ok((loss, grad))
    }

    fn accumulate(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>], grad: &mut [f64]) -> Result<f64> {
        if inputs.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::dims("batch targets", inputs.len(), targets.len()));
        }
        grad.fill(0.0);
        let layers = self.n_layers();
        let out_dim = self.output_dim();
        let scale = 1.0 / (inputs.len() * out_dim) as f64;
        // acts[k] is the input to layer k; acts[layers] is the output
        let mut acts: Vec<Vec<f64>> = self.widths.iter().map(|&w| vec![0.0; w]).collect();
        let max_w = *self.widths.iter().max().expect("non-empty");
        let (mut delta, mut prev) = (vec![0.0; max_w], vec![0.0; max_w]);
        let offsets: Vec<usize> = (0..layers).map(|k| self.offset(k)).collect();
        let mut loss = 0.0;
        for (x, y) in inputs.iter().zip(targets) {
            if x.len() != self.input_dim() {
                return Err(Error::dims("network input", self.input_dim(), x.len()));
            }
            if y.len() != out_dim {
                return Err(Error::dims("network target", out_dim, y.len()));
            }
            acts[0].copy_from_slice(x);
            for k in 0..layers {
                let (lo, hi) = acts.split_at_mut(k + 1);
                self.affine(k, &lo[k], &mut hi[0]);
                if k + 1 < layers {
                    hi[0].iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
            for (i, (o, t)) in acts[layers].iter().zip(y).enumerate() {
                let r = o - t;
                loss += r * r;
                delta[i] = 2.0 * scale * r;
            }
            for k in (0..layers).rev() {
                let (rows, cols) = (self.widths[k + 1], self.widths[k]);
                let a = &acts[k];
                let (w, _) = self.layer(k);
                let g = &mut grad[offsets[k]..offsets[k] + rows * cols + rows];
                let (gw, gb) = g.split_at_mut(rows * cols);
                for i in 0..rows {
                    let d = delta[i];
                    if d == 0.0 {
                        continue;
                    }
                    gb[i] += d;
                    for (gij, aj) in gw[i * cols..(i + 1) * cols].iter_mut().zip(a) {
                        *gij += d * aj;
                    }
                }
                if k > 0 {
                    prev[..cols].fill(0.0);
                    for i in 0..rows {
                        let d = delta[i];
                        if d == 0.0 {
                            continue;
                        }
                        for (pj, wij) in prev[..cols].iter_mut().zip(&w[i * cols..(i + 1) * cols]) {
                            *pj += wij * d;
                        }
                    }
                    // ReLU derivative, taken as 0 at exactly 0
                    for j in 0..cols {
                        delta[j] = if a[j] > 0.0 { prev[j] } else { 0.0 };
                    }
                }
            }
        }
        Ok(loss * scale)
    }

    /// Mean squared error without gradients.
    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::invalid("mse needs matching, non-empty inputs and targets"));
        }
        let mut total = 0.0;
        for (x, y) in inputs.iter().zip(targets) {
            let out = self.forward(x)?;
            if y.len() != out.len() {
                return Err(Error::dims("network target", out.len(), y.len()));
            }
            total += out.iter().zip(y).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
        }
        Ok(total / (inputs.len() * self.output_dim()) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Initial Adam step size.
    pub learning_rate: f64,
    /// Step size in the last epoch; the rate decays geometrically in between.
    pub final_learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            final_learning_rate: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 5000,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        let rates = self.learning_rate > 0.0 && self.final_learning_rate > 0.0 && self.epsilon > 0.0;
        if !(rates && unit(self.beta1) && unit(self.beta2)) {
            return Err(Error::invalid(format!("invalid Adam parameters {self:?}")));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }

    /// Step size used during `epoch` (1-based).
    pub fn rate_at(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.learning_rate;
        }
        let t = (epoch.saturating_sub(1)) as f64 / (self.epochs - 1) as f64;
        self.learning_rate * (self.final_learning_rate / self.learning_rate).powf(t)
    }
}

/// Adam moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(model: &mut MlpModel, state: &mut AdamState, grad: &[f64], config: &TrainConfig) -> Result<()> {
    let n = model.n_params();
    if grad.len() != n || state.m.len() != n || state.v.len() != n {
        return Err(Error::dims("Adam state", n, grad.len()));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for (((p, m), v), g) in model.params.iter_mut().zip(&mut state.m).zip(&mut state.v).zip(grad) {
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        *p -= config.learning_rate * (*m / c1) / ((*v / c2).sqrt() + config.epsilon);
    }
    Ok(())
}

/// Parameter/coefficient pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::dims("dataset targets", inputs.len(), targets.len()));
        }
        for (rows, what) in [(&inputs, "dataset inputs"), (&targets, "dataset targets")] {
            if let Some(first) = rows.first() {
                if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
                    return Err(Error::dims(what, first.len(), bad.len()));
                }
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&k| k >= self.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.len() });
        }
        Ok(Self {
            inputs: indices.iter().map(|&k| self.inputs[k].clone()).collect(),
            targets: indices.iter().map(|&k| self.targets[k].clone()).collect(),
        })
    }
}

/// Shuffled split into `(train, test)` index lists; the test side has
/// `floor(len * test_fraction)` rows.
pub fn split_indices(len: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction {test_fraction} must lie in (0,1)")));
    }
    let n_test = (len as f64 * test_fraction + 1e-9).floor() as usize;
    if n_test == 0 || n_test == len {
        return Err(Error::invalid(format!("split of {len} rows at {test_fraction} leaves an empty side")));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(len - n_test);
    Ok((idx, test))
}

pub fn split_dataset(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.len(), test_fraction, seed)?;
    Ok((data.subset(&train)?, data.subset(&test)?))
}

/// Affine input map to the unit box and per-coefficient target scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub target_scale: Vec<f64>,
}

impl Normalization {
    /// Inputs mapped from `[lo, hi]` to `[0, 1]`. Targets are divided by one
    /// common scale, the root of the summed per-coefficient variances over
    /// `data`, so trailing POD coefficients keep their small weight.
    pub fn fit(data: &Dataset, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("cannot normalise an empty dataset"));
        }
        if lo.len() != data.input_dim() || hi.len() != data.input_dim() {
            return Err(Error::dims("normalisation bounds", data.input_dim(), lo.len()));
        }
        let n = data.len() as f64;
        let total_var: f64 = (0..data.output_dim())
            .map(|j| {
                let mean = data.targets.iter().map(|t| t[j]).sum::<f64>() / n;
                data.targets.iter().map(|t| (t[j] - mean).powi(2)).sum::<f64>() / n
            })
            .sum();
        let target_scale = vec![total_var.sqrt().max(SCALE_FLOOR); data.output_dim()];
        Ok(Self {
            input_shift: lo.to_vec(),
            input_scale: lo.iter().zip(hi).map(|(l, h)| (h - l).max(SCALE_FLOOR)).collect(),
            target_scale,
        })
    }

    pub fn input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.input_shift).zip(&self.input_scale).map(|((v, s), c)| (v - s) / c).collect()
    }

    pub fn target(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.target_scale).map(|(v, c)| v / c).collect()
    }

    pub fn output(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.target_scale).map(|(v, c)| v * c).collect()
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        Dataset {
            inputs: data.inputs.iter().map(|x| self.input(x)).collect(),
            targets: data.targets.iter().map(|y| self.target(y)).collect(),
        }
    }

    /// Parameter-space bounds this normalisation maps onto the unit box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = self.input_shift.iter().zip(&self.input_scale).map(|(s, c)| s + c).collect();
        (self.input_shift.clone(), hi)
    }
}

/// Per-epoch mean squared errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub test: Vec<f64>,
}

/// Mini-batch Adam on shuffled data. `train_mse` for an epoch is the mean of
/// its batch losses; the test loss is evaluated after the epoch.
pub fn train(
    train_set: &Dataset,
    test_set: Option<&Dataset>,
    widths: &[usize],
    config: &TrainConfig,
) -> Result<(MlpModel, LossHistory)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let mut model = MlpModel::init(widths, config.seed)?;
    if train_set.input_dim() != model.input_dim() || train_set.output_dim() != model.output_dim() {
        return Err(Error::invalid(format!(
            "widths {widths:?} do not match data of shape {} -> {}",
            train_set.input_dim(),
            train_set.output_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut state = AdamState::new(model.n_params());
    let mut grad = vec![0.0; model.n_params()];
    let mut history = LossHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let (mut xb, mut yb) = (Vec::new(), Vec::new());
    for epoch in 1..=config.epochs {
        let step = TrainConfig { learning_rate: config.rate_at(epoch), ..*config };
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            xb.clear();
            yb.clear();
            xb.extend(chunk.iter().map(|&k| train_set.inputs[k].clone()));
            yb.extend(chunk.iter().map(|&k| train_set.targets[k].clone()));
            let loss = model.accumulate(&xb, &yb, &mut grad)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            total += loss * chunk.len() as f64;
            adam_step(&mut model, &mut state, &grad, &step)?;
        }
        history.train.push(total / train_set.len() as f64);
        if let Some(test) = test_set.filter(|t| !t.is_empty()) {
            let loss = model.mse(&test.inputs, &test.targets)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            history.test.push(loss);
        }
    }
    Ok((model, history))
}

/// A trained network with the normalisation and settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNetwork {
    pub model: MlpModel,
    pub normalization: Normalization,
    pub config: TrainConfig,
    /// Fingerprint of the POD basis whose coefficients the network predicts.
    pub basis_fingerprint: String,
}

impl TrainedNetwork {
    /// Maps physical parameters to physical coefficients.
    pub fn predict(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.normalization.output(&self.model.forward(&self.normalization.input(params))?))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.model;
        let widths: Vec<String> = m.widths.iter().map(ToString::to_string).collect();
        writeln!(w, "mlp {} {} {}", m.widths.len(), widths.join(" "), m.activation)?;
        writeln!(w, "basis {}", self.basis_fingerprint)?;
        let c = &self.config;
        writeln!(
            w,
            "train {} {} {} {} {} {} {} {}",
            fmt_real(c.learning_rate),
            fmt_real(c.final_learning_rate),
            fmt_real(c.beta1),
            fmt_real(c.beta2),
            fmt_real(c.epsilon),
            c.epochs,
            c.batch_size,
            c.seed
        )?;
        let line = |v: &[f64]| v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" ");
        let nz = &self.normalization;
        writeln!(w, "normalization {} {}", nz.input_shift.len(), nz.target_scale.len())?;
        writeln!(w, "{}", line(&nz.input_shift))?;
        writeln!(w, "{}", line(&nz.input_scale))?;
        writeln!(w, "{}", line(&nz.target_scale))?;
        for k in 0..m.n_layers() {
            let (wk, bk) = m.layer(k);
            for row in wk.chunks(m.widths[k]) {
                writeln!(w, "{}", line(row))?;
            }
            writeln!(w, "{}", line(bk))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = LineReader::new(r);
        let (ln, head) = lines.next_tokens()?;
        if head.len() < 2 || head[0] != "mlp" {
            return Err(Error::parse(ln, "expected 'mlp <count> <widths> <activation>'"));
        }
        let count: usize = lines.parse_at(ln, &head[1])?;
        if head.len() != count + 3 {
            return Err(Error::parse(ln, format!("expected {count} widths and an activation")));
        }
        let widths = head[2..2 + count].iter().map(|t| lines.parse_at(ln, t)).collect::<Result<Vec<usize>>>()?;
        let activation: Activation = head[2 + count].parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
        let mut model = MlpModel::zeros(&widths).map_err(|e| Error::parse(ln, e.to_string()))?;
        model.activation = activation;

        let (ln, tok) = lines.next_tokens()?;
        if tok.len() != 2 || tok[0] != "basis" {
            return Err(Error::parse(ln, "expected 'basis <fingerprint>'"));
        }
        let basis_fingerprint = tok[1].clone();
        let (ln, tok) = lines.next_tokens()?;
        if tok.len() != 9 || tok[0] != "train" {
            return Err(Error::parse(ln, "expected 'train lr final_lr beta1 beta2 eps epochs batch seed'"));
        }
        let config = TrainConfig {
            learning_rate: lines.parse_at(ln, &tok[1])?,
            final_learning_rate: lines.parse_at(ln, &tok[2])?,
            beta1: lines.parse_at(ln, &tok[3])?,
            beta2: lines.parse_at(ln, &tok[4])?,
            epsilon: lines.parse_at(ln, &tok[5])?,
            epochs: lines.parse_at(ln, &tok[6])?,
            batch_size: lines.parse_at(ln, &tok[7])?,
            seed: lines.parse_at(ln, &tok[8])?,
        };
        let (ln, tok) = lines.next_tokens()?;
        if tok.len() != 3 || tok[0] != "normalization" {
            return Err(Error::parse(ln, "expected 'normalization d m'"));
        }
        let d: usize = lines.parse_at(ln, &tok[1])?;
        let m: usize = lines.parse_at(ln, &tok[2])?;
        if d != model.input_dim() || m != model.output_dim() {
            return Err(Error::parse(ln, "normalization shape does not match the network"));
        }
        let mut row = |len: usize| -> Result<Vec<f64>> {
            let (ln, tok) = lines.next_tokens()?;
            if tok.len() != len {
                return Err(Error::parse(ln, format!("expected {len} values, found {}", tok.len())));
            }
            tok.iter().map(|t| lines.parse_at(ln, t)).collect()
        };
        let normalization = Normalization { input_shift: row(d)?, input_scale: row(d)?, target_scale: row(m)? };
        for k in 0..model.n_layers() {
            let (rows, cols) = (widths[k + 1], widths[k]);
            let mut wk = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                wk.extend(row(cols)?);
            }
            let bk = row(rows)?;
            let (w, b) = model.layer_mut(k);
            w.copy_from_slice(&wk);
            b.copy_from_slice(&bk);
        }
        Ok(Self { model, normalization, config, basis_fingerprint })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
