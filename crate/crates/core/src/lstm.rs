//! From-scratch single-layer LSTM binary classifier over 4 x L sequence
//! matrices, with backpropagation through time.
//!
//! The cell is the standard gated form: input, forget, and output gates are
//! sigmoids of `W [x; h] + b`, the candidate is a tanh, the cell state
//! updates additively (`c' = f * c + i * g`), and `h' = o * tanh(c')`. A
//! sigmoid head on the final hidden state yields the fatigue probability.
//! Training is mini-batch SGD with momentum, global gradient-norm clipping,
//! optional inverse-frequency class weighting, and a seeded deterministic
//! shuffle; fixed seeds give bit-identical models.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::loss::binary_cross_entropy;
use crate::tensor::layers::init_uniform;
use crate::window::{as_matrix, FeatureWindow, SequenceMatrix, SequenceSample};
use crate::Label;

/// Per-frame feature vector length; fixed by the feature extractor.
pub const INPUT_SIZE: usize = 4;

/// Default hidden-state width.
pub const DEFAULT_HIDDEN_SIZE: usize = 32;

/// Probability threshold separating the two classes at evaluation time.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + fmath::exp(-x))
}

/// Gate weights, biases, classifier head, and hyperparameters of the
/// recognizer. Gate weight matrices are `H x (INPUT_SIZE + H)`, row-major,
/// with each row laid out `[x ; h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    hidden_size: usize,
    w_i: Vec<f64>,
    w_f: Vec<f64>,
    w_o: Vec<f64>,
    w_g: Vec<f64>,
    b_i: Vec<f64>,
    b_f: Vec<f64>,
    b_o: Vec<f64>,
    b_g: Vec<f64>,
    head_w: Vec<f64>,
    head_b: f64,
}

impl LstmModel {
    /// Seeded initialization: gate and head weights uniform in
    /// +-sqrt(6 / (fan_in + fan_out)), biases zero except the forget-gate
    /// bias, which starts at +1 so early training does not forget.
    pub fn init(hidden_size: usize, seed: u64) -> Result<Self> {
        if hidden_size == 0 {
            return Err(Error::InvalidValue {
                op: "lstm_init",
                what: "hidden_size",
                value: 0.0,
            });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Ok(Self::init_with_rng(hidden_size, &mut rng))
    }

    pub(crate) fn init_with_rng<R: Rng>(hidden_size: usize, rng: &mut R) -> Self {
        let h = hidden_size;
        let concat = INPUT_SIZE + h;
        let gate = |rng: &mut R| {
            let mut w = vec![0.0; h * concat];
            init_uniform(&mut w, concat, h, rng);
            w
        };
        let w_i = gate(rng);
        let w_f = gate(rng);
        let w_o = gate(rng);
        let w_g = gate(rng);
        let mut head_w = vec![0.0; h];
        init_uniform(&mut head_w, h, 1, rng);
        Self {
            hidden_size: h,
            w_i,
            w_f,
            w_o,
            w_g,
            b_i: vec![0.0; h],
            b_f: vec![1.0; h],
            b_o: vec![0.0; h],
            b_g: vec![0.0; h],
            head_w,
            head_b: 0.0,
        }
    }

    /// Rebuilds a model from raw tensors, validating every shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        hidden_size: usize,
        w_i: Vec<f64>,
        w_f: Vec<f64>,
        w_o: Vec<f64>,
        w_g: Vec<f64>,
        b_i: Vec<f64>,
        b_f: Vec<f64>,
        b_o: Vec<f64>,
        b_g: Vec<f64>,
        head_w: Vec<f64>,
        head_b: f64,
    ) -> Result<Self> {
        let op = "lstm_from_parts";
        if hidden_size == 0 {
            return Err(Error::InvalidValue {
                op,
                what: "hidden_size",
                value: 0.0,
            });
        }
        let concat = INPUT_SIZE + hidden_size;
        for w in [&w_i, &w_f, &w_o, &w_g] {
            if w.len() != hidden_size * concat {
                return Err(Error::DataLength {
                    op,
                    expected: hidden_size * concat,
                    got: w.len(),
                });
            }
        }
        for b in [&b_i, &b_f, &b_o, &b_g, &head_w] {
            if b.len() != hidden_size {
                return Err(Error::DataLength {
                    op,
                    expected: hidden_size,
                    got: b.len(),
                });
            }
        }
        if !head_b.is_finite() {
            return Err(Error::NonFinite { op });
        }
        Ok(Self {
            hidden_size,
            w_i,
            w_f,
            w_o,
            w_g,
            b_i,
            b_f,
            b_o,
            b_g,
            head_w,
            head_b,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Every tensor with its name and shape, in a fixed serialization order.
    pub fn named_tensors(&self) -> [(&'static str, [usize; 2], &[f64]); 10] {
        let h = self.hidden_size;
        let concat = INPUT_SIZE + h;
        [
            ("w_i", [h, concat], &self.w_i),
            ("w_f", [h, concat], &self.w_f),
            ("w_o", [h, concat], &self.w_o),
            ("w_g", [h, concat], &self.w_g),
            ("b_i", [1, h], &self.b_i),
            ("b_f", [1, h], &self.b_f),
            ("b_o", [1, h], &self.b_o),
            ("b_g", [1, h], &self.b_g),
            ("head_w", [1, h], &self.head_w),
            ("head_b", [1, 1], core::slice::from_ref(&self.head_b)),
        ]
    }

    /// Total trainable parameter count.
    pub fn param_count(&self) -> usize {
        self.named_tensors()
            .iter()
            .map(|(_, shape, _)| shape[0] * shape[1])
            .sum()
    }

    fn apply_update(&mut self, vel: &LstmGrads, lr: f64) {
        let step = |p: &mut [f64], v: &[f64]| {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi -= lr * vi;
            }
        };
        step(&mut self.w_i, &vel.w_i);
        step(&mut self.w_f, &vel.w_f);
        step(&mut self.w_o, &vel.w_o);
        step(&mut self.w_g, &vel.w_g);
        step(&mut self.b_i, &vel.b_i);
        step(&mut self.b_f, &vel.b_f);
        step(&mut self.b_o, &vel.b_o);
        step(&mut self.b_g, &vel.b_g);
        step(&mut self.head_w, &vel.head_w);
        self.head_b -= lr * vel.head_b;
    }
}

/// Gradients (or momentum velocities) shaped exactly like [`LstmModel`].
#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub w_i: Vec<f64>,
    pub w_f: Vec<f64>,
    pub w_o: Vec<f64>,
    pub w_g: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_g: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl LstmGrads {
    pub fn zeros(hidden_size: usize) -> Self {
        let concat = INPUT_SIZE + hidden_size;
        Self {
            w_i: vec![0.0; hidden_size * concat],
            w_f: vec![0.0; hidden_size * concat],
            w_o: vec![0.0; hidden_size * concat],
            w_g: vec![0.0; hidden_size * concat],
            b_i: vec![0.0; hidden_size],
            b_f: vec![0.0; hidden_size],
            b_o: vec![0.0; hidden_size],
            b_g: vec![0.0; hidden_size],
            head_w: vec![0.0; hidden_size],
            head_b: 0.0,
        }
    }

    fn for_each_pair(&mut self, other: &Self, mut f: impl FnMut(&mut f64, f64)) {
        let zip = |a: &mut [f64], b: &[f64], f: &mut dyn FnMut(&mut f64, f64)| {
            for (x, y) in a.iter_mut().zip(b) {
                f(x, *y);
            }
        };
        zip(&mut self.w_i, &other.w_i, &mut f);
        zip(&mut self.w_f, &other.w_f, &mut f);
        zip(&mut self.w_o, &other.w_o, &mut f);
        zip(&mut self.w_g, &other.w_g, &mut f);
        zip(&mut self.b_i, &other.b_i, &mut f);
        zip(&mut self.b_f, &other.b_f, &mut f);
        zip(&mut self.b_o, &other.b_o, &mut f);
        zip(&mut self.b_g, &other.b_g, &mut f);
        zip(&mut self.head_w, &other.head_w, &mut f);
        f(&mut self.head_b, other.head_b);
    }

    pub fn add(&mut self, other: &Self) {
        self.for_each_pair(other, |a, b| *a += b);
    }

    pub fn scale(&mut self, factor: f64) {
        let clone_free = |a: &mut [f64]| {
            for x in a.iter_mut() {
                *x *= factor;
            }
        };
        clone_free(&mut self.w_i);
        clone_free(&mut self.w_f);
        clone_free(&mut self.w_o);
        clone_free(&mut self.w_g);
        clone_free(&mut self.b_i);
        clone_free(&mut self.b_f);
        clone_free(&mut self.b_o);
        clone_free(&mut self.b_g);
        clone_free(&mut self.head_w);
        self.head_b *= factor;
    }

    /// Euclidean norm over all components.
    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for part in [
            &self.w_i, &self.w_f, &self.w_o, &self.w_g, &self.b_i, &self.b_f, &self.b_o,
            &self.b_g, &self.head_w,
        ] {
            for v in part.iter() {
                sq += v * v;
            }
        }
        sq += self.head_b * self.head_b;
        fmath::sqrt(sq)
    }

    /// `self = momentum * self + g` (momentum accumulation).
    fn momentum_step(&mut self, momentum: f64, g: &Self) {
        self.scale(momentum);
        self.add(g);
    }
}

/// Activations recorded by one cell step, enough for the exact backward.
#[derive(Debug, Clone)]
pub struct CellCache {
    xh: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c_new: Vec<f64>,
}

/// One LSTM step. Returns the next hidden and cell states plus the cache
/// needed by [`cell_backward`].
pub fn cell_forward(
    model: &LstmModel,
    x: &[f64],
    h: &[f64],
    c: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, CellCache)> {
    let op = "lstm_cell";
    let hidden = model.hidden_size;
    if x.len() != INPUT_SIZE {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![INPUT_SIZE],
            got: vec![x.len()],
        });
    }
    if h.len() != hidden || c.len() != hidden {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![hidden, hidden],
            got: vec![h.len(), c.len()],
        });
    }
    let concat = INPUT_SIZE + hidden;
    let mut xh = Vec::with_capacity(concat);
    xh.extend_from_slice(x);
    xh.extend_from_slice(h);

    let mut i_gate = vec![0.0; hidden];
    let mut f_gate = vec![0.0; hidden];
    let mut o_gate = vec![0.0; hidden];
    let mut g_cand = vec![0.0; hidden];
    for r in 0..hidden {
        let row = r * concat;
        let mut i_pre = model.b_i[r];
        let mut f_pre = model.b_f[r];
        let mut o_pre = model.b_o[r];
        let mut g_pre = model.b_g[r];
        for (j, xv) in xh.iter().enumerate() {
            i_pre += model.w_i[row + j] * xv;
            f_pre += model.w_f[row + j] * xv;
            o_pre += model.w_o[row + j] * xv;
            g_pre += model.w_g[row + j] * xv;
        }
        i_gate[r] = sigmoid(i_pre);
        f_gate[r] = sigmoid(f_pre);
        o_gate[r] = sigmoid(o_pre);
        g_cand[r] = fmath::tanh(g_pre);
    }

    let mut c_new = vec![0.0; hidden];
    let mut tanh_c_new = vec![0.0; hidden];
    let mut h_new = vec![0.0; hidden];
    for r in 0..hidden {
        c_new[r] = f_gate[r] * c[r] + i_gate[r] * g_cand[r];
        tanh_c_new[r] = fmath::tanh(c_new[r]);
        h_new[r] = o_gate[r] * tanh_c_new[r];
    }

    let cache = CellCache {
        xh,
        i: i_gate,
        f: f_gate,
        o: o_gate,
        g: g_cand,
        c_prev: c.to_vec(),
        tanh_c_new,
    };
    Ok((h_new, c_new, cache))
}

/// Gradients returned by [`cell_backward`].
#[derive(Debug, Clone)]
pub struct CellBackward {
    pub d_x: [f64; INPUT_SIZE],
    pub d_h_prev: Vec<f64>,
    pub d_c_prev: Vec<f64>,
    pub grads: LstmGrads,
}

/// Exact backward through one recorded cell step given the gradients on the
/// step's outputs (`d_h` on the new hidden state, `d_c` on the new cell
/// state).
pub fn cell_backward(
    model: &LstmModel,
    cache: &CellCache,
    d_h: &[f64],
    d_c: &[f64],
) -> CellBackward {
    let mut grads = LstmGrads::zeros(model.hidden_size);
    let (d_x, d_h_prev, d_c_prev) =
        cell_backward_accumulate(model, cache, d_h, d_c, &mut grads);
    CellBackward {
        d_x,
        d_h_prev,
        d_c_prev,
        grads,
    }
}

fn cell_backward_accumulate(
    model: &LstmModel,
    cache: &CellCache,
    d_h: &[f64],
    d_c_in: &[f64],
    grads: &mut LstmGrads,
) -> ([f64; INPUT_SIZE], Vec<f64>, Vec<f64>) {
    let hidden = model.hidden_size;
    let concat = INPUT_SIZE + hidden;
    let mut d_xh = vec![0.0; concat];
    let mut d_c_prev = vec![0.0; hidden];

    for r in 0..hidden {
        let tanh_c = cache.tanh_c_new[r];
        let d_c_total = d_h[r] * cache.o[r] * (1.0 - tanh_c * tanh_c) + d_c_in[r];

        let i = cache.i[r];
        let f = cache.f[r];
        let o = cache.o[r];
        let g = cache.g[r];
        let d_i_pre = d_c_total * g * i * (1.0 - i);
        let d_f_pre = d_c_total * cache.c_prev[r] * f * (1.0 - f);
        let d_o_pre = d_h[r] * tanh_c * o * (1.0 - o);
        let d_g_pre = d_c_total * i * (1.0 - g * g);

        grads.b_i[r] += d_i_pre;
        grads.b_f[r] += d_f_pre;
        grads.b_o[r] += d_o_pre;
        grads.b_g[r] += d_g_pre;

        let row = r * concat;
        for (j, xv) in cache.xh.iter().enumerate() {
            grads.w_i[row + j] += d_i_pre * xv;
            grads.w_f[row + j] += d_f_pre * xv;
            grads.w_o[row + j] += d_o_pre * xv;
            grads.w_g[row + j] += d_g_pre * xv;
            d_xh[j] += model.w_i[row + j] * d_i_pre
                + model.w_f[row + j] * d_f_pre
                + model.w_o[row + j] * d_o_pre
                + model.w_g[row + j] * d_g_pre;
        }
        d_c_prev[r] = d_c_total * f;
    }

    let mut d_x = [0.0; INPUT_SIZE];
    d_x.copy_from_slice(&d_xh[..INPUT_SIZE]);
    (d_x, d_xh[INPUT_SIZE..].to_vec(), d_c_prev)
}

/// Per-sequence forward cache: one cell cache per retained frame plus the
/// final hidden state.
pub struct SequenceCache {
    steps: Vec<CellCache>,
    h_last: Vec<f64>,
    probability: f64,
}

impl SequenceCache {
    pub fn probability(&self) -> f64 {
        self.probability
    }
}

/// Unrolls the cell over the matrix columns from zero state and applies the
/// sigmoid head to the final hidden state. Output is a probability in (0, 1).
pub fn sequence_forward(model: &LstmModel, matrix: &SequenceMatrix) -> Result<f64> {
    sequence_forward_cached(model, matrix).map(|c| c.probability)
}

/// [`sequence_forward`] keeping everything needed for [`sequence_backward`].
pub fn sequence_forward_cached(
    model: &LstmModel,
    matrix: &SequenceMatrix,
) -> Result<SequenceCache> {
    let hidden = model.hidden_size;
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut steps = Vec::with_capacity(matrix.cols());
    for col in 0..matrix.cols() {
        let x = matrix.column(col);
        let (h_new, c_new, cache) = cell_forward(model, &x, &h, &c)?;
        steps.push(cache);
        h = h_new;
        c = c_new;
    }
    let mut z = model.head_b;
    for (w, hv) in model.head_w.iter().zip(&h) {
        z += w * hv;
    }
    Ok(SequenceCache {
        steps,
        h_last: h,
        probability: sigmoid(z),
    })
}

/// Backpropagation through time. `d_z` is the loss gradient at the head
/// pre-activation (for cross-entropy through the sigmoid head this is
/// `weight * (p - y)`).
pub fn sequence_backward(model: &LstmModel, cache: &SequenceCache, d_z: f64) -> LstmGrads {
    let hidden = model.hidden_size;
    let mut grads = LstmGrads::zeros(hidden);
    grads.head_b = d_z;
    let mut d_h = vec![0.0; hidden];
    for r in 0..hidden {
        grads.head_w[r] = d_z * cache.h_last[r];
        d_h[r] = model.head_w[r] * d_z;
    }
    let mut d_c = vec![0.0; hidden];
    for step in cache.steps.iter().rev() {
        let (_, d_h_prev, d_c_prev) =
            cell_backward_accumulate(model, step, &d_h, &d_c, &mut grads);
        d_h = d_h_prev;
        d_c = d_c_prev;
    }
    grads
}

/// Training hyperparameters. Defaults: hidden 32, learning rate 0.05,
/// momentum 0.9, batch 32, clip 5.0, 80% train split, class weighting on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub clip_norm: f64,
    pub train_fraction: f64,
    pub class_weighting: bool,
    /// Learning-rate step decay: multiply by `lr_decay_factor` every
    /// `lr_decay_every` epochs. `lr_decay_every = 0` disables decay.
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_size: DEFAULT_HIDDEN_SIZE,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 32,
            epochs: 15,
            seed: 0,
            clip_norm: 5.0,
            train_fraction: 0.8,
            class_weighting: true,
            lr_decay_every: 0,
            lr_decay_factor: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let op = "train_config";
        if self.hidden_size == 0 {
            return Err(Error::InvalidValue {
                op,
                what: "hidden_size",
                value: 0.0,
            });
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidValue {
                op,
                what: "learning_rate",
                value: self.learning_rate,
            });
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidValue {
                op,
                what: "momentum",
                value: self.momentum,
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidValue {
                op,
                what: "batch_size",
                value: 0.0,
            });
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return Err(Error::InvalidValue {
                op,
                what: "clip_norm",
                value: self.clip_norm,
            });
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidValue {
                op,
                what: "train_fraction",
                value: self.train_fraction,
            });
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return Err(Error::InvalidValue {
                op,
                what: "lr_decay_factor",
                value: self.lr_decay_factor,
            });
        }
        Ok(())
    }
}

/// Deterministic shuffled index split: `(train, holdout)` with
/// `ceil(fraction * n)` training indices, at least one where possible.
pub fn holdout_split(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed_5711);
    indices.shuffle(&mut rng);
    let mut cut = ((n as f64) * train_fraction) as usize;
    cut = cut.clamp(usize::from(n > 1), n.saturating_sub(usize::from(n > 1)));
    let holdout = indices.split_off(cut);
    (indices, holdout)
}

/// Output of [`train`]: the fitted model, per-epoch mean training loss, and
/// the index split actually used.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: LstmModel,
    pub epoch_losses: Vec<f64>,
    pub train_indices: Vec<usize>,
    pub holdout_indices: Vec<usize>,
}

fn class_counts(samples: &[SequenceSample]) -> (usize, usize) {
    let fatigue = samples.iter().filter(|s| s.label.is_fatigue()).count();
    (fatigue, samples.len() - fatigue)
}

/// Trains a fresh model on the training split of `samples`.
///
/// Minimizes the mean binary cross-entropy by mini-batch SGD with momentum
/// and gradient-norm clipping. When class weighting is on, samples are
/// weighted inversely to their class frequency in the training split (mean
/// weight 1). Deterministic for a fixed seed. Zero epochs returns the
/// freshly initialized model untouched.
pub fn train(samples: &[SequenceSample], config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyInput { op: "train" });
    }
    let (fatigue, normal) = class_counts(samples);
    if fatigue == 0 || normal == 0 {
        return Err(Error::SingleClassDataset { fatigue, normal });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let model = LstmModel::init_with_rng(config.hidden_size, &mut rng);
    let (train_idx, holdout_idx) = holdout_split(samples.len(), config.train_fraction, config.seed);

    let mut out = TrainOutput {
        model,
        epoch_losses: Vec::with_capacity(config.epochs),
        train_indices: train_idx,
        holdout_indices: holdout_idx,
    };
    if config.epochs == 0 {
        return Ok(out);
    }

    // inverse-frequency weights over the training split, normalized to mean 1
    let (tf, tn) = {
        let f = out
            .train_indices
            .iter()
            .filter(|&&i| samples[i].label.is_fatigue())
            .count();
        (f, out.train_indices.len() - f)
    };
    if tf == 0 || tn == 0 {
        return Err(Error::SingleClassDataset {
            fatigue: tf,
            normal: tn,
        });
    }
    let n_train = out.train_indices.len();
    let (w_fatigue, w_normal) = if config.class_weighting {
        (
            n_train as f64 / (2.0 * tf as f64),
            n_train as f64 / (2.0 * tn as f64),
        )
    } else {
        (1.0, 1.0)
    };

    let mut velocity = LstmGrads::zeros(config.hidden_size);
    let mut order = out.train_indices.clone();
    let mut lr = config.learning_rate;
    for epoch in 0..config.epochs {
        if config.lr_decay_every > 0 && epoch > 0 && epoch % config.lr_decay_every == 0 {
            lr *= config.lr_decay_factor;
        }
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut batch_grads = LstmGrads::zeros(config.hidden_size);
            for &idx in batch {
                let sample = &samples[idx];
                let y = sample.label.as_f64();
                let weight = if sample.label.is_fatigue() {
                    w_fatigue
                } else {
                    w_normal
                };
                let cache = sequence_forward_cached(&out.model, &sample.matrix)?;
                epoch_loss += weight * binary_cross_entropy(cache.probability, y)?;
                // cross-entropy through the sigmoid head: d_z = p - y
                let d_z = weight * (cache.probability - y);
                batch_grads.add(&sequence_backward(&out.model, &cache, d_z));
            }
            batch_grads.scale(1.0 / batch.len() as f64);
            let norm = batch_grads.global_norm();
            if norm > config.clip_norm {
                batch_grads.scale(config.clip_norm / norm);
            }
            velocity.momentum_step(config.momentum, &batch_grads);
            out.model.apply_update(&velocity, lr);
        }
        out.epoch_losses.push(epoch_loss / n_train as f64);
    }
    Ok(out)
}

/// Evaluation summary at a fixed decision threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub mean_loss: f64,
    pub fatigue_total: usize,
    pub fatigue_correct: usize,
    pub normal_total: usize,
    pub normal_correct: usize,
}

/// Accuracy, per-class counts, and mean unweighted cross-entropy at the
/// default 0.5 threshold.
pub fn evaluate(model: &LstmModel, samples: &[SequenceSample]) -> Result<EvalReport> {
    evaluate_with_threshold(model, samples, DECISION_THRESHOLD)
}

/// [`evaluate`] with an explicit decision threshold.
pub fn evaluate_with_threshold(
    model: &LstmModel,
    samples: &[SequenceSample],
    threshold: f64,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput { op: "evaluate" });
    }
    if !threshold.is_finite() || !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidValue {
            op: "evaluate",
            what: "threshold",
            value: threshold,
        });
    }
    let mut report = EvalReport {
        accuracy: 0.0,
        mean_loss: 0.0,
        fatigue_total: 0,
        fatigue_correct: 0,
        normal_total: 0,
        normal_correct: 0,
    };
    for sample in samples {
        let p = sequence_forward(model, &sample.matrix)?;
        report.mean_loss += binary_cross_entropy(p, sample.label.as_f64())?;
        let predicted_fatigue = p >= threshold;
        match sample.label {
            Label::Fatigue => {
                report.fatigue_total += 1;
                if predicted_fatigue {
                    report.fatigue_correct += 1;
                }
            }
            Label::Normal => {
                report.normal_total += 1;
                if !predicted_fatigue {
                    report.normal_correct += 1;
                }
            }
        }
    }
    report.mean_loss /= samples.len() as f64;
    report.accuracy =
        (report.fatigue_correct + report.normal_correct) as f64 / samples.len() as f64;
    Ok(report)
}

/// Streaming inference: scores the current window once per pushed frame.
/// Returns `Ok(None)` while the window is still warming up; that is not an
/// error.
pub fn stream_infer(
    model: &LstmModel,
    window: &FeatureWindow,
    k: usize,
) -> Result<Option<f64>> {
    if !window.is_full() {
        return Ok(None);
    }
    let matrix = as_matrix(window, k)?;
    sequence_forward(model, &matrix).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::FatigueFeatureVector;
    use crate::EyeState;

    fn zero_model(hidden: usize) -> LstmModel {
        let concat = INPUT_SIZE + hidden;
        LstmModel::from_parts(
            hidden,
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![0.0; hidden],
            vec![0.0; hidden],
            vec![0.0; hidden],
            vec![0.0; hidden],
            vec![0.0; hidden],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_zero_state_closed_form() {
        // gates sit at 0.5, candidate at 0: h' = 0, c' = 0
        let model = zero_model(3);
        let (h, c, cache) =
            cell_forward(&model, &[0.3, -0.2, 0.5, 0.1], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
        assert!(cache.i.iter().all(|&v| v == 0.5));
        assert!(cache.f.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn saturated_gates_preserve_memory() {
        // f ~ 1 and i ~ 0 leave the cell state untouched
        let hidden = 2;
        let concat = INPUT_SIZE + hidden;
        let model = LstmModel::from_parts(
            hidden,
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![0.0; hidden * concat],
            vec![-40.0; hidden], // input gate shut
            vec![40.0; hidden],  // forget gate saturated open
            vec![0.0; hidden],
            vec![0.0; hidden],
            vec![0.0; hidden],
            0.0,
        )
        .unwrap();
        let c0 = vec![0.7, -0.4];
        let (_, c1, _) = cell_forward(&model, &[1.0, 0.0, 0.3, 0.0], &[0.1, 0.2], &c0).unwrap();
        for (a, b) in c1.iter().zip(&c0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_rejects_shape_mismatch() {
        let model = zero_model(3);
        assert!(cell_forward(&model, &[0.0; 3], &[0.0; 3], &[0.0; 3]).is_err());
        assert!(cell_forward(&model, &[0.0; 4], &[0.0; 2], &[0.0; 3]).is_err());
    }

    fn constant_matrix(cols: usize, v: [f64; 4]) -> SequenceMatrix {
        SequenceMatrix::from_columns(&vec![v; cols]).unwrap()
    }

    #[test]
    fn sequence_forward_range_and_determinism() {
        let model = LstmModel::init(8, 42).unwrap();
        let m = constant_matrix(10, [1.0, 1.0, 0.2, 0.05]);
        let p1 = sequence_forward(&model, &m).unwrap();
        let p2 = sequence_forward(&model, &m).unwrap();
        assert!(p1 > 0.0 && p1 < 1.0);
        assert_eq!(p1.to_bits(), p2.to_bits());

        // zero-weight model with zero bias scores 0.5
        let zero = zero_model(4);
        assert_eq!(sequence_forward(&zero, &m).unwrap(), 0.5);
    }

    #[test]
    fn hidden_state_stays_inside_unit_box() {
        let model = LstmModel::init(6, 7).unwrap();
        let mut h = vec![0.0; 6];
        let mut c = vec![0.0; 6];
        for step in 0..200 {
            let x = [
                (step % 2) as f64,
                ((step / 2) % 2) as f64,
                1.4,
                0.9 * if step % 3 == 0 { -1.0 } else { 1.0 },
            ];
            let (h_new, c_new, _) = cell_forward(&model, &x, &h, &c).unwrap();
            h = h_new;
            c = c_new;
            assert!(h.iter().all(|v| v.abs() < 1.0));
        }
    }

    #[test]
    fn same_seed_same_model() {
        let a = LstmModel::init(32, 1234).unwrap();
        let b = LstmModel::init(32, 1234).unwrap();
        assert_eq!(a, b);
        let c = LstmModel::init(32, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let model = LstmModel::init(5, 0).unwrap();
        let tensors = model.named_tensors();
        let b_f = tensors.iter().find(|(n, _, _)| *n == "b_f").unwrap();
        assert!(b_f.2.iter().all(|&v| v == 1.0));
        let b_i = tensors.iter().find(|(n, _, _)| *n == "b_i").unwrap();
        assert!(b_i.2.iter().all(|&v| v == 0.0));
    }

    fn toy_dataset() -> Vec<SequenceSample> {
        // fatigue = all columns eyes closed; normal = eyes open
        let closed = FatigueFeatureVector::new(EyeState::Closed, EyeState::Closed, 0.1, -0.1)
            .unwrap()
            .as_array();
        let open = FatigueFeatureVector::new(EyeState::Open, EyeState::Open, 0.05, 0.02)
            .unwrap()
            .as_array();
        let mut samples = Vec::new();
        for i in 0..40 {
            let fatigue = i % 4 == 0; // 1:3 prior
            let v = if fatigue { closed } else { open };
            samples.push(SequenceSample {
                matrix: constant_matrix(12, v),
                label: if fatigue { Label::Fatigue } else { Label::Normal },
                window_len: 12,
                skip: 0,
            });
        }
        samples
    }

    #[test]
    fn training_separates_a_separable_toy_set() {
        let samples = toy_dataset();
        let config = TrainConfig {
            hidden_size: 8,
            epochs: 50,
            batch_size: 8,
            seed: 3,
            ..TrainConfig::default()
        };
        let out = train(&samples, &config).unwrap();
        let last = *out.epoch_losses.last().unwrap();
        assert!(last < 0.1, "training loss stayed at {last}");
        let report = evaluate(&out.model, &samples).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn zero_epochs_returns_initialized_model() {
        let samples = toy_dataset();
        let config = TrainConfig {
            hidden_size: 8,
            epochs: 0,
            seed: 11,
            ..TrainConfig::default()
        };
        let out = train(&samples, &config).unwrap();
        // matches a fresh init drawn from the same seed
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let fresh = LstmModel::init_with_rng(8, &mut rng);
        assert_eq!(out.model, fresh);
        assert!(out.epoch_losses.is_empty());
    }

    #[test]
    fn training_is_seed_deterministic() {
        let samples = toy_dataset();
        let config = TrainConfig {
            hidden_size: 8,
            epochs: 5,
            seed: 9,
            ..TrainConfig::default()
        };
        let a = train(&samples, &config).unwrap();
        let b = train(&samples, &config).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let samples = toy_dataset();
        let config = TrainConfig {
            hidden_size: 8,
            epochs: 3,
            learning_rate: 0.0,
            seed: 5,
            ..TrainConfig::default()
        };
        let out = train(&samples, &config).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let fresh = LstmModel::init_with_rng(8, &mut rng);
        assert_eq!(out.model, fresh);
    }

    #[test]
    fn single_class_dataset_rejected() {
        let mut samples = toy_dataset();
        samples.retain(|s| s.label == Label::Normal);
        let err = train(&samples, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SingleClassDataset { .. }));
    }

    #[test]
    fn evaluate_counts_and_prior_arithmetic() {
        // constant-normal scorer on a 1:3 fatigue prior scores 0.75
        let samples = toy_dataset();
        let model = {
            let mut m = zero_model(4);
            m.head_b = -5.0; // probability ~ 0 for everything
            m
        };
        let report = evaluate(&model, &samples).unwrap();
        assert_eq!(report.accuracy, 0.75);
        assert_eq!(report.fatigue_total, 10);
        assert_eq!(report.fatigue_correct, 0);
        assert_eq!(report.normal_total, 30);
        assert_eq!(report.normal_correct, 30);

        // constant-fatigue scorer on all-fatigue data is perfect
        let fatigue_only: Vec<SequenceSample> = samples
            .iter()
            .filter(|s| s.label == Label::Fatigue)
            .cloned()
            .collect();
        let mut always = zero_model(4);
        always.head_b = 5.0;
        let report = evaluate(&always, &fatigue_only).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn stream_infer_warms_up_then_matches_batch_scoring() {
        let model = LstmModel::init(8, 21).unwrap();
        let mut window = FeatureWindow::new(6).unwrap();
        let v = FatigueFeatureVector::new(EyeState::Open, EyeState::Open, 0.1, 0.0).unwrap();
        for _ in 0..5 {
            window.push(v);
            assert_eq!(stream_infer(&model, &window, 1).unwrap(), None);
        }
        window.push(v);
        let p = stream_infer(&model, &window, 1).unwrap().unwrap();
        let batch = sequence_forward(&model, &as_matrix(&window, 1).unwrap()).unwrap();
        assert_eq!(p.to_bits(), batch.to_bits());

        // stationary input: probability stabilizes after warm-up
        let mut probs = Vec::new();
        for _ in 0..5 {
            window.push(v);
            probs.push(stream_infer(&model, &window, 1).unwrap().unwrap());
        }
        for w in probs.windows(2) {
            assert_eq!(w[0].to_bits(), w[1].to_bits());
        }
    }
}
