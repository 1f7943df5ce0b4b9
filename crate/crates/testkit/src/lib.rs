//! Independent reference implementations and gradient-check helpers for the
//! test suites.
//!
//! Everything here is deliberately written the slow, obvious way and kept
//! separate from the library code it checks: convolutions materialize a
//! zero-padded copy of the input and walk plain nested loops, parameter
//! counts are obtained by counting loop iterations, and gradients come from
//! central finite differences.

use fatigue_core::tensor::{ConvSpec, FeatureMap, Padding};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Seeded RNG used across the test suites.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random feature map with entries uniform in (-scale, scale).
pub fn random_map<R: Rng>(r: &mut R, h: usize, w: usize, c: usize, scale: f64) -> FeatureMap {
    let data = (0..h * w * c)
        .map(|_| r.random_range(-scale..scale))
        .collect();
    FeatureMap::new(h, w, c, data).expect("valid random map")
}

/// Random weight vector with entries uniform in (-scale, scale).
pub fn random_vec<R: Rng>(r: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| r.random_range(-scale..scale)).collect()
}

/// Zero-pads `input` so that a kernel of size `k` at stride `s` under the
/// given padding policy can be swept without bounds checks. Returns the
/// padded grid (row-major, channel fastest) and its dimensions.
fn padded(
    input: &FeatureMap,
    k: usize,
    s: usize,
    padding: Padding,
) -> (Vec<f64>, usize, usize, usize, usize) {
    let (h, w, c) = input.dims();
    let (out_h, out_w, pad_t, pad_l) = match padding {
        Padding::Valid => ((h - k) / s + 1, (w - k) / s + 1, 0, 0),
        Padding::Same => {
            let out_h = h.div_ceil(s);
            let out_w = w.div_ceil(s);
            let pad_h = ((out_h - 1) * s + k).saturating_sub(h);
            let pad_w = ((out_w - 1) * s + k).saturating_sub(w);
            (out_h, out_w, pad_h / 2, pad_w / 2)
        }
    };
    // generous margin below/right so every tap is in range
    let ph = pad_t + h + k;
    let pw = pad_l + w + k;
    let mut grid = vec![0.0; ph * pw * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                grid[((y + pad_t) * pw + (x + pad_l)) * c + ch] = input.get(y, x, ch);
            }
        }
    }
    (grid, pw, out_h, out_w, c)
}

/// Brute-force standard convolution. Weights laid out `[ky][kx][in][out]`.
pub fn naive_conv_standard(
    input: &FeatureMap,
    weights: &[f64],
    k: usize,
    n_out: usize,
    stride: usize,
    padding: Padding,
) -> FeatureMap {
    let (grid, pw, out_h, out_w, c) = padded(input, k, stride, padding);
    let mut out = vec![0.0; out_h * out_w * n_out];
    for oy in 0..out_h {
        for ox in 0..out_w {
            for n in 0..n_out {
                let mut acc = 0.0;
                for ky in 0..k {
                    for kx in 0..k {
                        for m in 0..c {
                            let x = grid[((oy * stride + ky) * pw + ox * stride + kx) * c + m];
                            let wv = weights[((ky * k + kx) * c + m) * n_out + n];
                            acc += wv * x;
                        }
                    }
                }
                out[(oy * out_w + ox) * n_out + n] = acc;
            }
        }
    }
    FeatureMap::new(out_h, out_w, n_out, out).expect("oracle output")
}

/// Brute-force depthwise convolution. Weights laid out `[ky][kx][channel]`.
pub fn naive_conv_depthwise(
    input: &FeatureMap,
    weights: &[f64],
    k: usize,
    stride: usize,
    padding: Padding,
) -> FeatureMap {
    let (grid, pw, out_h, out_w, c) = padded(input, k, stride, padding);
    let mut out = vec![0.0; out_h * out_w * c];
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ch in 0..c {
                let mut acc = 0.0;
                for ky in 0..k {
                    for kx in 0..k {
                        let x = grid[((oy * stride + ky) * pw + ox * stride + kx) * c + ch];
                        acc += weights[(ky * k + kx) * c + ch] * x;
                    }
                }
                out[(oy * out_w + ox) * c + ch] = acc;
            }
        }
    }
    FeatureMap::new(out_h, out_w, c, out).expect("oracle output")
}

/// Per-position matrix multiply: at every pixel, `out = W (n x m) * x`.
pub fn naive_pointwise_matmul(input: &FeatureMap, weights: &[f64], n_out: usize) -> FeatureMap {
    let (h, w, c) = input.dims();
    let mut out = vec![0.0; h * w * n_out];
    for y in 0..h {
        for x in 0..w {
            for n in 0..n_out {
                let mut acc = 0.0;
                for m in 0..c {
                    acc += weights[n * c + m] * input.get(y, x, m);
                }
                out[(y * w + x) * n_out + n] = acc;
            }
        }
    }
    FeatureMap::new(h, w, n_out, out).expect("oracle output")
}

/// Nested-loop affine map.
pub fn naive_fully_connected(input: &[f64], weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let in_dim = input.len();
    let out_dim = bias.len();
    let mut out = vec![0.0; out_dim];
    for o in 0..out_dim {
        let mut acc = bias[o];
        for i in 0..in_dim {
            acc += weights[o * in_dim + i] * input[i];
        }
        out[o] = acc;
    }
    out
}

/// Counts convolution kernel elements one loop iteration at a time.
pub fn enumerate_conv_params(spec: &ConvSpec) -> u64 {
    use fatigue_core::tensor::ConvKind;
    let k = spec.kernel_size();
    let mut count = 0u64;
    match spec.kind() {
        ConvKind::Standard => {
            for _ky in 0..k {
                for _kx in 0..k {
                    for _m in 0..spec.in_channels() {
                        for _n in 0..spec.out_channels() {
                            count += 1;
                        }
                    }
                }
            }
        }
        ConvKind::Depthwise => {
            for _ky in 0..k {
                for _kx in 0..k {
                    for _m in 0..spec.in_channels() {
                        count += 1;
                    }
                }
            }
        }
        ConvKind::Pointwise => {
            for _m in 0..spec.in_channels() {
                for _n in 0..spec.out_channels() {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Counts fully-connected parameters (weights then biases) by enumeration.
pub fn enumerate_fc_params(in_dim: usize, out_dim: usize) -> u64 {
    let mut count = 0u64;
    for _o in 0..out_dim {
        for _i in 0..in_dim {
            count += 1;
        }
    }
    for _o in 0..out_dim {
        count += 1;
    }
    count
}

/// Finite-difference step used by the gradient checks.
pub const FD_STEP: f64 = 1e-6;

/// Central finite-difference gradient of `f` at `params` with step [`FD_STEP`].
pub fn fd_gradient<F>(params: &[f64], f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    fd_gradient_step(params, f, FD_STEP)
}

/// Central finite-difference gradient with an explicit step. Square losses
/// have no third derivative, so a large step trades no truncation error for
/// much less rounding noise there.
pub fn fd_gradient_step<F>(params: &[f64], mut f: F, step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut work = params.to_vec();
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let orig = work[i];
        work[i] = orig + step;
        let hi = f(&work);
        work[i] = orig - step;
        let lo = f(&work);
        work[i] = orig;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    grad
}

/// Largest relative error between two gradient vectors. The denominator is
/// floored at 1e-4 so that near-zero components compare absolutely at the
/// finite-difference noise level instead of blowing up the ratio.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    max_rel_error_floor(analytic, numeric, 1e-4)
}

/// [`max_rel_error`] with an explicit denominator floor.
pub fn max_rel_error_floor(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Step-by-step scalar LSTM cell, written independently of the library cell.
/// Weight rows are laid out `[x ; h]`. Returns `(h_next, c_next)`.
#[allow(clippy::too_many_arguments)]
pub fn scalar_lstm_cell(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    w_i: &[f64],
    w_f: &[f64],
    w_o: &[f64],
    w_g: &[f64],
    b_i: &[f64],
    b_f: &[f64],
    b_o: &[f64],
    b_g: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hidden = h.len();
    let concat_len = x.len() + hidden;
    let mut xh = Vec::with_capacity(concat_len);
    xh.extend_from_slice(x);
    xh.extend_from_slice(h);

    let sigmoid = |v: f64| 1.0 / (1.0 + (-v).exp());
    let row_dot = |w: &[f64], row: usize| -> f64 {
        let mut acc = 0.0;
        for (j, xv) in xh.iter().enumerate() {
            acc += w[row * concat_len + j] * xv;
        }
        acc
    };

    let mut h_next = vec![0.0; hidden];
    let mut c_next = vec![0.0; hidden];
    for r in 0..hidden {
        let i = sigmoid(row_dot(w_i, r) + b_i[r]);
        let f = sigmoid(row_dot(w_f, r) + b_f[r]);
        let o = sigmoid(row_dot(w_o, r) + b_o[r]);
        let g = (row_dot(w_g, r) + b_g[r]).tanh();
        c_next[r] = f * c[r] + i * g;
        h_next[r] = o * c_next[r].tanh();
    }
    (h_next, c_next)
}
