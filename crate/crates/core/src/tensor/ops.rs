//! Forward and backward passes for every layer kind, as pure functions.
//!
//! Backward functions take the forward input explicitly and return exact
//! chain-rule gradients shaped like their primals. All arithmetic is f64.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::{ConvKernel, ConvKind, FeatureMap};

/// LeakyReLU negative-side slope used throughout the feature networks.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.1;

fn check_kind(kernel: &ConvKernel, want: ConvKind, op: &'static str) -> Result<()> {
    if kernel.spec().kind() != want {
        return Err(Error::InvalidValue {
            op,
            what: "kernel kind",
            value: kernel.spec().kind() as u8 as f64,
        });
    }
    Ok(())
}

fn check_channels(input: &FeatureMap, kernel: &ConvKernel, op: &'static str) -> Result<()> {
    if input.channels() != kernel.spec().in_channels() {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![kernel.spec().in_channels()],
            got: vec![input.channels()],
        });
    }
    Ok(())
}

/// Standard convolution: every output channel sums over all input channels
/// and kernel taps.
pub fn conv_standard(input: &FeatureMap, kernel: &ConvKernel) -> Result<FeatureMap> {
    let op = "conv_standard";
    check_kind(kernel, ConvKind::Standard, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, m_ch) = input.dims();
    let n_ch = spec.out_channels();
    let k = spec.kernel_size();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    let (pad_t, pad_l) = spec.padding_offsets(in_h, in_w);

    let mut out = vec![0.0; out_h * out_w * n_ch];
    for oy in 0..out_h {
        for ox in 0..out_w {
            let base = (oy * out_w + ox) * n_ch;
            for ky in 0..k {
                let iy = oy * s + ky;
                if iy < pad_t || iy - pad_t >= in_h {
                    continue;
                }
                let iy = iy - pad_t;
                for kx in 0..k {
                    let ix = ox * s + kx;
                    if ix < pad_l || ix - pad_l >= in_w {
                        continue;
                    }
                    let ix = ix - pad_l;
                    for m in 0..m_ch {
                        let xv = input.get(iy, ix, m);
                        if xv == 0.0 {
                            continue;
                        }
                        for n in 0..n_ch {
                            out[base + n] += kernel.w_standard(ky, kx, m, n) * xv;
                        }
                    }
                }
            }
        }
    }
    FeatureMap::new(out_h, out_w, n_ch, out)
}

/// Gradient of [`conv_standard`] with respect to its input and weights.
pub fn conv_standard_backward(
    input: &FeatureMap,
    kernel: &ConvKernel,
    upstream: &FeatureMap,
) -> Result<(FeatureMap, Vec<f64>)> {
    let op = "conv_standard_backward";
    check_kind(kernel, ConvKind::Standard, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, m_ch) = input.dims();
    let n_ch = spec.out_channels();
    let k = spec.kernel_size();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    if upstream.dims() != (out_h, out_w, n_ch) {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![out_h, out_w, n_ch],
            got: vec![upstream.height(), upstream.width(), upstream.channels()],
        });
    }
    let (pad_t, pad_l) = spec.padding_offsets(in_h, in_w);

    let mut d_input = FeatureMap::zeros(in_h, in_w, m_ch)?;
    let mut d_weights = vec![0.0; kernel.weights().len()];
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ky in 0..k {
                let iy = oy * s + ky;
                if iy < pad_t || iy - pad_t >= in_h {
                    continue;
                }
                let iy = iy - pad_t;
                for kx in 0..k {
                    let ix = ox * s + kx;
                    if ix < pad_l || ix - pad_l >= in_w {
                        continue;
                    }
                    let ix = ix - pad_l;
                    for m in 0..m_ch {
                        let xv = input.get(iy, ix, m);
                        let mut acc = 0.0;
                        for n in 0..n_ch {
                            let g = upstream.get(oy, ox, n);
                            acc += kernel.w_standard(ky, kx, m, n) * g;
                            d_weights[kernel.w_standard_idx(ky, kx, m, n)] += xv * g;
                        }
                        d_input.add_at(iy, ix, m, acc);
                    }
                }
            }
        }
    }
    Ok((d_input, d_weights))
}

/// Depthwise convolution: output channel `c` depends only on input channel
/// `c`.
pub fn conv_depthwise(input: &FeatureMap, kernel: &ConvKernel) -> Result<FeatureMap> {
    let op = "conv_depthwise";
    check_kind(kernel, ConvKind::Depthwise, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, channels) = input.dims();
    let k = spec.kernel_size();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    let (pad_t, pad_l) = spec.padding_offsets(in_h, in_w);

    let mut out = vec![0.0; out_h * out_w * channels];
    for oy in 0..out_h {
        for ox in 0..out_w {
            let base = (oy * out_w + ox) * channels;
            for ky in 0..k {
                let iy = oy * s + ky;
                if iy < pad_t || iy - pad_t >= in_h {
                    continue;
                }
                let iy = iy - pad_t;
                for kx in 0..k {
                    let ix = ox * s + kx;
                    if ix < pad_l || ix - pad_l >= in_w {
                        continue;
                    }
                    let ix = ix - pad_l;
                    for c in 0..channels {
                        out[base + c] += kernel.w_depthwise(ky, kx, c) * input.get(iy, ix, c);
                    }
                }
            }
        }
    }
    FeatureMap::new(out_h, out_w, channels, out)
}

/// Gradient of [`conv_depthwise`].
pub fn conv_depthwise_backward(
    input: &FeatureMap,
    kernel: &ConvKernel,
    upstream: &FeatureMap,
) -> Result<(FeatureMap, Vec<f64>)> {
    let op = "conv_depthwise_backward";
    check_kind(kernel, ConvKind::Depthwise, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, channels) = input.dims();
    let k = spec.kernel_size();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    if upstream.dims() != (out_h, out_w, channels) {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![out_h, out_w, channels],
            got: vec![upstream.height(), upstream.width(), upstream.channels()],
        });
    }
    let (pad_t, pad_l) = spec.padding_offsets(in_h, in_w);

    let mut d_input = FeatureMap::zeros(in_h, in_w, channels)?;
    let mut d_weights = vec![0.0; kernel.weights().len()];
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ky in 0..k {
                let iy = oy * s + ky;
                if iy < pad_t || iy - pad_t >= in_h {
                    continue;
                }
                let iy = iy - pad_t;
                for kx in 0..k {
                    let ix = ox * s + kx;
                    if ix < pad_l || ix - pad_l >= in_w {
                        continue;
                    }
                    let ix = ix - pad_l;
                    for c in 0..channels {
                        let g = upstream.get(oy, ox, c);
                        d_input.add_at(iy, ix, c, kernel.w_depthwise(ky, kx, c) * g);
                        d_weights[kernel.w_depthwise_idx(ky, kx, c)] +=
                            input.get(iy, ix, c) * g;
                    }
                }
            }
        }
    }
    Ok((d_input, d_weights))
}

/// Pointwise (1x1) convolution: at every spatial position the output channel
/// vector is the weight matrix (out x in) times the input channel vector.
pub fn conv_pointwise(input: &FeatureMap, kernel: &ConvKernel) -> Result<FeatureMap> {
    let op = "conv_pointwise";
    check_kind(kernel, ConvKind::Pointwise, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, m_ch) = input.dims();
    let n_ch = spec.out_channels();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;

    let mut out = vec![0.0; out_h * out_w * n_ch];
    for oy in 0..out_h {
        let iy = oy * s;
        for ox in 0..out_w {
            let ix = ox * s;
            let base = (oy * out_w + ox) * n_ch;
            for n in 0..n_ch {
                let mut acc = 0.0;
                for m in 0..m_ch {
                    acc += kernel.w_pointwise(n, m) * input.get(iy, ix, m);
                }
                out[base + n] = acc;
            }
        }
    }
    FeatureMap::new(out_h, out_w, n_ch, out)
}

/// Gradient of [`conv_pointwise`].
pub fn conv_pointwise_backward(
    input: &FeatureMap,
    kernel: &ConvKernel,
    upstream: &FeatureMap,
) -> Result<(FeatureMap, Vec<f64>)> {
    let op = "conv_pointwise_backward";
    check_kind(kernel, ConvKind::Pointwise, op)?;
    check_channels(input, kernel, op)?;
    let spec = kernel.spec();
    let (in_h, in_w, m_ch) = input.dims();
    let n_ch = spec.out_channels();
    let s = spec.stride();
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    if upstream.dims() != (out_h, out_w, n_ch) {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![out_h, out_w, n_ch],
            got: vec![upstream.height(), upstream.width(), upstream.channels()],
        });
    }

    let mut d_input = FeatureMap::zeros(in_h, in_w, m_ch)?;
    let mut d_weights = vec![0.0; kernel.weights().len()];
    for oy in 0..out_h {
        let iy = oy * s;
        for ox in 0..out_w {
            let ix = ox * s;
            for n in 0..n_ch {
                let g = upstream.get(oy, ox, n);
                for m in 0..m_ch {
                    d_input.add_at(iy, ix, m, kernel.w_pointwise(n, m) * g);
                    d_weights[n * m_ch + m] += input.get(iy, ix, m) * g;
                }
            }
        }
    }
    Ok((d_input, d_weights))
}

/// Per-channel spatial mean; the parameter-free output head.
pub fn global_average_pool(input: &FeatureMap) -> Vec<f64> {
    let (h, w, c) = input.dims();
    let norm = 1.0 / (h * w) as f64;
    let mut out = vec![0.0; c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                out[ch] += input.get(y, x, ch);
            }
        }
    }
    for v in &mut out {
        *v *= norm;
    }
    out
}

/// Gradient of [`global_average_pool`]: the upstream channel gradient spread
/// uniformly over the spatial grid.
pub fn global_average_pool_backward(
    input: &FeatureMap,
    upstream: &[f64],
) -> Result<FeatureMap> {
    let (h, w, c) = input.dims();
    if upstream.len() != c {
        return Err(Error::ShapeMismatch {
            op: "global_average_pool_backward",
            expected: vec![c],
            got: vec![upstream.len()],
        });
    }
    let norm = 1.0 / (h * w) as f64;
    let mut grad = FeatureMap::zeros(h, w, c)?;
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                grad.set(y, x, ch, upstream[ch] * norm);
            }
        }
    }
    Ok(grad)
}

/// Affine map `W x + b` with `W` stored row-major as out x in.
pub fn fully_connected(input: &[f64], weights: &[f64], bias: &[f64]) -> Result<Vec<f64>> {
    let op = "fully_connected";
    let in_dim = input.len();
    let out_dim = bias.len();
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::EmptyInput { op });
    }
    if weights.len() != in_dim * out_dim {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![out_dim, in_dim],
            got: vec![weights.len()],
        });
    }
    let mut out = Vec::with_capacity(out_dim);
    for o in 0..out_dim {
        let row = &weights[o * in_dim..(o + 1) * in_dim];
        let mut acc = bias[o];
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Gradient of [`fully_connected`]: returns (d_input, d_weights, d_bias).
pub fn fully_connected_backward(
    input: &[f64],
    weights: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let op = "fully_connected_backward";
    let in_dim = input.len();
    let out_dim = upstream.len();
    if weights.len() != in_dim * out_dim {
        return Err(Error::ShapeMismatch {
            op,
            expected: vec![out_dim, in_dim],
            got: vec![weights.len()],
        });
    }
    let mut d_input = vec![0.0; in_dim];
    let mut d_weights = vec![0.0; weights.len()];
    for o in 0..out_dim {
        let g = upstream[o];
        let row = o * in_dim;
        for i in 0..in_dim {
            d_input[i] += weights[row + i] * g;
            d_weights[row + i] = input[i] * g;
        }
    }
    Ok((d_input, d_weights, upstream.to_vec()))
}

/// LeakyReLU on a scalar: identity for `x >= 0`, slope `alpha` below.
#[inline]
pub fn leaky_relu(x: f64, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    if x >= 0.0 {
        x
    } else {
        alpha * x
    }
}

/// Local slope of LeakyReLU at `x` (1 on the nonnegative side).
#[inline]
pub fn leaky_relu_slope(x: f64, alpha: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        alpha
    }
}

/// Elementwise LeakyReLU over a feature map.
pub fn leaky_relu_map(input: &FeatureMap, alpha: f64) -> FeatureMap {
    let (h, w, c) = input.dims();
    let data = input.as_slice().iter().map(|&x| leaky_relu(x, alpha)).collect();
    FeatureMap::new(h, w, c, data).expect("shape preserved")
}

/// Gradient of [`leaky_relu_map`] given the forward input.
pub fn leaky_relu_map_backward(
    input: &FeatureMap,
    alpha: f64,
    upstream: &FeatureMap,
) -> Result<FeatureMap> {
    if !input.same_shape(upstream) {
        return Err(Error::ShapeMismatch {
            op: "leaky_relu_backward",
            expected: vec![input.height(), input.width(), input.channels()],
            got: vec![upstream.height(), upstream.width(), upstream.channels()],
        });
    }
    let (h, w, c) = input.dims();
    let data = input
        .as_slice()
        .iter()
        .zip(upstream.as_slice())
        .map(|(&x, &g)| g * leaky_relu_slope(x, alpha))
        .collect();
    FeatureMap::new(h, w, c, data)
}

/// Elementwise sum of two identically shaped maps (the shortcut join).
/// Shape mismatches are rejected; there is no implicit projection.
pub fn residual_add(a: &FeatureMap, b: &FeatureMap) -> Result<FeatureMap> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            op: "residual_add",
            expected: vec![a.height(), a.width(), a.channels()],
            got: vec![b.height(), b.width(), b.channels()],
        });
    }
    let (h, w, c) = a.dims();
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x + y)
        .collect();
    FeatureMap::new(h, w, c, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{ConvSpec, Padding};
    use alloc::vec;

    fn map(h: usize, w: usize, c: usize, data: &[f64]) -> FeatureMap {
        FeatureMap::new(h, w, c, data.to_vec()).unwrap()
    }

    #[test]
    fn standard_conv_dot_product() {
        // 1x1x2 input [1,2] against 1x1x2x1 weights [3,4] is a dot product.
        let input = map(1, 1, 2, &[1.0, 2.0]);
        let spec = ConvSpec::standard(1, 2, 1).unwrap();
        let kernel = ConvKernel::new(spec, vec![3.0, 4.0]).unwrap();
        let out = conv_standard(&input, &kernel).unwrap();
        assert_eq!(out.as_slice(), &[11.0]);
    }

    #[test]
    fn standard_conv_zero_weights_annihilate() {
        let input = map(3, 3, 2, &[1.0; 18]);
        let spec = ConvSpec::standard(3, 2, 4).unwrap();
        let kernel = ConvKernel::new(spec, vec![0.0; spec.weight_len()]).unwrap();
        let out = conv_standard(&input, &kernel).unwrap();
        assert_eq!(out.dims(), (3, 3, 4));
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standard_conv_rejects_channel_mismatch() {
        let input = map(1, 1, 3, &[1.0, 2.0, 3.0]);
        let spec = ConvSpec::standard(1, 2, 1).unwrap();
        let kernel = ConvKernel::new(spec, vec![3.0, 4.0]).unwrap();
        let err = conv_standard(&input, &kernel).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn depthwise_delta_kernel_is_identity() {
        // Center-1 kernels with same padding reproduce the input exactly.
        let data: Vec<f64> = (0..32).map(|i| i as f64 * 0.37 - 3.0).collect();
        let input = map(4, 4, 2, &data);
        let spec = ConvSpec::depthwise(3, 2).unwrap();
        let mut w = vec![0.0; spec.weight_len()];
        for c in 0..2 {
            w[(3 + 1) * 2 + c] = 1.0; // center tap
        }
        let kernel = ConvKernel::new(spec, w).unwrap();
        let out = conv_depthwise(&input, &kernel).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn depthwise_valid_delta_kernel_crops_center() {
        let data: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let input = map(5, 5, 1, &data);
        let spec = ConvSpec::depthwise(3, 1).unwrap().with_padding(Padding::Valid);
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        let kernel = ConvKernel::new(spec, w).unwrap();
        let out = conv_depthwise(&input, &kernel).unwrap();
        assert_eq!(out.dims(), (3, 3, 1));
        assert_eq!(out.get(0, 0, 0), input.get(1, 1, 0));
        assert_eq!(out.get(2, 2, 0), input.get(3, 3, 0));
    }

    #[test]
    fn single_channel_standard_equals_depthwise() {
        let data: Vec<f64> = (0..30).map(|i| ((i * i) % 11) as f64 * 0.45 - 1.3).collect();
        let input = map(5, 6, 1, &data);
        let w: Vec<f64> = (0..9).map(|i| (i as f64 - 4.0) * 0.25).collect();
        let std_spec = ConvSpec::standard(3, 1, 1).unwrap();
        let dw_spec = ConvSpec::depthwise(3, 1).unwrap();
        let std_out =
            conv_standard(&input, &ConvKernel::new(std_spec, w.clone()).unwrap()).unwrap();
        let dw_out = conv_depthwise(&input, &ConvKernel::new(dw_spec, w).unwrap()).unwrap();
        assert_eq!(std_out, dw_out);
    }

    #[test]
    fn pointwise_identity_matrix_is_identity() {
        let data: Vec<f64> = (0..27).map(|i| i as f64 - 13.0).collect();
        let input = map(3, 3, 3, &data);
        let spec = ConvSpec::pointwise(3, 3).unwrap();
        let mut w = vec![0.0; 9];
        for i in 0..3 {
            w[i * 3 + i] = 1.0;
        }
        let kernel = ConvKernel::new(spec, w).unwrap();
        assert_eq!(conv_pointwise(&input, &kernel).unwrap(), input);
    }

    #[test]
    fn pointwise_row_selection() {
        let input = map(1, 1, 2, &[1.0, 2.0]);
        let spec = ConvSpec::pointwise(2, 2).unwrap();
        let kernel = ConvKernel::new(spec, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = conv_pointwise(&input, &kernel).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn gap_means() {
        let input = map(2, 2, 1, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(global_average_pool(&input), vec![2.5]);

        // constant channels pool to the constants exactly
        let two = map(3, 5, 2, &{
            let mut d = vec![0.0; 30];
            for i in 0..15 {
                d[2 * i] = 7.25;
                d[2 * i + 1] = -1.5;
            }
            d
        });
        assert_eq!(global_average_pool(&two), vec![7.25, -1.5]);
    }

    #[test]
    fn gap_degenerate_1x1_passes_through() {
        let input = map(1, 1, 4, &[0.5, -2.0, 3.25, 0.0]);
        assert_eq!(global_average_pool(&input), vec![0.5, -2.0, 3.25, 0.0]);
    }

    #[test]
    fn fully_connected_identity_and_affine() {
        let x = vec![1.5, -2.0];
        let w = vec![1.0, 0.0, 0.0, 1.0];
        let b = vec![0.0, 0.0];
        assert_eq!(fully_connected(&x, &w, &b).unwrap(), x);

        let out = fully_connected(&[1.0, 1.0], &[2.0, 3.0], &[1.0]).unwrap();
        assert_eq!(out, vec![6.0]);
    }

    #[test]
    fn fully_connected_rejects_mismatch() {
        let err = fully_connected(&[1.0, 2.0], &[1.0, 2.0, 3.0], &[0.0]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn leaky_relu_values() {
        assert_eq!(leaky_relu(3.0, 0.1), 3.0);
        assert_eq!(leaky_relu(-2.0, 0.1), -0.2);
        assert_eq!(leaky_relu(0.0, 0.1), 0.0);
        assert_eq!(leaky_relu_slope(3.0, 0.1), 1.0);
        assert_eq!(leaky_relu_slope(-1.0, 0.1), 0.1);
    }

    #[test]
    fn residual_add_identity_and_commutativity() {
        let a = map(2, 2, 1, &[1.0, -2.0, 3.0, 0.5]);
        let zeros = FeatureMap::zeros(2, 2, 1).unwrap();
        assert_eq!(residual_add(&a, &zeros).unwrap(), a);

        let doubled = residual_add(&a, &a).unwrap();
        assert_eq!(doubled.as_slice(), &[2.0, -4.0, 6.0, 1.0]);

        let b = map(2, 2, 1, &[0.25, 1.0, -1.0, 2.0]);
        assert_eq!(residual_add(&a, &b).unwrap(), residual_add(&b, &a).unwrap());
    }

    #[test]
    fn residual_add_rejects_mismatch() {
        let a = map(2, 2, 1, &[0.0; 4]);
        let b = map(2, 1, 2, &[0.0; 4]);
        assert!(matches!(
            residual_add(&a, &b).unwrap_err(),
            Error::ShapeMismatch { .. }
        ));
    }
}
