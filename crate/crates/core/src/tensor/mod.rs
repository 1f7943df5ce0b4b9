//! Dense rank-3 feature maps and the convolution kernels that act on them.
//!
//! A [`FeatureMap`] is a `height x width x channels` grid stored row-major
//! (channel fastest). Convolutions come in three kinds: standard (full
//! cross-channel), depthwise (one kernel per channel, channel-preserving),
//! and pointwise (1x1 cross-channel mix). The depthwise-pointwise pair is
//! the separable decomposition of a standard convolution; [`layers::FeatureUnit`]
//! composes it with LeakyReLU activations and an additive shortcut.

pub mod accounting;
pub mod layers;
pub mod ops;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense rank-3 activation grid, row-major with channel fastest:
/// `data[(y * width + x) * channels + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    /// Builds a map from raw data. Rejects zero dimensions, a data length
    /// that disagrees with `height * width * channels`, and non-finite
    /// elements.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        for (what, v) in [("height", height), ("width", width), ("channels", channels)] {
            if v == 0 {
                return Err(Error::InvalidValue {
                    op: "feature_map",
                    what,
                    value: 0.0,
                });
            }
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::DataLength {
                op: "feature_map",
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op: "feature_map" });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// All-zero map of the given dimensions.
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, vec![0.0; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// (height, width, channels).
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub(crate) fn idx(&self, y: usize, x: usize, c: usize) -> usize {
        debug_assert!(y < self.height && x < self.width && c < self.channels);
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.idx(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        let i = self.idx(y, x, c);
        self.data[i] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, y: usize, x: usize, c: usize, v: f64) {
        let i = self.idx(y, x, c);
        self.data[i] += v;
    }

    /// True when `other` has identical dimensions.
    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.dims() == other.dims()
    }
}

/// Zero-padding policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Zero padding that preserves the spatial size at stride 1
    /// (output = ceil(input / stride) in general).
    Same,
    /// No padding; the kernel must fit inside the input.
    Valid,
}

/// Convolution flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    Standard,
    Depthwise,
    Pointwise,
}

/// Validated convolution geometry: kernel size, channel counts, stride,
/// padding, and kind. Pointwise forces kernel size 1; depthwise forces
/// matching channel counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    kind: ConvKind,
    kernel_size: usize,
    in_channels: usize,
    out_channels: usize,
    stride: usize,
    padding: Padding,
}

impl ConvSpec {
    pub fn new(
        kind: ConvKind,
        kernel_size: usize,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        padding: Padding,
    ) -> Result<Self> {
        let op = "conv_spec";
        for (what, v) in [
            ("kernel_size", kernel_size),
            ("in_channels", in_channels),
            ("out_channels", out_channels),
            ("stride", stride),
        ] {
            if v == 0 {
                return Err(Error::InvalidValue {
                    op,
                    what,
                    value: 0.0,
                });
            }
        }
        if kernel_size.is_multiple_of(2) {
            return Err(Error::InvalidValue {
                op,
                what: "kernel_size (must be odd)",
                value: kernel_size as f64,
            });
        }
        match kind {
            ConvKind::Pointwise if kernel_size != 1 => {
                return Err(Error::InvalidValue {
                    op,
                    what: "kernel_size (pointwise requires 1)",
                    value: kernel_size as f64,
                });
            }
            ConvKind::Depthwise if out_channels != in_channels => {
                return Err(Error::ShapeMismatch {
                    op,
                    expected: vec![in_channels],
                    got: vec![out_channels],
                });
            }
            _ => {}
        }
        Ok(Self {
            kind,
            kernel_size,
            in_channels,
            out_channels,
            stride,
            padding,
        })
    }

    /// Standard convolution, stride 1, same padding.
    pub fn standard(kernel_size: usize, in_channels: usize, out_channels: usize) -> Result<Self> {
        Self::new(
            ConvKind::Standard,
            kernel_size,
            in_channels,
            out_channels,
            1,
            Padding::Same,
        )
    }

    /// Depthwise convolution, stride 1, same padding.
    pub fn depthwise(kernel_size: usize, channels: usize) -> Result<Self> {
        Self::new(
            ConvKind::Depthwise,
            kernel_size,
            channels,
            channels,
            1,
            Padding::Same,
        )
    }

    /// Pointwise (1x1) convolution, stride 1.
    pub fn pointwise(in_channels: usize, out_channels: usize) -> Result<Self> {
        Self::new(
            ConvKind::Pointwise,
            1,
            in_channels,
            out_channels,
            1,
            Padding::Same,
        )
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidValue {
                op: "conv_spec",
                what: "stride",
                value: 0.0,
            });
        }
        self.stride = stride;
        Ok(self)
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn kind(&self) -> ConvKind {
        self.kind
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    /// Number of weights this spec's kernel carries (convolutions here are
    /// bias-free).
    pub fn weight_len(&self) -> usize {
        let k2 = self.kernel_size * self.kernel_size;
        match self.kind {
            ConvKind::Standard => k2 * self.in_channels * self.out_channels,
            ConvKind::Depthwise => k2 * self.in_channels,
            ConvKind::Pointwise => self.in_channels * self.out_channels,
        }
    }

    /// Output spatial dimensions for an input of the given size.
    pub fn output_dims(&self, in_h: usize, in_w: usize) -> Result<(usize, usize)> {
        let k = self.kernel_size;
        let s = self.stride;
        match self.padding {
            Padding::Same => Ok((in_h.div_ceil(s), in_w.div_ceil(s))),
            Padding::Valid => {
                if in_h < k || in_w < k {
                    return Err(Error::ShapeMismatch {
                        op: "conv",
                        expected: vec![k, k],
                        got: vec![in_h, in_w],
                    });
                }
                Ok(((in_h - k) / s + 1, (in_w - k) / s + 1))
            }
        }
    }

    /// Zero-padding inserted above and to the left of the input. The
    /// remainder of any odd total padding goes below/right.
    pub fn padding_offsets(&self, in_h: usize, in_w: usize) -> (usize, usize) {
        match self.padding {
            Padding::Valid => (0, 0),
            Padding::Same => {
                let k = self.kernel_size;
                let s = self.stride;
                let out_h = in_h.div_ceil(s);
                let out_w = in_w.div_ceil(s);
                let pad_h = ((out_h - 1) * s + k).saturating_sub(in_h);
                let pad_w = ((out_w - 1) * s + k).saturating_sub(in_w);
                (pad_h / 2, pad_w / 2)
            }
        }
    }
}

/// A convolution spec paired with its weight tensor. Weight layouts:
///
/// - standard: `[ky][kx][in][out]`
/// - depthwise: `[ky][kx][channel]`
/// - pointwise: `[out][in]` (a plain out x in matrix)
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    spec: ConvSpec,
    weights: Vec<f64>,
}

impl ConvKernel {
    pub fn new(spec: ConvSpec, weights: Vec<f64>) -> Result<Self> {
        let expected = spec.weight_len();
        if weights.len() != expected {
            return Err(Error::DataLength {
                op: "conv_kernel",
                expected,
                got: weights.len(),
            });
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op: "conv_kernel" });
        }
        Ok(Self { spec, weights })
    }

    pub fn spec(&self) -> &ConvSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    #[inline]
    pub(crate) fn w_standard(&self, ky: usize, kx: usize, m: usize, n: usize) -> f64 {
        let k = self.spec.kernel_size;
        self.weights
            [((ky * k + kx) * self.spec.in_channels + m) * self.spec.out_channels + n]
    }

    #[inline]
    pub(crate) fn w_standard_idx(&self, ky: usize, kx: usize, m: usize, n: usize) -> usize {
        let k = self.spec.kernel_size;
        ((ky * k + kx) * self.spec.in_channels + m) * self.spec.out_channels + n
    }

    #[inline]
    pub(crate) fn w_depthwise(&self, ky: usize, kx: usize, c: usize) -> f64 {
        let k = self.spec.kernel_size;
        self.weights[(ky * k + kx) * self.spec.in_channels + c]
    }

    #[inline]
    pub(crate) fn w_depthwise_idx(&self, ky: usize, kx: usize, c: usize) -> usize {
        let k = self.spec.kernel_size;
        (ky * k + kx) * self.spec.in_channels + c
    }

    #[inline]
    pub(crate) fn w_pointwise(&self, n: usize, m: usize) -> f64 {
        self.weights[n * self.spec.in_channels + m]
    }
}
