//! Parameter and FLOP accounting for the layer kinds.
//!
//! Conventions: one multiply-accumulate counts as 2 FLOPs; fully connected
//! biases count one add each; pooling counts `H*W` adds plus one divide per
//! channel. Convolutions here are bias-free.

use crate::error::Result;
use crate::tensor::{ConvKind, ConvSpec};

/// Parameter and forward-FLOP totals of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerAccounting {
    pub param_count: u64,
    pub flop_count: u64,
}

/// A layer together with the input shape it runs on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv {
        spec: ConvSpec,
        in_h: usize,
        in_w: usize,
    },
    FullyConnected {
        inputs: usize,
        outputs: usize,
    },
    GlobalAveragePool {
        h: usize,
        w: usize,
        channels: usize,
    },
}

/// Counts one layer's parameters and forward FLOPs.
pub fn count_params_flops(layer: &LayerSpec) -> Result<LayerAccounting> {
    match *layer {
        LayerSpec::Conv { spec, in_h, in_w } => conv_accounting(&spec, in_h, in_w),
        LayerSpec::FullyConnected { inputs, outputs } => Ok(fc_accounting(inputs, outputs)),
        LayerSpec::GlobalAveragePool { h, w, channels } => Ok(gap_accounting(h, w, channels)),
    }
}

/// Convolution accounting. Per output element a standard convolution does
/// `k^2 * M` MACs over all input channels; depthwise does `k^2` per channel;
/// pointwise does `M` per output channel.
pub fn conv_accounting(spec: &ConvSpec, in_h: usize, in_w: usize) -> Result<LayerAccounting> {
    let (out_h, out_w) = spec.output_dims(in_h, in_w)?;
    let positions = (out_h * out_w) as u64;
    let k2 = (spec.kernel_size() * spec.kernel_size()) as u64;
    let m = spec.in_channels() as u64;
    let n = spec.out_channels() as u64;
    let (params, macs) = match spec.kind() {
        ConvKind::Standard => (k2 * m * n, positions * n * k2 * m),
        ConvKind::Depthwise => (k2 * m, positions * m * k2),
        ConvKind::Pointwise => (m * n, positions * n * m),
    };
    Ok(LayerAccounting {
        param_count: params,
        flop_count: 2 * macs,
    })
}

/// Fully connected accounting: `in*out + out` parameters (bias included),
/// `2*in*out` MAC FLOPs plus `out` bias adds.
pub fn fc_accounting(in_dim: usize, out_dim: usize) -> LayerAccounting {
    let i = in_dim as u64;
    let o = out_dim as u64;
    LayerAccounting {
        param_count: i * o + o,
        flop_count: 2 * i * o + o,
    }
}

/// Global average pooling accounting: no parameters; `H*W` adds plus one
/// divide per channel.
pub fn gap_accounting(h: usize, w: usize, channels: usize) -> LayerAccounting {
    LayerAccounting {
        param_count: 0,
        flop_count: channels as u64 * (h as u64 * w as u64 + 1),
    }
}
