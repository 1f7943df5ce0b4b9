//! Stateful op instances: each records its forward activations so a
//! matching `backward` call can return exact gradients. Calling `backward`
//! before any `forward` is a state error.
//!
//! [`FeatureUnit`] is the minimum feature extraction unit: a depthwise
//! convolution, LeakyReLU, pointwise convolution, LeakyReLU, and an additive
//! shortcut from the unit input to its output. The pointwise stage keeps the
//! channel count so the shortcut shapes match.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::tensor::ops::{
    conv_depthwise, conv_depthwise_backward, conv_pointwise, conv_pointwise_backward,
    conv_standard, conv_standard_backward, fully_connected, fully_connected_backward,
    global_average_pool, global_average_pool_backward, leaky_relu_map, leaky_relu_map_backward,
    residual_add, DEFAULT_LEAKY_SLOPE,
};
use crate::tensor::{ConvKernel, ConvKind, ConvSpec, FeatureMap};

/// Fills `out` with draws from uniform(-limit, limit) where
/// `limit = sqrt(6 / (fan_in + fan_out))`.
pub fn init_uniform<R: Rng>(out: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut R) {
    let limit = fmath::sqrt(6.0 / (fan_in + fan_out) as f64);
    for w in out.iter_mut() {
        *w = rng.random_range(-limit..limit);
    }
}

macro_rules! conv_layer {
    ($name:ident, $kind:expr, $fwd:ident, $bwd:ident, $op:literal) => {
        #[doc = concat!("Recording wrapper around [`", stringify!($fwd), "`].")]
        #[derive(Debug, Clone)]
        pub struct $name {
            kernel: ConvKernel,
            saved_input: Option<FeatureMap>,
        }

        impl $name {
            pub fn new(kernel: ConvKernel) -> Result<Self> {
                if kernel.spec().kind() != $kind {
                    return Err(Error::InvalidValue {
                        op: $op,
                        what: "kernel kind",
                        value: kernel.spec().kind() as u8 as f64,
                    });
                }
                Ok(Self {
                    kernel,
                    saved_input: None,
                })
            }

            pub fn kernel(&self) -> &ConvKernel {
                &self.kernel
            }

            pub fn kernel_mut(&mut self) -> &mut ConvKernel {
                &mut self.kernel
            }

            /// Runs the op and records the input for `backward`.
            pub fn forward(&mut self, input: &FeatureMap) -> Result<FeatureMap> {
                let out = $fwd(input, &self.kernel)?;
                self.saved_input = Some(input.clone());
                Ok(out)
            }

            /// Gradients with respect to the recorded input and the weights.
            pub fn backward(&self, upstream: &FeatureMap) -> Result<(FeatureMap, Vec<f64>)> {
                let input = self
                    .saved_input
                    .as_ref()
                    .ok_or(Error::BackwardBeforeForward { op: $op })?;
                $bwd(input, &self.kernel, upstream)
            }
        }
    };
}

conv_layer!(
    StandardConv,
    ConvKind::Standard,
    conv_standard,
    conv_standard_backward,
    "conv_standard"
);
conv_layer!(
    DepthwiseConv,
    ConvKind::Depthwise,
    conv_depthwise,
    conv_depthwise_backward,
    "conv_depthwise"
);
conv_layer!(
    PointwiseConv,
    ConvKind::Pointwise,
    conv_pointwise,
    conv_pointwise_backward,
    "conv_pointwise"
);

/// Recording LeakyReLU over feature maps.
#[derive(Debug, Clone)]
pub struct LeakyRelu {
    alpha: f64,
    saved_input: Option<FeatureMap>,
}

impl LeakyRelu {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidValue {
                op: "leaky_relu",
                what: "alpha",
                value: alpha,
            });
        }
        Ok(Self {
            alpha,
            saved_input: None,
        })
    }

    pub fn forward(&mut self, input: &FeatureMap) -> FeatureMap {
        let out = leaky_relu_map(input, self.alpha);
        self.saved_input = Some(input.clone());
        out
    }

    pub fn backward(&self, upstream: &FeatureMap) -> Result<FeatureMap> {
        let input = self
            .saved_input
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { op: "leaky_relu" })?;
        leaky_relu_map_backward(input, self.alpha, upstream)
    }
}

/// Recording global average pool (parameter-free head).
#[derive(Debug, Clone, Default)]
pub struct GlobalAvgPool {
    saved_input: Option<FeatureMap>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forward(&mut self, input: &FeatureMap) -> Vec<f64> {
        let out = global_average_pool(input);
        self.saved_input = Some(input.clone());
        out
    }

    pub fn backward(&self, upstream: &[f64]) -> Result<FeatureMap> {
        let input = self
            .saved_input
            .as_ref()
            .ok_or(Error::BackwardBeforeForward {
                op: "global_average_pool",
            })?;
        global_average_pool_backward(input, upstream)
    }
}

/// Recording fully connected layer, `W x + b`.
#[derive(Debug, Clone)]
pub struct Dense {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    saved_input: Option<Vec<f64>>,
}

impl Dense {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::ShapeMismatch {
                op: "fully_connected",
                expected: alloc::vec![out_dim, in_dim],
                got: alloc::vec![weights.len(), bias.len()],
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
            saved_input: None,
        })
    }

    /// Seeded uniform init, zero bias.
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mut weights = alloc::vec![0.0; in_dim * out_dim];
        init_uniform(&mut weights, in_dim, out_dim, rng);
        Self {
            in_dim,
            out_dim,
            weights,
            bias: alloc::vec![0.0; out_dim],
            saved_input: None,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn forward(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.in_dim {
            return Err(Error::ShapeMismatch {
                op: "fully_connected",
                expected: alloc::vec![self.in_dim],
                got: alloc::vec![input.len()],
            });
        }
        let out = fully_connected(input, &self.weights, &self.bias)?;
        self.saved_input = Some(input.to_vec());
        Ok(out)
    }

    /// Returns (d_input, d_weights, d_bias).
    pub fn backward(&self, upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let input = self
            .saved_input
            .as_ref()
            .ok_or(Error::BackwardBeforeForward {
                op: "fully_connected",
            })?;
        if upstream.len() != self.out_dim {
            return Err(Error::ShapeMismatch {
                op: "fully_connected_backward",
                expected: alloc::vec![self.out_dim],
                got: alloc::vec![upstream.len()],
            });
        }
        fully_connected_backward(input, &self.weights, upstream)
    }
}

/// Gradients produced by [`FeatureUnit::backward`].
#[derive(Debug, Clone)]
pub struct UnitGrads {
    pub input: FeatureMap,
    pub depthwise: Vec<f64>,
    pub pointwise: Vec<f64>,
}

#[derive(Debug, Clone)]
struct UnitCache {
    input: FeatureMap,
    pre_act1: FeatureMap,
    act1: FeatureMap,
    pre_act2: FeatureMap,
}

/// The minimum feature extraction unit:
///
/// ```text
/// out = input + lrelu(pointwise(lrelu(depthwise(input))))
/// ```
///
/// The composition order is fixed; the shortcut is additive, so the
/// pointwise stage must keep the channel count.
#[derive(Debug, Clone)]
pub struct FeatureUnit {
    depthwise: ConvKernel,
    pointwise: ConvKernel,
    alpha: f64,
    cache: Option<UnitCache>,
}

impl FeatureUnit {
    pub fn new(depthwise: ConvKernel, pointwise: ConvKernel, alpha: f64) -> Result<Self> {
        let op = "feature_unit";
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidValue {
                op,
                what: "alpha",
                value: alpha,
            });
        }
        if depthwise.spec().kind() != ConvKind::Depthwise
            || pointwise.spec().kind() != ConvKind::Pointwise
        {
            return Err(Error::InvalidValue {
                op,
                what: "kernel kinds",
                value: 0.0,
            });
        }
        let channels = depthwise.spec().in_channels();
        // shortcut needs out == in across both stages
        if pointwise.spec().in_channels() != channels
            || pointwise.spec().out_channels() != channels
        {
            return Err(Error::ShapeMismatch {
                op,
                expected: alloc::vec![channels, channels],
                got: alloc::vec![
                    pointwise.spec().in_channels(),
                    pointwise.spec().out_channels()
                ],
            });
        }
        if depthwise.spec().stride() != 1 || pointwise.spec().stride() != 1 {
            return Err(Error::InvalidValue {
                op,
                what: "stride (shortcut requires 1)",
                value: depthwise.spec().stride() as f64,
            });
        }
        Ok(Self {
            depthwise,
            pointwise,
            alpha,
            cache: None,
        })
    }

    /// Seeded uniform init of both kernels with the default LeakyReLU slope.
    pub fn init<R: Rng>(kernel_size: usize, channels: usize, rng: &mut R) -> Result<Self> {
        let dw_spec = ConvSpec::depthwise(kernel_size, channels)?;
        let pw_spec = ConvSpec::pointwise(channels, channels)?;
        let k2 = kernel_size * kernel_size;
        let mut dw = alloc::vec![0.0; dw_spec.weight_len()];
        init_uniform(&mut dw, k2, k2, rng);
        let mut pw = alloc::vec![0.0; pw_spec.weight_len()];
        init_uniform(&mut pw, channels, channels, rng);
        Self::new(
            ConvKernel::new(dw_spec, dw)?,
            ConvKernel::new(pw_spec, pw)?,
            DEFAULT_LEAKY_SLOPE,
        )
    }

    pub fn depthwise(&self) -> &ConvKernel {
        &self.depthwise
    }

    pub fn pointwise(&self) -> &ConvKernel {
        &self.pointwise
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Forward pass without recording.
    pub fn apply(&self, input: &FeatureMap) -> Result<FeatureMap> {
        let pre1 = conv_depthwise(input, &self.depthwise)?;
        let act1 = leaky_relu_map(&pre1, self.alpha);
        let pre2 = conv_pointwise(&act1, &self.pointwise)?;
        let act2 = leaky_relu_map(&pre2, self.alpha);
        residual_add(input, &act2)
    }

    /// Forward pass that records all intermediates for `backward`.
    pub fn forward(&mut self, input: &FeatureMap) -> Result<FeatureMap> {
        let pre_act1 = conv_depthwise(input, &self.depthwise)?;
        let act1 = leaky_relu_map(&pre_act1, self.alpha);
        let pre_act2 = conv_pointwise(&act1, &self.pointwise)?;
        let act2 = leaky_relu_map(&pre_act2, self.alpha);
        let out = residual_add(input, &act2)?;
        self.cache = Some(UnitCache {
            input: input.clone(),
            pre_act1,
            act1,
            pre_act2,
        });
        Ok(out)
    }

    /// Exact gradients for the recorded forward pass.
    pub fn backward(&self, upstream: &FeatureMap) -> Result<UnitGrads> {
        let cache = self.cache.as_ref().ok_or(Error::BackwardBeforeForward {
            op: "feature_unit",
        })?;
        // branch: upstream flows through the activation chain...
        let d_act2 = upstream;
        let d_pre2 = leaky_relu_map_backward(&cache.pre_act2, self.alpha, d_act2)?;
        let (d_act1, d_pw) = conv_pointwise_backward(&cache.act1, &self.pointwise, &d_pre2)?;
        let d_pre1 = leaky_relu_map_backward(&cache.pre_act1, self.alpha, &d_act1)?;
        let (d_conv_input, d_dw) = conv_depthwise_backward(&cache.input, &self.depthwise, &d_pre1)?;
        // ...and the shortcut passes it straight to the input.
        let d_input = residual_add(&d_conv_input, upstream)?;
        Ok(UnitGrads {
            input: d_input,
            depthwise: d_dw,
            pointwise: d_pw,
        })
    }
}
