//! Building blocks for streaming driver-fatigue recognition.
//!
//! The pipeline goes from per-frame face geometry to a per-window fatigue
//! probability:
//!
//! - [`tensor`]: dense feature-map kernels (standard / depthwise / pointwise
//!   convolution, global average pooling, fully connected, LeakyReLU,
//!   residual add) with exact backward passes and parameter/FLOP accounting.
//! - [`loss`]: multi-task regression losses, binary cross-entropy, landmark
//!   and pose metrics, PERCLOS.
//! - [`feature`]: 68-point landmark geometry reduced to the length-4
//!   per-frame fatigue feature vector (eye states, mouth opening degree,
//!   normalized pitch).
//! - [`window`]: deque-backed sliding windows over feature vectors,
//!   skip-frame subsampling, window labeling, and dataset slicing.
//! - [`lstm`]: a from-scratch single-layer LSTM binary classifier with
//!   backpropagation through time, mini-batch training, evaluation, and
//!   streaming inference.
//! - [`scenario`]: a seed-deterministic synthetic generator of labeled
//!   behavioral streams (blinks, long closures, yawns, nod bursts, talking,
//!   smiling) for desk-scale experiments.
//!
//! The crate is `no_std` (with `alloc`); float math goes through `libm`.
//! Everything is deterministic for a fixed seed.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod feature;
mod fmath;
pub mod loss;
pub mod lstm;
pub mod scenario;
pub mod tensor;
pub mod window;

pub use error::{Error, Result};

/// Number of landmarks in the 68-point face annotation scheme.
pub const NUM_LANDMARKS: usize = 68;

/// One face's landmark set.
pub type Landmarks = [Point; NUM_LANDMARKS];

/// 2-D landmark position in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        fmath::sqrt(dx * dx + dy * dy)
    }
}

/// Head rotation in degrees. Each axis is confined to the open interval
/// (-90, 90); construction rejects anything outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseAngles {
    pitch: f64,
    yaw: f64,
    roll: f64,
}

impl PoseAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Result<Self> {
        for (what, v) in [("pitch", pitch), ("yaw", yaw), ("roll", roll)] {
            if !v.is_finite() || v <= -90.0 || v >= 90.0 {
                return Err(Error::InvalidValue {
                    op: "pose_angles",
                    what,
                    value: v,
                });
            }
        }
        Ok(Self { pitch, yaw, roll })
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn roll(&self) -> f64 {
        self.roll
    }

    /// Angles in (pitch, yaw, roll) order.
    pub fn as_array(&self) -> [f64; 3] {
        [self.pitch, self.yaw, self.roll]
    }
}

/// Binary eye state. Open encodes as 1, closed as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EyeState {
    Closed,
    Open,
}

impl EyeState {
    pub fn as_f64(self) -> f64 {
        match self {
            EyeState::Closed => 0.0,
            EyeState::Open => 1.0,
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(self, EyeState::Closed)
    }
}

/// Binary fatigue label. Fatigue encodes as 1, normal as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Normal,
    Fatigue,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Normal => 0.0,
            Label::Fatigue => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::Fatigue => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Normal),
            1 => Ok(Label::Fatigue),
            _ => Err(Error::InvalidValue {
                op: "label",
                what: "class",
                value: v as f64,
            }),
        }
    }

    pub fn is_fatigue(self) -> bool {
        matches!(self, Label::Fatigue)
    }
}
