//! Training losses and evaluation metrics.
//!
//! Landmark and pose regression use plain squared error, combined by a
//! weighted multi-task total. Classification uses binary cross-entropy with
//! the probability clamped away from 0 and 1. Evaluation metrics: landmark
//! error normalized by the interocular distance, per-axis mean absolute
//! angle error, and PERCLOS.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::{EyeState, Landmarks, PoseAngles};

/// Flat landmark vector length: 68 points, (x, y) each.
pub const LANDMARK_DIM: usize = 136;

/// Index of the left-eye outer corner in the 68-point scheme.
pub const LEFT_EYE_OUTER_CORNER: usize = 36;

/// Index of the right-eye outer corner in the 68-point scheme.
pub const RIGHT_EYE_OUTER_CORNER: usize = 45;

/// Probability clamp applied before logarithms in the cross-entropy.
pub const BCE_EPSILON: f64 = 1e-12;

/// Multi-task loss weights; both default to 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    alpha: f64,
    beta: f64,
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (what, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue {
                    op: "loss_weights",
                    what,
                    value: v,
                });
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

fn check_landmark_dims(pred: &[f64], truth: &[f64], op: &'static str) -> Result<()> {
    if pred.len() != LANDMARK_DIM || truth.len() != LANDMARK_DIM {
        return Err(Error::ShapeMismatch {
            op,
            expected: alloc::vec![LANDMARK_DIM],
            got: alloc::vec![pred.len(), truth.len()],
        });
    }
    Ok(())
}

/// Sum of squared differences over the 136 landmark coordinates.
pub fn landmark_loss(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_landmark_dims(pred, truth, "landmark_loss")?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum())
}

/// Gradient of [`landmark_loss`] with respect to `pred`: `2 (p - t)`.
pub fn landmark_loss_grad(pred: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    check_landmark_dims(pred, truth, "landmark_loss_grad")?;
    Ok(pred.iter().zip(truth).map(|(p, t)| 2.0 * (p - t)).collect())
}

/// Sum of squared differences over the three pose axes.
pub fn pose_loss(pred: &PoseAngles, truth: &PoseAngles) -> f64 {
    pred.as_array()
        .iter()
        .zip(truth.as_array())
        .map(|(p, t)| (p - t) * (p - t))
        .sum()
}

/// Gradient of [`pose_loss`] with respect to the predicted angles.
pub fn pose_loss_grad(pred: &PoseAngles, truth: &PoseAngles) -> [f64; 3] {
    let p = pred.as_array();
    let t = truth.as_array();
    [2.0 * (p[0] - t[0]), 2.0 * (p[1] - t[1]), 2.0 * (p[2] - t[2])]
}

/// Weighted multi-task total: `alpha/2 * landmark + beta/2 * pose`.
pub fn total_loss(l_landmark: f64, l_pose: f64, w: &LossWeights) -> f64 {
    debug_assert!(l_landmark >= 0.0 && l_pose >= 0.0);
    0.5 * w.alpha * l_landmark + 0.5 * w.beta * l_pose
}

/// Binary cross-entropy `-(y ln p + (1-y) ln(1-p))` with `p` clamped into
/// `[BCE_EPSILON, 1 - BCE_EPSILON]`. The label must be exactly 0 or 1.
pub fn binary_cross_entropy(p: f64, y: f64) -> Result<f64> {
    if y != 0.0 && y != 1.0 {
        return Err(Error::InvalidValue {
            op: "binary_cross_entropy",
            what: "label",
            value: y,
        });
    }
    let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    Ok(-(y * fmath::ln(p) + (1.0 - y) * fmath::ln(1.0 - p)))
}

/// Derivative of [`binary_cross_entropy`] in `p`, on the clamped interior.
pub fn binary_cross_entropy_grad(p: f64, y: f64) -> Result<f64> {
    if y != 0.0 && y != 1.0 {
        return Err(Error::InvalidValue {
            op: "binary_cross_entropy_grad",
            what: "label",
            value: y,
        });
    }
    let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    Ok(-y / p + (1.0 - y) / (1.0 - p))
}

/// Mean landmark error normalized by the interocular distance.
///
/// Per sample: the mean Euclidean error over the 68 points, divided by the
/// distance between the truth outer eye corners (points 36 and 45); the
/// result is the mean of that over all samples.
pub fn normalized_mean_error(preds: &[Landmarks], truths: &[Landmarks]) -> Result<f64> {
    let op = "normalized_mean_error";
    if preds.is_empty() || preds.len() != truths.len() {
        return Err(if preds.is_empty() {
            Error::EmptyInput { op }
        } else {
            Error::ShapeMismatch {
                op,
                expected: alloc::vec![truths.len()],
                got: alloc::vec![preds.len()],
            }
        });
    }
    let mut total = 0.0;
    for (pred, truth) in preds.iter().zip(truths) {
        let interocular =
            truth[LEFT_EYE_OUTER_CORNER].distance(&truth[RIGHT_EYE_OUTER_CORNER]);
        if interocular == 0.0 {
            return Err(Error::DegenerateGeometry {
                op,
                what: "zero interocular distance",
            });
        }
        let mean_err: f64 = pred
            .iter()
            .zip(truth.iter())
            .map(|(p, t)| p.distance(t))
            .sum::<f64>()
            / pred.len() as f64;
        total += mean_err / interocular;
    }
    Ok(total / preds.len() as f64)
}

/// Mean absolute error over one axis: `(1/N) sum |f_i - y_i|`.
pub fn mean_absolute_error(preds: &[f64], truths: &[f64]) -> Result<f64> {
    let op = "mean_absolute_error";
    if preds.is_empty() || truths.is_empty() {
        return Err(Error::EmptyInput { op });
    }
    if preds.len() != truths.len() {
        return Err(Error::ShapeMismatch {
            op,
            expected: alloc::vec![truths.len()],
            got: alloc::vec![preds.len()],
        });
    }
    Ok(preds
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / preds.len() as f64)
}

/// Fraction of closed frames over the trailing `window_len` entries of the
/// state sequence.
pub fn perclos(eye_states: &[EyeState], window_len: usize) -> Result<f64> {
    let op = "perclos";
    if window_len == 0 {
        return Err(Error::EmptyInput { op });
    }
    if eye_states.len() < window_len {
        return Err(Error::ShapeMismatch {
            op,
            expected: alloc::vec![window_len],
            got: alloc::vec![eye_states.len()],
        });
    }
    let window = &eye_states[eye_states.len() - window_len..];
    let closed = window.iter().filter(|s| s.is_closed()).count();
    Ok(closed as f64 / window_len as f64)
}
