//! Per-frame fatigue features from 68-point landmark geometry.
//!
//! Point indices follow the standard 68-point scheme: left-eye contour
//! 36..=41, right-eye contour 42..=47, inner mouth contour 60..=67. Each
//! frame reduces to a length-4 vector: left-eye state, right-eye state,
//! mouth opening degree, and pitch normalized by 90 degrees. Eye state uses
//! the eye aspect ratio over the six contour points; the mouth opening
//! degree is the largest inner-lip gap divided by the inner-mouth width.
//! All components are ratios or pose-derived, so the vector is invariant to
//! translating or uniformly scaling the landmarks.

use crate::error::{Error, Result};
use crate::{EyeState, Label, Landmarks, Point, PoseAngles};

/// First index of the left-eye contour (points 36..=41).
pub const LEFT_EYE_START: usize = 36;

/// First index of the right-eye contour (points 42..=47).
pub const RIGHT_EYE_START: usize = 42;

/// First index of the inner mouth contour (points 60..=67).
pub const INNER_MOUTH_START: usize = 60;

/// Default per-side enlargement of the eye bounding box.
pub const DEFAULT_EYE_EXPANSION: f64 = 0.25;

/// Default eye-aspect-ratio threshold separating open from closed.
pub const DEFAULT_EAR_THRESHOLD: f64 = 0.2;

/// Which eye an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EyeSide {
    Left,
    Right,
}

impl EyeSide {
    fn start(self) -> usize {
        match self {
            EyeSide::Left => LEFT_EYE_START,
            EyeSide::Right => RIGHT_EYE_START,
        }
    }
}

/// One video frame's landmarks, head pose, timestamp, and optional
/// ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    pub timestamp: f64,
    pub points: Landmarks,
    pub pose: PoseAngles,
    pub label: Option<Label>,
}

/// The length-4 per-frame fatigue feature vector: left-eye state, right-eye
/// state, mouth opening degree (>= 0), and pitch / 90 (in (-1, 1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueFeatureVector {
    left_eye: EyeState,
    right_eye: EyeState,
    mouth: f64,
    pitch_norm: f64,
}

impl FatigueFeatureVector {
    pub fn new(
        left_eye: EyeState,
        right_eye: EyeState,
        mouth: f64,
        pitch_norm: f64,
    ) -> Result<Self> {
        let op = "fatigue_feature_vector";
        if !mouth.is_finite() || mouth < 0.0 {
            return Err(Error::InvalidValue {
                op,
                what: "mouth opening degree",
                value: mouth,
            });
        }
        if !pitch_norm.is_finite() || pitch_norm <= -1.0 || pitch_norm >= 1.0 {
            return Err(Error::InvalidValue {
                op,
                what: "normalized pitch",
                value: pitch_norm,
            });
        }
        Ok(Self {
            left_eye,
            right_eye,
            mouth,
            pitch_norm,
        })
    }

    pub fn left_eye(&self) -> EyeState {
        self.left_eye
    }

    pub fn right_eye(&self) -> EyeState {
        self.right_eye
    }

    pub fn mouth(&self) -> f64 {
        self.mouth
    }

    pub fn pitch_norm(&self) -> f64 {
        self.pitch_norm
    }

    /// Components in fixed row order: left eye, right eye, mouth, pitch.
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.left_eye.as_f64(),
            self.right_eye.as_f64(),
            self.mouth,
            self.pitch_norm,
        ]
    }

    /// Rebuilds a vector from the fixed row order, validating invariants.
    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        let eye = |x: f64, what: &'static str| -> Result<EyeState> {
            if x == 0.0 {
                Ok(EyeState::Closed)
            } else if x == 1.0 {
                Ok(EyeState::Open)
            } else {
                Err(Error::InvalidValue {
                    op: "fatigue_feature_vector",
                    what,
                    value: x,
                })
            }
        };
        Self::new(
            eye(v[0], "left eye state")?,
            eye(v[1], "right eye state")?,
            v[2],
            v[3],
        )
    }
}

/// Axis-aligned box, min corner first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

fn eye_points(frame: &LandmarkFrame, side: EyeSide) -> &[Point] {
    let s = side.start();
    &frame.points[s..s + 6]
}

/// Bounding box of the six eye-contour points, each side enlarged by
/// `expansion` times that side's length and clipped at the image origin.
pub fn eye_region(frame: &LandmarkFrame, side: EyeSide, expansion: f64) -> Result<BoundingBox> {
    let op = "eye_region";
    if !expansion.is_finite() || expansion < 0.0 {
        return Err(Error::InvalidValue {
            op,
            what: "expansion",
            value: expansion,
        });
    }
    let pts = eye_points(frame, side);
    let mut min = pts[0];
    let mut max = pts[0];
    for p in &pts[1..] {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    if min.x == max.x && min.y == max.y {
        return Err(Error::DegenerateGeometry {
            op,
            what: "all six eye points coincide",
        });
    }
    let dx = (max.x - min.x) * expansion;
    let dy = (max.y - min.y) * expansion;
    Ok(BoundingBox {
        min: Point::new((min.x - dx).max(0.0), (min.y - dy).max(0.0)),
        max: Point::new(max.x + dx, max.y + dy),
    })
}

/// Eye aspect ratio over the six contour points: the two vertical gaps
/// divided by twice the corner-to-corner width. Near zero when the eye is
/// shut.
pub fn eye_aspect_ratio(frame: &LandmarkFrame, side: EyeSide) -> Result<f64> {
    let p = eye_points(frame, side);
    let width = p[0].distance(&p[3]);
    if width == 0.0 {
        return Err(Error::DegenerateGeometry {
            op: "eye_aspect_ratio",
            what: "zero horizontal eye width",
        });
    }
    Ok((p[1].distance(&p[5]) + p[2].distance(&p[4])) / (2.0 * width))
}

/// Open/closed decision: open iff the eye aspect ratio reaches `threshold`.
pub fn eye_state(frame: &LandmarkFrame, side: EyeSide, threshold: f64) -> Result<EyeState> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::InvalidValue {
            op: "eye_state",
            what: "threshold",
            value: threshold,
        });
    }
    let ear = eye_aspect_ratio(frame, side)?;
    Ok(if ear >= threshold {
        EyeState::Open
    } else {
        EyeState::Closed
    })
}

/// Mouth opening degree: the largest vertical inner-lip pair gap
/// ((61,67), (62,66), (63,65)) divided by the inner-mouth width (60 to 64).
pub fn mouth_opening_degree(frame: &LandmarkFrame) -> Result<f64> {
    let m = &frame.points[INNER_MOUTH_START..INNER_MOUTH_START + 8];
    let width = m[0].distance(&m[4]);
    if width == 0.0 {
        return Err(Error::DegenerateGeometry {
            op: "mouth_opening_degree",
            what: "zero inner mouth width",
        });
    }
    let height = m[1]
        .distance(&m[7])
        .max(m[2].distance(&m[6]))
        .max(m[3].distance(&m[5]));
    Ok(height / width)
}

/// Reduces a frame to its fatigue feature vector using the default
/// eye-state threshold.
pub fn build_feature_vector(frame: &LandmarkFrame) -> Result<FatigueFeatureVector> {
    build_feature_vector_with(frame, DEFAULT_EAR_THRESHOLD)
}

/// [`build_feature_vector`] with an explicit eye-state threshold.
pub fn build_feature_vector_with(
    frame: &LandmarkFrame,
    ear_threshold: f64,
) -> Result<FatigueFeatureVector> {
    FatigueFeatureVector::new(
        eye_state(frame, EyeSide::Left, ear_threshold)?,
        eye_state(frame, EyeSide::Right, ear_threshold)?,
        mouth_opening_degree(frame)?,
        frame.pose.pitch() / 90.0,
    )
}
