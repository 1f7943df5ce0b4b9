//! Sliding-window encoding of per-frame feature vectors into fixed-size
//! spatio-temporal sequence samples.
//!
//! A [`FeatureWindow`] is a fixed-capacity FIFO backed by a double-ended
//! queue: once full, each push pops the oldest vector off the front and
//! appends the new one at the back, so the length stays exactly at the
//! capacity. A full window snapshots to a 4 x L matrix after skip-frame
//! subsampling, where an interval of `k` keeps every (k+1)-th frame and
//! L = ceil(N / (k+1)). Window labels use a strict majority rule: fatigue
//! only when fatigue frames exceed the threshold fraction.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feature::FatigueFeatureVector;
use crate::Label;

/// Fraction of fatigue frames a window must exceed to be labeled fatigue.
pub const LABEL_THRESHOLD: f64 = 0.8;

/// Default window slide in frames (one second at 30 fps).
pub const DEFAULT_STRIDE: usize = 30;

/// Number of rows in a sequence matrix (the feature vector length).
pub const MATRIX_ROWS: usize = 4;

/// Fixed-capacity FIFO of fatigue feature vectors, oldest first.
#[derive(Debug, Clone)]
pub struct FeatureWindow {
    capacity: usize,
    entries: VecDeque<FatigueFeatureVector>,
}

impl FeatureWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidValue {
                op: "feature_window",
                what: "capacity",
                value: 0.0,
            });
        }
        Ok(Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Appends `v`; when already full, the front (oldest) vector pops first
    /// so the length never exceeds the capacity.
    pub fn push(&mut self, v: FatigueFeatureVector) {
        if self.is_full() {
            self.entries.pop_front();
        }
        self.entries.push_back(v);
    }

    /// Entries oldest-first.
    pub fn iter(&self) -> impl Iterator<Item = &FatigueFeatureVector> {
        self.entries.iter()
    }

    /// Snapshot of the contents, oldest first.
    pub fn contents(&self) -> Vec<FatigueFeatureVector> {
        self.entries.iter().copied().collect()
    }
}

/// Number of frames retained from a window of `n` at skip interval `k`:
/// `ceil(n / (k + 1))`.
pub const fn retained_len(n: usize, k: usize) -> usize {
    n.div_ceil(k + 1)
}

/// Skip-frame subsampling: keeps indices 0, k+1, 2(k+1), ...
pub fn skip_sample<T: Clone>(entries: &[T], k: usize) -> Vec<T> {
    entries.iter().step_by(k + 1).cloned().collect()
}

/// A 4 x L sequence matrix, row-major. Row order is fixed: left eye,
/// right eye, mouth opening degree, normalized pitch. Column j is the j-th
/// retained frame in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMatrix {
    cols: usize,
    data: Vec<f64>,
}

impl SequenceMatrix {
    /// Builds the matrix from per-frame columns.
    pub fn from_columns(columns: &[[f64; MATRIX_ROWS]]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput {
                op: "sequence_matrix",
            });
        }
        let cols = columns.len();
        let mut data = Vec::with_capacity(MATRIX_ROWS * cols);
        for row in 0..MATRIX_ROWS {
            for col in columns {
                data.push(col[row]);
            }
        }
        Ok(Self { cols, data })
    }

    /// Rebuilds a matrix from row-major data (4 rows of `cols` values).
    pub fn from_row_major(cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::EmptyInput {
                op: "sequence_matrix",
            });
        }
        if data.len() != MATRIX_ROWS * cols {
            return Err(Error::DataLength {
                op: "sequence_matrix",
                expected: MATRIX_ROWS * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: "sequence_matrix",
            });
        }
        Ok(Self { cols, data })
    }

    pub fn rows(&self) -> usize {
        MATRIX_ROWS
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < MATRIX_ROWS && col < self.cols);
        self.data[row * self.cols + col]
    }

    /// Column `col` as the per-frame feature vector layout.
    pub fn column(&self, col: usize) -> [f64; MATRIX_ROWS] {
        [
            self.get(0, col),
            self.get(1, col),
            self.get(2, col),
            self.get(3, col),
        ]
    }

    /// Row-major data, rows in fixed feature order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// One training/evaluation sample: the subsampled window matrix, its label,
/// and the window geometry it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    pub matrix: SequenceMatrix,
    pub label: Label,
    pub window_len: usize,
    pub skip: usize,
}

/// Snapshots a full window into its 4 x L matrix at skip interval `k`.
/// Fails with a state error when the window is still filling.
pub fn as_matrix(window: &FeatureWindow, k: usize) -> Result<SequenceMatrix> {
    if !window.is_full() {
        return Err(Error::WindowNotFull {
            len: window.len(),
            capacity: window.capacity(),
        });
    }
    let kept: Vec<[f64; MATRIX_ROWS]> = window
        .iter()
        .step_by(k + 1)
        .map(|v| v.as_array())
        .collect();
    SequenceMatrix::from_columns(&kept)
}

/// Labels a window of frame labels: fatigue iff strictly more than
/// `threshold` of the frames are fatigue.
pub fn label_window(frame_labels: &[Label], threshold: f64) -> Result<Label> {
    let op = "label_window";
    if frame_labels.is_empty() {
        return Err(Error::EmptyInput { op });
    }
    if !threshold.is_finite() || !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidValue {
            op,
            what: "threshold",
            value: threshold,
        });
    }
    let fatigue = frame_labels.iter().filter(|l| l.is_fatigue()).count();
    Ok(
        if fatigue as f64 > threshold * frame_labels.len() as f64 {
            Label::Fatigue
        } else {
            Label::Normal
        },
    )
}

/// Slides a window of length `n` over a labeled feature stream with the
/// given stride, skip-sampling and labeling each position. Streams shorter
/// than `n` produce an empty dataset (callers decide whether to warn).
pub fn slide_dataset(
    features: &[FatigueFeatureVector],
    labels: &[Label],
    n: usize,
    k: usize,
    stride: usize,
) -> Result<Vec<SequenceSample>> {
    let op = "slide_dataset";
    if n == 0 {
        return Err(Error::InvalidValue {
            op,
            what: "window length",
            value: 0.0,
        });
    }
    if stride == 0 {
        return Err(Error::InvalidValue {
            op,
            what: "stride",
            value: 0.0,
        });
    }
    if features.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            op,
            expected: alloc::vec![features.len()],
            got: alloc::vec![labels.len()],
        });
    }
    if features.len() < n {
        return Ok(Vec::new());
    }
    let count = (features.len() - n) / stride + 1;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * stride;
        let window = &features[start..start + n];
        let kept: Vec<[f64; MATRIX_ROWS]> =
            window.iter().step_by(k + 1).map(|v| v.as_array()).collect();
        samples.push(SequenceSample {
            matrix: SequenceMatrix::from_columns(&kept)?,
            label: label_window(&labels[start..start + n], LABEL_THRESHOLD)?,
            window_len: n,
            skip: k,
        });
    }
    Ok(samples)
}
