//! Error type shared by every pipeline stage.

use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input's dimensions do not satisfy the operation's contract.
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    /// A data payload disagrees in length with its declared dimensions.
    DataLength {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    /// A scalar argument is outside its allowed range.
    InvalidValue {
        op: &'static str,
        what: &'static str,
        value: f64,
    },
    /// An operation that needs at least one element received none.
    EmptyInput { op: &'static str },
    /// Input contains NaN or infinity.
    NonFinite { op: &'static str },
    /// Geometry too degenerate for a ratio to be defined (zero width etc.).
    DegenerateGeometry {
        op: &'static str,
        what: &'static str,
    },
    /// `backward` called on an op whose forward pass has not been recorded.
    BackwardBeforeForward { op: &'static str },
    /// The window has not yet accumulated `capacity` entries.
    WindowNotFull { len: usize, capacity: usize },
    /// Training needs both classes present in the dataset.
    SingleClassDataset { fatigue: usize, normal: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, expected, got } => {
                write!(f, "{op}: shape mismatch, expected {expected:?}, got {got:?}")
            }
            Error::DataLength { op, expected, got } => {
                write!(f, "{op}: data length {got} does not match declared size {expected}")
            }
            Error::InvalidValue { op, what, value } => {
                write!(f, "{op}: invalid {what} {value}")
            }
            Error::EmptyInput { op } => write!(f, "{op}: empty input"),
            Error::NonFinite { op } => write!(f, "{op}: non-finite input"),
            Error::DegenerateGeometry { op, what } => {
                write!(f, "{op}: degenerate geometry ({what})")
            }
            Error::BackwardBeforeForward { op } => {
                write!(f, "{op}: backward called before forward")
            }
            Error::WindowNotFull { len, capacity } => {
                write!(f, "window holds {len} of {capacity} entries; not full yet")
            }
            Error::SingleClassDataset { fatigue, normal } => {
                write!(
                    f,
                    "dataset has a single class (fatigue {fatigue}, normal {normal}); training needs both"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
