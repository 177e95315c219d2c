use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes disagree with each other or with a precomputed plan.
    InvalidShape(String),
    /// A configuration value violates its documented range.
    InvalidConfig(String),
    /// A reference image with zero norm was passed to a normalized loss or metric.
    DegenerateReference,
    /// An iterate, loss or residual became NaN or infinite.
    NumericalFailure(String),
    /// Training hit a non-finite loss.
    NonFiniteLoss { epoch: usize, sample: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidShape(msg) => write!(f, "invalid shape: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DegenerateReference => write!(f, "reference image has zero norm"),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::NonFiniteLoss { epoch, sample } => {
                write!(f, "non-finite training loss at epoch {epoch}, sample {sample}")
            }
        }
    }
}

impl core::error::Error for Error {}

macro_rules! shape_err {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidShape(alloc::format!($($arg)*))
    };
}

macro_rules! config_err {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidConfig(alloc::format!($($arg)*))
    };
}

pub(crate) use config_err;
pub(crate) use shape_err;
