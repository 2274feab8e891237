use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the models and the scheduler.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A state was asked to move backwards in time.
    Ordering { from: f64, to: f64 },
    /// A parameter was non-finite or outside its documented domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// An address field does not fit the chip topology.
    AddressOutOfRange { field: &'static str, value: u64, max: u64 },
    /// Input events were not sorted by timestamp.
    NonMonotoneInput { index: usize },
    /// A matrix did not have the expected shape.
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    /// A voltage exceeds the padframe limit.
    VoltageOutOfRange { name: &'static str, value: f64 },
    /// A wire packet could not be decoded.
    Decode { field: &'static str, value: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Ordering { from, to } => {
                write!(f, "cannot advance state from t={from} s back to t={to} s")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for parameter `{name}`")
            }
            Error::AddressOutOfRange { field, value, max } => {
                write!(f, "{field} index {value} out of range (valid 0..={max})")
            }
            Error::NonMonotoneInput { index } => {
                write!(f, "input event {index} is earlier than its predecessor")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "expected a {}x{} matrix, found {}x{}", expected.0, expected.1, found.0, found.1)
            }
            Error::VoltageOutOfRange { name, value } => {
                write!(f, "{name} = {value} V exceeds the 5 V padframe limit")
            }
            Error::Decode { field, value } => {
                write!(f, "malformed packet: field `{field}` has invalid value {value}")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Rejects non-finite or non-positive values.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
