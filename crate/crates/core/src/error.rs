use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{field}` = {value} outside [{min}, {max}]")]
    Domain {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("probability pi{index} vanishes; the coupling would be infinite")]
    InfiniteCoupling { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("lattice too large for exhaustive enumeration (L = {0}, max 4)")]
    TooLarge(usize),
}

impl Error {
    pub(crate) fn domain(field: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::Domain { field, value, min, max }
    }
}

/// Checks that `value` is finite and inside `[min, max]`.
pub(crate) fn check_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(Error::domain(field, value, min, max))
    }
}
