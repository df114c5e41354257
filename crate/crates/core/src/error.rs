//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by scene validation, channel assembly, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("direction vector has zero length")]
    ZeroDirection,

    #[error("angle {value_rad} rad outside [0, {max_rad}]")]
    AngleOutOfRange { value_rad: f64, max_rad: f64 },

    #[error("distance {dist_m} m below reference distance {d0_m} m")]
    SubReferenceDistance { dist_m: f64, d0_m: f64 },

    #[error("non-positive distance {0} m")]
    NonPositiveDistance(f64),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("phase vector length {got} does not match unit count {expected}")]
    PhaseLengthMismatch { got: usize, expected: usize },

    #[error("position ({x}, {y}) outside room footprint")]
    OutOfRoom { x: f64, y: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("database schema error: {0}")]
    Schema(String),

    #[error("database is empty")]
    EmptyDatabase,

    #[error("k={k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("fingerprint length {got} does not match database measurement count {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
