//! Error type shared across the library.
//!
//! Every fallible operation returns [`Result`]; numeric payloads are carried
//! as `f64` regardless of the scalar the caller works in, since they only
//! feed error messages.

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A channel gain is zero, so coherent demodulation (or a design that
    /// depends on the channel phase) is undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A two-point power law violates the ordering `0 <= x1 <= p_bar <= x2`.
    #[error("two-point law violates 0 <= x1 <= p_bar <= x2: x1={x1}, p_bar={p_bar}, x2={x2}")]
    PowerLawOrdering { x1: f64, p_bar: f64, x2: f64 },

    /// Region classification needs at least three sweep points.
    #[error("sweep too short for region classification: got {0} points, need at least 3")]
    SweepTooShort(usize),

    /// An optimizer run inside a Monte Carlo loop failed; the draw index
    /// identifies the offending channel realization.
    #[error("optimizer failure at channel draw {draw_index}: {reason}")]
    OptimizerFailure { draw_index: usize, reason: String },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidParameter`] with a formatted message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
