use thiserror::Error;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mirror coefficients violate the norm constraints.
    #[error("invalid mirror: {0}")]
    InvalidMirror(String),

    /// Loss-model parameters violate their constraints.
    #[error("invalid loss model: {0}")]
    InvalidLossModel(String),

    /// A closed-form probability landed outside [-1e-12, 1 + 1e-12].
    #[error("numerical consistency: {what} evaluated to {value:e}, outside [0, 1]")]
    NumericalConsistency { what: &'static str, value: f64 },

    /// An asymptotic formula was used outside the regime where it holds.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// Lossless stages: the optimum sits at infinite measurement frequency.
    #[error(
        "no finite optimum: lossless stages give an ideal Zeno effect (infinite optimal frequency)"
    )]
    NoFiniteOptimum,

    /// The root bracket has no sign change.
    #[error("no sign change in bracket [{lo}, {hi}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, ZenoError>;
