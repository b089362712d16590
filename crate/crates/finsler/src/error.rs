//! Error type shared by every fallible operation in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point or vector lies outside the chart / slit domain of a metric,
    /// or an elementary operation (sqrt, ln, powf) left its real domain.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A denominator fell below the hard underflow floor.
    #[error("division by a vanishing denominator ({denom:.3e}) in {context}")]
    DivisionDomain { context: &'static str, denom: f64 },

    /// Linear solve hit a pivot too small relative to the matrix scale.
    #[error("singular matrix: pivot {pivot:.3e} at elimination step {step}")]
    SingularMatrix { step: usize, pivot: f64 },

    /// A constructor or operation received structurally invalid input
    /// (bad dimension, parameter out of its declared range, shape mismatch).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A Randers form failed the norm condition that keeps it a metric.
    #[error("Randers norm condition violated: |b|_a = {norm:.6} >= 1 at x = {witness:?}")]
    RandersInvalid { norm: f64, witness: Vec<f64> },

    /// A squared metric evaluated to a non-positive value where the
    /// construction requires strict positivity.
    #[error("squared metric is non-positive ({value:.6e}) at the sampled point")]
    NonPositive { value: f64 },

    /// A statistical probe was asked to run on fewer samples than it needs.
    #[error("insufficient samples: needed at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

impl Error {
    /// True for errors that mark a single sample as unusable rather than the
    /// whole computation as wrong. Probes skip (and count) these.
    pub fn is_sample_local(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DivisionDomain { .. }
                | Error::NonPositive { .. }
                | Error::SingularMatrix { .. }
        )
    }
}
