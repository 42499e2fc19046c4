use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters rejected at construction time.
    #[error("invalid parameters for {kind}: {reason}")]
    Domain { kind: &'static str, reason: String },

    /// A denominator factor vanished (reciprocal falling factorials,
    /// recursion steps, moment denominators).
    #[error("singular input: {0}")]
    Singular(String),

    /// A truncated series failed its stopping rule.
    #[error(
        "series did not converge within {max_terms} terms \
         (last term {last_term:e}, partial sum {partial_sum:e})"
    )]
    NonConvergence {
        max_terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    /// Linear system too ill-conditioned to trust.
    #[error("ill-conditioned system: condition estimate {estimate:.3e} exceeds {limit:.3e}")]
    IllConditioned { estimate: f64, limit: f64 },

    /// Two sample points produced (numerically) the same deformed value.
    #[error("degenerate basis: sample points {x0} and {x1} map to coincident deformed values")]
    DegenerateBasis { x0: f64, x1: f64 },

    /// A required intermediate object (e.g. a Stirling table) could not be built.
    #[error("missing dependency: {0}")]
    Dependency(String),

    /// A computation produced NaN or infinity.
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    /// A probability table failed the normalization precondition.
    #[error("probabilities not normalized: |sum - 1| = {residual:e} exceeds {limit:e}")]
    Unnormalized { residual: f64, limit: f64 },

    /// Bad argument outside any constructor's domain checks.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
