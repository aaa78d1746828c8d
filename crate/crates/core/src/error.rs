use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "quadrature did not converge: error estimate {error:.3e} above tolerance {tolerance:.3e} after {subdivisions} subdivisions"
    )]
    QuadratureNonConvergence {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },
    #[error("degenerate overlap: delta(d) = -1")]
    DegenerateOverlap,
    #[error("Fock cutoff {cutoff} too small: truncation deficit {deficit:.3e} exceeds {max_deficit:.3e}")]
    CutoffTooSmall {
        cutoff: usize,
        deficit: f64,
        max_deficit: f64,
    },
    #[error("dimension {dimension} exceeds the cap of {cap}")]
    DimensionCap { dimension: u128, cap: u128 },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("rejection sampler exceeded {0} proposals")]
    RejectionCap(usize),
    #[error("outcome {0} has zero likelihood under both hypotheses")]
    UndefinedLikelihood(usize),
    #[error("record contains outcomes impossible under each hypothesis")]
    ContradictoryRecord,
    #[error("operation not defined for direct imaging")]
    UnsupportedMeasurement,
    #[error("decision rule not applicable to this measurement")]
    UnsupportedRule,
}

pub type Result<T> = core::result::Result<T, Error>;
