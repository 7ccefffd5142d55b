use thiserror::Error;

/// Errors produced by construction, propagation and protocol operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// Device parameters violate a physical constraint.
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),

    /// An energy denominator fell below the configured floor.
    #[error("singular denominator {value} meV (floor {floor} meV)")]
    SingularDenominator { value: f64, floor: f64 },

    /// The symmetric eigensolver failed to reach its off-diagonal threshold.
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    /// Ramp substepping exceeded the refinement limit without meeting `tol`.
    #[error("ramp refinement exceeded {max_substeps} substeps (last change {last_change:.3e})")]
    SubstepLimitExceeded { max_substeps: u64, last_change: f64 },

    /// A schedule or configuration value is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Closed-form gate duration requested outside its validity condition.
    #[error("automatic gate duration requires u = 2k (got u = {u}, 2k = {two_k})")]
    AutoGateRequiresMatchedCoulomb { u: f64, two_k: f64 },

    /// A chain step left too little weight in the target subspace.
    #[error("chain step {step}: target-subspace population {population:.4} below 0.5")]
    ChainStepFailed { step: usize, population: f64 },
}
