//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the multiprecision pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A parameter violates a documented admissibility condition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative scheme (series, continued fraction, extrapolation)
    /// failed to converge within its iteration budget.
    #[error("precision failure: {0}")]
    PrecisionFailure(String),

    /// The moment Gram matrix lost positive definiteness at the current
    /// working precision. The caller should raise the digit count.
    #[error("conditioning failure at {digits} digits: {detail}")]
    ConditioningFailure { digits: u32, detail: String },

    /// Adaptive precision doubling hit the configured ceiling.
    #[error("precision ceiling of {ceiling} digits reached")]
    PrecisionCeiling { ceiling: u32 },

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    /// A denominator fell below the degeneracy threshold.
    #[error("division guard: {0}")]
    DivisionGuard(String),

    /// Two algebraically equivalent routes disagreed beyond tolerance,
    /// signalling upstream precision loss.
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),

    /// Evaluation requested on a singular locus of the differential equation.
    #[error("singular locus at t = {t}")]
    SingularLocus { t: String },

    /// The ODE integrator collapsed its step near a singularity.
    #[error("singularity encountered at t = {t}")]
    SingularityEncountered { t: String },

    #[error("quadrature budget of {budget} evaluations exceeded")]
    QuadratureBudgetExceeded { budget: u64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
