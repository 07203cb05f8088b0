use thiserror::Error;

/// Errors raised by the simulation core.
///
/// Variants split into two families: [`Error::is_numerical`] separates
/// failures of the numerics (leakage, conditioning, convergence, impossible
/// outcomes) from malformed input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation leakage {leakage:.3e} exceeds {limit:.1e} at n_max = {n_max}")]
    TruncationLeakage { leakage: f64, limit: f64, n_max: usize },

    #[error("state has zero norm")]
    DegenerateState,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("qubit is not normalized: |c_g|^2 + |c_e|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("operator is not Hermitian (max defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("time evolution did not converge: step halving changed the state by {change:.3e} after {steps} steps")]
    NotConverged { steps: usize, change: f64 },

    #[error("outcome {outcome} has probability {probability:.3e}")]
    ImpossibleOutcome { outcome: char, probability: f64 },

    #[error("upper-level population {population:.3e} is not negligible")]
    InvalidSubspace { population: f64 },

    #[error("coherent-state basis is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedBasis { condition: f64 },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_) | Error::NotNormalized { .. } | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
