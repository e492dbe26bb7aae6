use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("expected {expected} amplitudes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("theta must lie in [0, pi/2], got {0}")]
    ThetaOutOfRange(f64),

    #[error("invalid number of sites: {0}")]
    InvalidN(usize),

    #[error("outcome pattern must require outcome 1 at one site or more")]
    EmptyPattern,

    #[error("inequality terms need a nonzero coefficient")]
    ZeroCoefficient,

    #[error("unnormalized delta state is degenerate (norm {0:e})")]
    DegenerateState(f64),

    #[error("efficiency must lie in [0, 1], got {0}")]
    EtaOutOfRange(f64),

    #[error("efficiency must exceed 1/2, got {0}")]
    EtaTooSmall(f64),

    #[error("efficiency {eta} is not above the critical value {critical}")]
    EtaBelowCritical { eta: f64, critical: f64 },

    #[error("too many sites for exhaustive enumeration: {n} (limit {limit})")]
    TooManySites { n: usize, limit: usize },

    #[error("operator dimension {0} exceeds the dense limit 4096")]
    DimensionTooLarge(usize),

    #[error("no violation possible: denominator {0:e} is not positive")]
    NoViolationPossible(f64),

    #[error("no violation found: best eigenvalue {0:e}")]
    NoViolation(f64),

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("invalid search grid: {0}")]
    InvalidGrid(String),
}
