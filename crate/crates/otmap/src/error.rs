use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("instance too large for brute force: {atoms} atoms (limit {limit})")]
    InstanceTooLarge { atoms: usize, limit: usize },

    #[error("solver failed to converge: {0}")]
    SolverStalled(String),

    #[error("kernel moment check failed: moment {j} = {value} (tolerance {tol})")]
    KernelMoment { j: usize, value: f64, tol: f64 },

    #[error("accept-reject acceptance rate {rate:.2e} below {floor:.0e}; bandwidth is pathological")]
    EnvelopeRejection { rate: f64, floor: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("coordinate map is not strictly increasing on the support")]
    NotMonotone,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("discretization size {m} exceeds configured maximum {m_max}")]
    DiscretizationTooLarge { m: usize, m_max: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closed-form ground truth unavailable: {0}")]
    TruthUnavailable(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
