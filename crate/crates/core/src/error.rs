use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability {0} outside the admissible range")]
    ProbabilityOutOfRange(f64),
    #[error("distribution has no finite moments: {0}")]
    NoFiniteMoments(String),
    #[error("distribution has zero variance")]
    ZeroVariance,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("design is rank deficient: rank {rank} < {columns} columns")]
    RankDeficient { rank: usize, columns: usize },
    #[error("design limits (m, Sigma) are required for the linear covariance")]
    MissingDesignLimits,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
