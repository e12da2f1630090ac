use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin quantum number must be a positive half-integer, got {0}")]
    InvalidSpin(f64),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("orbit index {index} out of range 1..={dim}")]
    OrbitIndex { index: usize, dim: usize },

    #[error("machine is not a spin clock; the Wigner route needs the SU(2) spin construction")]
    NotSpinMachine,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("outcome {0} is the reference orbit, not a misfire")]
    NotAMisfire(usize),

    #[error("probability distribution invalid: {0}")]
    InvalidDistribution(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
