use thiserror::Error;

use crate::support::Support;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("group descriptors or characters refer to different ambient groups")]
    IncompatibleGroup,

    #[error("invalid weight system: {0}")]
    InvalidWeightSystem(String),

    #[error("support {0} is not zero-feasible")]
    InfeasibleSupport(Support),

    #[error("support {support} is out of range for {n} coordinates")]
    SupportOutOfRange { support: Support, n: usize },

    #[error("point is off the unit sphere (|z| = {norm})")]
    OffSphere { norm: f64 },

    #[error(
        "{n} coordinates exceed the exact enumeration limit of {n_max}; use the sampler path instead"
    )]
    TooManyCoordinates { n: usize, n_max: usize },

    #[error("insufficient samples within radius: found {found}, need at least {required}")]
    InsufficientSamples { found: usize, required: usize },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("covector does not annihilate the isotropy Lie algebra")]
    NotInAnnihilator,

    #[error("integer value {0} does not fit the target width")]
    Overflow(String),

    #[error("integrity violation [{ledger}]: {detail}")]
    Integrity { ledger: &'static str, detail: String },
}

impl Error {
    pub(crate) fn integrity(ledger: &'static str, detail: impl Into<String>) -> Self {
        Error::Integrity {
            ledger,
            detail: detail.into(),
        }
    }

    pub fn is_integrity(&self) -> bool {
        matches!(self, Error::Integrity { .. })
    }
}
