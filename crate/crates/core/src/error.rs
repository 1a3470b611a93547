use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point set must contain at least one point")]
    EmptyPointSet,

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate rotation axis: projection of u coincides with o")]
    DegenerateRotationAxis,

    #[error("point does not lie on the flat")]
    NotOnFlat,

    #[error("point does not lie on the stated hyperbox facet")]
    NotOnFacet,

    #[error("flats do not share a basis")]
    BasisMismatch,

    #[error("spanning vectors are rank deficient")]
    RankDeficient,

    #[error("constant data: zero mean absolute deviation")]
    DegenerateDirection,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("unknown lemma id: {0}")]
    UnknownLemma(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch { expected, got }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
