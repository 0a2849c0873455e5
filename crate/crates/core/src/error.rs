use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter {name} = {value} is out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("too few points: contour {contour} has {count}, need at least 4")]
    TooFewPoints { contour: usize, count: usize },

    #[error("duplicate consecutive points in contour {contour} at index {index}")]
    DuplicatePoints { contour: usize, index: usize },

    #[error("section {0} has zero length")]
    ZeroLengthSection(usize),

    #[error("contour {contour} does not close (gap {gap:e})")]
    OpenContour { contour: usize, gap: f64 },

    #[error("denominator vanishes on section {0}")]
    DenominatorZero(usize),

    #[error("pole {pole} lies on the boundary (section {section})")]
    PoleOnBoundary { pole: usize, section: usize },

    #[error("pole on the integration interval")]
    PoleOnInterval,

    #[error("empty basis: no usable poles and no extra columns")]
    EmptyBasis,

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("all-zero polynomial")]
    ZeroPolynomial,

    #[error("coincident points: basis function singular at the evaluation point")]
    CoincidentPoints,

    #[error("eigenvalue computation failed to converge")]
    EigenFailure,

    #[error("non-finite error metric at iteration {0}")]
    NonFinite(usize),

    #[error("Neumann data violates the compatibility condition (residual {0:e})")]
    Incompatible(f64),

    #[error("contour is not smooth enough for the Nystrom baseline: {0}")]
    NonSmooth(String),

    #[error("unknown gallery item: {0}")]
    UnknownGallery(String),

    #[error("cluster {cluster} failed: {source}")]
    Cluster { cluster: usize, source: Box<Error> },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
