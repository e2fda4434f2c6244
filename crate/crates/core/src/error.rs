use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dilation matrix must be square with {expected} entries, got {found}")]
    MalformedMatrix { expected: usize, found: usize },

    #[error("dilation matrix is singular")]
    SingularMatrix,

    #[error("dilation matrix is not expanding: eigenvalue of modulus {modulus:.6} <= 1")]
    NotExpanding { modulus: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation point has a zero component at position {0}")]
    ZeroComponent(usize),

    #[error("level {0} exceeds the supported maximum of {max}", max = crate::lattice::MAX_LEVEL)]
    LevelTooLarge(usize),

    #[error("invalid level range {start}..={end}")]
    InvalidRange { start: usize, end: usize },

    #[error("data is at level {found}, expected level {expected}")]
    LevelMismatch { expected: usize, found: usize },

    #[error("no output point has its full stencil inside the window; use a larger window")]
    EmptyInterior,

    #[error("level {k}: denominator factor {factor} vanishes for this lambda")]
    VanishingDenominator { k: usize, factor: &'static str },

    #[error("level {k}: symbol vanishes at the normalization point")]
    VanishingSymbol { k: usize },

    #[error("level {k}: coefficient and factored constructions disagree by {deviation:e}")]
    ConstructionMismatch { k: usize, deviation: f64 },

    #[error("symbol value at the all-ones point is {value}, expected {m}")]
    SymbolAtOne { value: f64, m: usize },

    #[error("no admissible shift parameter: {0}")]
    NoAdmissibleTau(String),

    #[error("shift parameter would be complex (imaginary part {0:e})")]
    ComplexTau(f64),

    #[error("space does not determine the shift parameter: {0}")]
    Underdetermined(String),

    #[error("level {k}: |lambda M^-(k+1)| = {norm:.3} is too close to the logarithm branch cut; use a larger probe level")]
    BranchAmbiguity { k: usize, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown catalog id {0:?}")]
    UnknownCatalogId(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
