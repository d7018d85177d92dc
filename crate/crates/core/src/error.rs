use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("partial trace needs a non-empty set of factors to keep")]
    EmptyKeepSet,

    #[error("index {index} out of range for {len} factors")]
    FactorOutOfRange { index: usize, len: usize },

    #[error("expectation value has imaginary residue {residue:e} above {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("{what}: truncation at n_max = {n_max} is too small, need n_max >= {required_n_max}")]
    Truncation {
        what: String,
        n_max: usize,
        required_n_max: usize,
    },

    #[error("witness coefficient c_{axis} = {value} outside [-1, 1]")]
    InvalidCoefficient { axis: char, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("grid under-resolved: {0}")]
    UnderResolvedGrid(String),

    #[error("unknown state: {0}")]
    UnknownState(String),

    #[error("degenerate ion pair: n = m = {0}")]
    DegeneratePair(usize),

    #[error("unstable chain configuration: dynamical matrix eigenvalue {0:e} is not positive")]
    UnstableConfiguration(f64),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },
}
