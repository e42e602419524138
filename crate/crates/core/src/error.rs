use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what}: arity {got} outside supported range {min}..={max}")]
    Arity {
        what: &'static str,
        got: usize,
        min: usize,
        max: usize,
    },
    #[error("invalid energy grid: {0}")]
    InvalidGrid(String),
    #[error("size mismatch for {what}: expected {expected} bins, got {got}")]
    SizeMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("density must be nonnegative and finite, bin {bin} has value {value}")]
    NegativeDensity { bin: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("kernels live on different energy grids")]
    GridMismatch,
    #[error("unknown shell amplitude `{0}`")]
    UnknownVector(String),
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("{value} does not sit on a bin edge of the grid (required for exact indicator shells)")]
    Misaligned { value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("incomplete correlation family: missing subset {0:?}")]
    IncompleteFamily(Vec<usize>),
    #[error("rewriting did not terminate within {0} steps")]
    NonTermination(usize),
    #[error("symbolic term is singular: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_arity(what: &'static str, got: usize, min: usize, max: usize) -> Result<()> {
    if got < min || got > max {
        return Err(Error::Arity {
            what,
            got,
            min,
            max,
        });
    }
    Ok(())
}
