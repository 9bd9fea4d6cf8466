use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid BDF order {k}: expected {expected}")]
    InvalidOrder { k: usize, expected: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window of length {got} is shorter than the required {needed}")]
    ShortWindow { got: usize, needed: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {asymmetry:e}")]
    NotSymmetric { i: usize, j: usize, asymmetry: f64 },

    #[error("bound violated: {quantity} = {value} but bound is {bound}")]
    BoundViolation {
        quantity: String,
        value: f64,
        bound: f64,
    },

    #[error("no negative eigenvalue of B_{k} found up to size {max_size}")]
    NoNegativeEigenvalue { k: usize, max_size: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field is not mean-zero: mean {mean:e}, rms {rms:e}")]
    NotMeanZero { mean: f64, rms: f64 },

    #[error("implicit symbol is not positive (min {min_symbol:e}); reduce the time step")]
    SymbolNotPositive { min_symbol: f64 },

    #[error("fixed-point iteration did not converge in {iters} iterations (last update {last_update:e})")]
    FixedPointDivergence { iters: usize, last_update: f64 },

    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("time step {tau} violates the energy-stability restriction tau <= {limit}")]
    TimeStepRestriction { tau: f64, limit: f64 },

    #[error("bootstrap start-up needs {needed} substeps per level (limit {limit})")]
    StartupBudget { needed: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
