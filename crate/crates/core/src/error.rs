use std::path::PathBuf;

/// Errors raised by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is singular over GF(2)")]
    SingularMatrix,

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pruned ternary-tree matrix for n = {n} is singular")]
    PruningFailed { n: usize },

    #[error("ordering is not a bijection onto [0, {n}): {reason}")]
    NonBijectiveOrder { n: usize, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("ancilla subsets {first} and {second} both contain qubit {qubit}")]
    DisjointnessViolation { qubit: usize, first: usize, second: usize },

    #[error("exact search over {n} vertices exceeds the limit of {max}; use the heuristic optimizer")]
    ProblemTooLarge { n: usize, max: usize },

    #[error("edge ({u}, {v}) has no active cost component")]
    NoActiveComponent { u: usize, v: usize },

    #[error("ancilla construction requires a Jordan-Wigner base Hamiltonian, found {0}")]
    UnsupportedEncoding(String),

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
