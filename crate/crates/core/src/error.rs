use thiserror::Error;

/// Errors raised by the simulation and training library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    DuplicateQubit(usize),

    #[error("matrix is not unitary (max |U^dag U - I| entry = {0:.3e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{arch} on {n_qubits} qubits admits depth at most {max}, got {requested}")]
    DepthCapacity {
        arch: String,
        n_qubits: usize,
        max: usize,
        requested: usize,
    },

    #[error("{what} limited to {limit}, got {requested}")]
    Budget {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("cost evaluation failed at parameter {index}: {reason}")]
    CostEvaluation { index: usize, reason: String },

    #[error("all {0} training restarts failed")]
    AllRestartsFailed(usize),

    #[error("operator decomposition not normalized: sum |alpha|^2 = {0}")]
    NotNormalized(f64),

    #[error("malformed state file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
