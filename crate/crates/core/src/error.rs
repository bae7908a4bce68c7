use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("control and target qubit coincide ({0})")]
    ControlEqualsTarget(usize),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parameter index {index} out of range for {count} parameters")]
    ParamOutOfRange { index: usize, count: usize },

    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure {
        iteration: usize,
        reason: String,
        theta: Vec<f64>,
    },

    #[error("no source: {0}")]
    NoSource(String),

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("integrity error in {entry}: {message}")]
    Integrity { entry: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::UnsupportedTopology(_) => 2,
            Error::NumericalFailure { .. } => 4,
            _ => 3,
        }
    }
}
