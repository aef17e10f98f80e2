use thiserror::Error;

/// Errors raised by the simulator, the model builders and the risk pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: operator acts on {expected} qubits but the state has {found}")]
    Dimension { expected: usize, found: usize },

    #[error("qubit {index} out of range for a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("control qubit {0} overlaps a target qubit")]
    ControlOverlap(usize),

    #[error("map is not reversible: {0}")]
    Reversibility(String),

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("{what} needs {required}, exceeding the limit of {limit}")]
    SizeGuard {
        what: String,
        required: usize,
        limit: usize,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
