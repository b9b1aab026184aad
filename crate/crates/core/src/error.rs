use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} out of range: {value} (expected {expected})")]
    OutOfRange {
        what: &'static str,
        value: String,
        expected: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("quadrature did not converge after {levels} doublings (last change {last_change:e})")]
    Quadrature { levels: u32, last_change: f64 },

    #[error("degenerate correction: b = 1/2 makes the affine map singular")]
    DegenerateCorrection,

    #[error("qubit {qubit} invalid for a {num_qubits}-qubit state")]
    QubitIndex { qubit: usize, num_qubits: usize },

    #[error("qubit {0} used more than once in one operation")]
    DuplicateQubit(usize),

    #[error("calibration record (T={record_t}, R={record_r}) does not match sweep (T={sweep_t}, R={sweep_r})")]
    CalibrationMismatch {
        record_t: u64,
        record_r: usize,
        sweep_t: u64,
        sweep_r: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn out_of_range(
        what: &'static str,
        value: impl ToString,
        expected: impl ToString,
    ) -> Self {
        Error::OutOfRange {
            what,
            value: value.to_string(),
            expected: expected.to_string(),
        }
    }
}
