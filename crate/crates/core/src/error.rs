use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shaping rate {rate}: {reason}")]
    InvalidRate { rate: String, reason: String },

    #[error("infeasible rate: {requested_bits} bits requested per block, at most {achievable_bits} achievable")]
    InfeasibleRate {
        requested_bits: u64,
        achievable_bits: u64,
    },

    #[error("index out of range: codec carries {bits} bits per block")]
    IndexOutOfRange { bits: u64 },

    #[error("sequence is not a codeword: {0}")]
    NotACodeword(String),

    #[error("payload underflow: need {needed} bits, got {available}")]
    PayloadUnderflow { needed: usize, available: usize },

    #[error("alignment error: expected {expected} symbols, got {got}")]
    Alignment { expected: usize, got: usize },

    #[error("invalid configuration at `{path}`: {reason}")]
    InvalidConfig { path: String, reason: String },

    #[error("split-step integration failed in span {span} of loop {loop_index}: {reason}; use a smaller step")]
    Integration {
        loop_index: usize,
        span: usize,
        reason: String,
    },

    #[error("degenerate reference: {0}")]
    Degenerate(String),

    #[error("duplicate channel index {0}")]
    DuplicateChannel(usize),

    #[error("simulation failed for {context}: {source}")]
    Simulation {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
