use thiserror::Error;

/// Errors raised by the analytic engines, the simulator and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter value is outside its admissible range.
    #[error("invalid value for `{key}`: {value} (expected {bound})")]
    InvalidParam {
        key: String,
        value: String,
        bound: String,
    },

    /// A configuration key that the parser does not know.
    #[error("unknown key `{key}`; valid keys are: {valid}")]
    UnknownKey { key: String, valid: String },

    /// Malformed configuration text or command line.
    #[error("config error: {0}")]
    Config(String),

    /// A transition matrix row is not a probability vector.
    #[error("row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    /// The chain has more than one closed communicating class, so the
    /// stationary distribution is not unique.
    #[error("chain has {} closed classes, stationary distribution is ambiguous: {classes:?}", classes.len())]
    MultipleRecurrentClasses { classes: Vec<Vec<usize>> },

    /// The balance system could not be solved.
    #[error("singular balance system: {0}")]
    Singular(String),

    /// The backlog dwell probability is one, so no access ever happens.
    #[error("handoff delay is infinite (backlog stay probability p_d = {p_d})")]
    InfiniteDelay { p_d: f64 },

    /// The requested computation does not apply to these parameters.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(key: &str, value: impl ToString, bound: &str) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            value: value.to_string(),
            bound: bound.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
