use thiserror::Error;

use crate::semiring::SemiringKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid automaton: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("semiring `{semiring}` lacks the `{capability}` capability")]
    Capability { semiring: SemiringKind, capability: &'static str },

    #[error("star is undefined for {value} in the {semiring} semiring")]
    StarUndefined { semiring: SemiringKind, value: f64 },

    #[error("matrix star undefined at pivot ({row}, {col}) with value {value}")]
    MatrixStarUndefined { row: String, col: String, value: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations; worst entry {entry} has residual {residual:e}")]
    Divergence { iterations: usize, entry: String, residual: f64 },

    #[error("stack mismatch: cannot pop {popped:?} from {stack:?}")]
    StackMismatch { stack: Vec<String>, popped: Vec<String> },

    #[error("structural error: {0}")]
    Structural(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::Parse(_)
            | Error::Validation(_)
            | Error::Precondition(_)
            | Error::StackMismatch { .. }
            | Error::Structural(_) => 2,
            Error::Divergence { .. }
            | Error::StarUndefined { .. }
            | Error::MatrixStarUndefined { .. } => 3,
            Error::Capability { .. } => 4,
        }
    }
}
