//! Crate-wide error type.

use crate::rat::Rat;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A precondition on an operation's arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The instance exceeds the desk-scale caps this toolkit enforces.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The feasible set is empty.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The objective was detected to be unbounded below along a recession
    /// direction; the witness direction is returned.
    #[error("unbounded below along recession direction {}", format_witness(.witness))]
    Unbounded { witness: Vec<Rat> },

    /// A file or text payload could not be parsed. Line/column are 1-based;
    /// zero means "not applicable".
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse_at(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }

    /// Parse failure without a meaningful source position.
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: 0,
            column: 0,
            message: msg.into(),
        }
    }
}

fn format_witness(witness: &[Rat]) -> String {
    let parts: Vec<String> = witness.iter().map(crate::rat::format_rat).collect();
    format!("({})", parts.join(", "))
}
