use thiserror::Error;

/// Errors raised while building, parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at offset {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("malformed derivative marker at offset {pos}: {msg}")]
    MalformedDerivative { pos: usize, msg: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} is undefined at {arg}")]
    Domain { func: String, arg: String },
}

impl SymError {
    /// Byte offset into the source text, for parse errors.
    pub fn position(&self) -> Option<usize> {
        match self {
            SymError::Syntax { pos, .. }
            | SymError::UnknownFunction { pos, .. }
            | SymError::MalformedDerivative { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

/// Numeric evaluation failure, naming the offending subterm.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("pole at subterm `{subterm}`")]
    Pole { subterm: String },
    #[error("outside the domain of `{subterm}`")]
    Domain { subterm: String },
    #[error("no value assigned to `{subterm}`")]
    Unassigned { subterm: String },
}
