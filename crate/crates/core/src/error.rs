use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants split into three groups that the command line maps onto exit
/// codes: malformed input, exceeded budgets, and violated preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("relation `{relation}`: tuple has length {found}, expected arity {expected}")]
    TupleArity {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("value {value} is outside the domain {{0..{}}}", domain_size - 1)]
    ValueOutOfDomain { value: usize, domain_size: usize },

    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` is not assigned")]
    Unassigned(String),

    #[error("constraint on `{relation}` has {found} variables, relation arity is {expected}")]
    ConstraintArity {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("arity must be at least 1")]
    ZeroArity,

    #[error("domain size must be at least 2, got {0}")]
    DomainTooSmall(usize),

    #[error("domain size mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("operation table has length {found}, expected {expected}")]
    TableLength { expected: usize, found: usize },

    #[error("quantifier prefix is invalid: {0}")]
    InvalidPrefix(String),

    #[error("budget exceeded: {what} needs {requested}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no tractable method: the language has none of the six Schaefer polymorphisms")]
    NoTractableMethod,

    #[error("unsupported prefix class {0}")]
    UnsupportedPrefixClass(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input documents or references into them.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::TupleArity { .. }
                | Error::ValueOutOfDomain { .. }
                | Error::DuplicateRelation(_)
                | Error::DuplicateVariable(_)
                | Error::UnknownRelation(_)
                | Error::UnknownVariable(_)
                | Error::ConstraintArity { .. }
                | Error::ZeroArity
                | Error::DomainTooSmall(_)
                | Error::InvalidPrefix(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
