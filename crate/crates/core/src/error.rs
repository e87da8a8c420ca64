use thiserror::Error;

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, Eq, Hash, Ord, PartialOrd)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(line: usize, column: usize) -> Self {
        Span { line, column }
    }
}

// Spans are bookkeeping only; two ASTs that differ only in positions are equal.
impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown operation {0}")]
    UnknownOperation(String),
    #[error("duplicate operation {0}")]
    DuplicateOperation(String),
    #[error("parameter {param} of {op} is not in {universe}")]
    ParameterOutOfUniverse {
        op: String,
        param: String,
        universe: String,
    },
    #[error("continuation of {op} is not defined on {missing}")]
    IncompleteContinuation { op: String, missing: String },
    #[error("unbound generator {0}")]
    UnboundGenerator(String),
    #[error("{0} is not an element of {1}")]
    NotInUniverse(String, String),
    #[error("state universe must be nonempty")]
    EmptyStateUniverse,
    #[error("carrier is not enumerable")]
    NonEnumerableCarrier,
    #[error("world is not enumerable")]
    NonEnumerableWorld,
    #[error("theory mismatch: {0} vs {1}")]
    TheoryMismatch(String, String),
    #[error("theory {0} has no normalizer")]
    NoNormalizer(String),
    #[error("operation {0} has no cooperation")]
    UncoveredOperation(String),
    #[error("operation {0} has empty arity and admits no cooperation on a nonempty world")]
    ImpossibleCooperation(String),
    #[error("{op} is missing an entry for {entry}")]
    IncompleteTable { op: String, entry: String },
    #[error("ill-formed equation {equation}: {reason}")]
    IllFormedEquation { equation: String, reason: String },
    #[error("type error at {location}: expected {expected}, found {found}")]
    TypeMismatch {
        location: Span,
        expected: String,
        found: String,
    },
    #[error("unbound variable {name} at {location}")]
    UnboundVariable { name: String, location: Span },
    #[error("unknown operation {name} at {location}")]
    UnknownOperationAt { name: String, location: Span },
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        Error::Syntax {
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
