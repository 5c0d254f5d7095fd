use thiserror::Error;

/// Errors raised while reading one of the line-oriented text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing or malformed header: {0}")]
    Header(String),
    #[error("unsupported format version {0}")]
    Version(String),
    #[error("invalid token `{0}`")]
    Token(String),
    #[error("literal {literal} exceeds declared variable count {num_vars}")]
    LiteralOutOfRange { literal: i64, num_vars: usize },
    #[error("tautological clause: variable {0} appears with both signs")]
    Tautology(usize),
    #[error("empty clause")]
    EmptyClause,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
    #[error("clause not terminated by 0")]
    UnterminatedClause,
    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },
    #[error("duplicate entry for index {0}")]
    DuplicateIndex(usize),
    #[error("expected {expected} entries, found {found}")]
    Length { expected: usize, found: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(String),
    #[error("mu value {0} is negative or not finite")]
    Mu(String),
    #[error("duplicate assignment in sample set")]
    DuplicateSample,
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("size mismatch: {what} has {found}, expected {expected}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("variable index {index} out of range for {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mode `{0}` requires an oracle")]
    MissingOracle(&'static str),
    #[error("mu[{index}] = {value} is negative or not finite")]
    InvalidMu { index: usize, value: f64 },
    #[error("formula has {0} variables, exhaustive search supports at most 20")]
    TooManyVariables(usize),
    #[error("{0}")]
    Bench(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
