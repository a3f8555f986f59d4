use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Unreadable input, malformed JSON or command-line arguments.
    pub const PARSE: i32 = 2;
    /// Well-formed input violating a precondition, e.g. a non-PSD Choi matrix.
    pub const PRECONDITION: i32 = 3;
    /// A proven relation failed numerically.
    pub const COUNTEREXAMPLE_OR_BUG: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("counterexample or bug: {0}")]
    CounterexampleOrBug(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => exit::PARSE,
            CliError::Precondition(_) => exit::PRECONDITION,
            CliError::CounterexampleOrBug(_) => exit::COUNTEREXAMPLE_OR_BUG,
        }
    }
}

impl From<ebcert_core::Error> for CliError {
    fn from(e: ebcert_core::Error) -> Self {
        use ebcert_core::Error as E;
        match e {
            E::CounterexampleOrBug(_) | E::PurityViolation { .. } => CliError::CounterexampleOrBug(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}
