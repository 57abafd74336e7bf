use std::fmt;
use std::process::ExitCode;

/// Failure classes with stable exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Bad input: unreadable files, invalid scenarios, mismatched data (exit 2).
    Validation,
    /// Forward solver failure (exit 3).
    Solver,
    /// Identification pipeline failure (exit 4).
    Identification,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Validation => 2,
            Kind::Solver => 3,
            Kind::Identification => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, stage: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { kind, stage: stage.into(), message: message.to_string() }
    }

    pub fn validation(stage: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::new(Kind::Validation, stage, message)
    }

    pub fn solver(stage: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::new(Kind::Solver, stage, message)
    }

    pub fn identification(stage: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::new(Kind::Identification, stage, message)
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.exit_code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
