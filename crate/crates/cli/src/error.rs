use std::fmt;
use std::path::PathBuf;

use meanfield_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Where in a config file a problem sits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {}", self.line, c),
            None => write!(f, "line {}", self.line),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", display_origin(.file, .location))]
    Config { file: Option<PathBuf>, location: Option<Location>, message: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

fn display_origin(file: &Option<PathBuf>, location: &Option<Location>) -> String {
    let mut out = String::from("config error");
    if let Some(f) = file {
        out.push_str(&format!(" in {}", f.display()));
    }
    if let Some(l) = location {
        out.push_str(&format!(" at {l}"));
    }
    out
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { file: None, location: None, message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Classifies an engine error raised while running a study.
    pub fn from_run(e: CoreError) -> Self {
        match e {
            CoreError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
