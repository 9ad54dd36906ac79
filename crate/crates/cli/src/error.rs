//! Exit-code mapping: 0 success, 1 I/O failure, 2 domain or input error.

use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Errors raised by the numerical core, and malformed input files.
    Domain(qconv_core::Error),
    Io { path: String, message: String },
    /// Flag combinations clap cannot express.
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<qconv_core::Error> for CliError {
    fn from(e: qconv_core::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn io(path: impl Into<String>, e: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: e.to_string() }
    }

    pub fn parse(what: &str, e: impl std::fmt::Display) -> Self {
        CliError::Domain(qconv_core::Error::Parse(format!("{what}: {e}")))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Domain(_) | CliError::Usage(_) => 2,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.code(),
            CliError::Io { .. } => "IO",
            CliError::Usage(_) => "USAGE",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Domain(e) => e.to_string(),
            CliError::Io { path, message } => format!("{path}: {message}"),
            CliError::Usage(m) => m.clone(),
        }
    }

    /// Single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson { error: self.code(), message: self.message() }).expect("plain strings")
    }
}
