use alloc::string::String;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown party label {0}")]
    Label(String),
    #[error("matrix is numerically singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("{family} matrix {index} is numerically singular (smallest singular value {sigma_min:e})")]
    SingularFamily { family: String, index: usize, sigma_min: f64 },
    #[error("matrix is not unitary (residual {residual:e})")]
    Unitarity { residual: f64 },
    #[error("no construction available: {0}")]
    NoConstruction(String),
    #[error("inputs are not orthogonal: {0}")]
    Orthogonality(String),
    #[error("basis family invalid: {0}")]
    Basis(String),
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error("invalid input state: {0}")]
    Input(String),
    #[error("contraction exceeds budget: intermediate of {needed} entries, budget {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("search failed after {restarts} restarts, best residual {best_residual:e}")]
    SearchFailed { restarts: usize, best_residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DIMENSION",
            Error::Label(_) => "LABEL",
            Error::Singular { .. } => "SINGULAR",
            Error::SingularFamily { .. } => "SINGULAR",
            Error::Unitarity { .. } => "UNITARITY",
            Error::NoConstruction(_) => "NO_CONSTRUCTION",
            Error::Orthogonality(_) => "ORTHOGONALITY",
            Error::Basis(_) => "BASIS",
            Error::Structure(_) => "STRUCTURE",
            Error::Input(_) => "INPUT",
            Error::Budget { .. } => "BUDGET",
            Error::SearchFailed { .. } => "SEARCH_FAILED",
            Error::Parse(_) => "PARSE",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
