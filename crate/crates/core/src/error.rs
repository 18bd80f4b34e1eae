use thiserror::Error;

/// Errors raised across the workbench.
///
/// Variants are grouped by category so front ends can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("diverged at outer iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("sparsity pattern mismatch: {0}")]
    Pattern(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerically invisible solution: ancilla expectation {0:e}")]
    InvisibleSolution(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short category name, used for exit codes and diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Assembly(_) => "assembly",
            Error::Singular(_) => "singular",
            Error::Divergence { .. } => "divergence",
            Error::Contract(_) => "contract",
            Error::Pattern(_) => "pattern",
            Error::Normalization(_) => "normalization",
            Error::Dimension(_) => "dimension",
            Error::Parse(_) => "parse",
            Error::InvisibleSolution(_) => "invisible-solution",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
