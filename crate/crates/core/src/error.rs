use thiserror::Error;

use crate::expr::ExprError;

/// Errors shared by the geometry, classification and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("rank is not constant on the sample set ({context}): observed ranks {ranks:?}")]
    SingularityDetected { context: String, ranks: Vec<usize> },
    #[error("no valid sample point after {attempts} attempts")]
    NoValidSamples { attempts: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
