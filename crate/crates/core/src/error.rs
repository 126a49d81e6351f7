use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("invalid country config: {0}")]
    InvalidConfig(ValidationReport),

    #[error("invalid policy regime: {0}")]
    InvalidRegime(String),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("zero-variance column `{0}`")]
    ZeroVariance(String),

    #[error("constant column `{0}` cannot be normalized")]
    ConstantColumn(String),

    #[error("label `{0}` not found")]
    LabelNotFound(String),

    #[error("need at least {required} items, got {got}")]
    TooFew { required: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
