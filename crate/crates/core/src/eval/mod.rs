//! Train/test splits and the token-level evaluation metrics.

mod metrics;
mod report;
mod split;

use thiserror::Error;

use crate::model::ModelError;

pub use metrics::{auroc, balanced_accuracy};
pub use report::{evaluate, EvalReport, EvalRow, TOTAL_GROUP};
pub use split::{split, Setting, SplitSpec, DEFAULT_TEST_FRACTION};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no input to evaluate")]
    EmptyInput,
    #[error("length mismatch: {left} labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },
    #[error("AUROC needs both classes present")]
    SingleClass,
    #[error("score is NaN at position {0}")]
    NanScore(usize),
    #[error("corpus has no documents with content-related alterations")]
    NoAlteredDocuments,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
