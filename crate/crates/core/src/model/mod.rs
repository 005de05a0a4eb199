//! alterLDA: LDA whose topics additionally carry a Dirichlet-distributed
//! tendency to be altered. Each token's alteration flag is drawn from the
//! tendency of its topic. Inference is collapsed Gibbs sampling over the
//! topic assignments.

mod checkpoint;
mod foldin;
mod hyper;
mod state;
mod suggest;
mod train;

use thiserror::Error;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use foldin::{fold_in, fold_in_corpus, FoldInConfig, FoldInResult};
pub use hyper::HyperParams;
pub use state::{CountTables, ModelState, Observations, SamplerMode};
pub use suggest::{suggest_report, SuggestionRow, SuggestionTable, MISSING_GROUP, TOP_WORDS};
pub use train::{train, train_with_mode, PosteriorEstimate, TrainSchedule};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
    #[error("token {token} of document {doc} is out of range or unindexed")]
    IndexOutOfRange { doc: usize, token: usize },
    #[error("vocabulary mismatch: model expects {expected} words, got {found}")]
    VocabularyMismatch { expected: usize, found: usize },
    #[error("invalid schedule: {sweeps} sweeps with burn-in {burn_in}")]
    InvalidSchedule { sweeps: usize, burn_in: usize },
    #[error("unknown metadata key `{0}` (expected author, addressee or date)")]
    UnknownMetadataKey(String),
    #[error("document `{0}` not found in corpus")]
    UnknownDocument(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent child seed for job `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

#[cfg(test)]
mod tests;
