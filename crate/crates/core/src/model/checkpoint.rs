use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HyperParams, ModelError, ModelState, PosteriorEstimate, TrainSchedule};
use crate::corpus::{Corpus, Vocabulary};
use crate::eval::SplitSpec;

pub const CHECKPOINT_FORMAT: &str = "alterlda-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON model checkpoint. Carries the training split so evaluation and
/// suggestion can rebuild the same train/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub hyper: HyperParams,
    pub seed: u64,
    pub sweep_index: u64,
    /// ChaCha word position, decimal (u128 does not fit a JSON number).
    pub rng_word_pos: String,
    pub z: Vec<u32>,
    pub vocab_hash: String,
    pub vocab_size: usize,
    pub schedule: TrainSchedule,
    pub split: SplitSpec,
    #[serde(default)]
    pub corpus_path: Option<String>,
    pub posterior: PosteriorEstimate,
}

impl Checkpoint {
    pub fn new(
        state: &ModelState,
        posterior: PosteriorEstimate,
        vocabulary: &Vocabulary,
        schedule: TrainSchedule,
        split: SplitSpec,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            hyper: state.hyper().clone(),
            seed: state.seed(),
            sweep_index: state.sweep_index(),
            rng_word_pos: state.rng_word_pos().to_string(),
            z: state.assignments().to_vec(),
            vocab_hash: vocabulary.hash(),
            vocab_size: vocabulary.len(),
            schedule,
            split,
            corpus_path: None,
            posterior,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, self).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(File::open(path)?))
            .map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        Ok(ckpt)
    }

    /// Refuses corpora whose vocabulary differs from the training one.
    pub fn check_vocabulary(&self, vocabulary: &Vocabulary) -> Result<(), ModelError> {
        if vocabulary.len() != self.vocab_size || vocabulary.hash() != self.vocab_hash {
            return Err(ModelError::VocabularyMismatch {
                expected: self.vocab_size,
                found: vocabulary.len(),
            });
        }
        Ok(())
    }

    /// Sampler state for resuming training on the same training corpus.
    pub fn restore_state(&self, train_corpus: &Corpus) -> Result<ModelState, ModelError> {
        self.check_vocabulary(&train_corpus.vocabulary)?;
        let pos = self
            .rng_word_pos
            .parse::<u128>()
            .map_err(|e| ModelError::Checkpoint(format!("rng_word_pos: {e}")))?;
        ModelState::restore(
            train_corpus,
            self.hyper.clone(),
            self.z.clone(),
            self.seed,
            self.sweep_index,
            pos,
        )
    }
}
