use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::sample_index;
use super::{derive_seed, HyperParams, ModelError, PosteriorEstimate};
use crate::corpus::{Corpus, TokenizedDocument};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldInConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    /// Tokens with alteration probability at or above this are suggested.
    pub threshold: f64,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        FoldInConfig {
            sweeps: 200,
            burn_in: 100,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldInResult {
    pub doc_id: String,
    pub token_alt_prob: Vec<f64>,
    pub suggested: Vec<bool>,
}

impl FoldInResult {
    pub fn suggested_count(&self) -> usize {
        self.suggested.iter().filter(|&&s| s).count()
    }
}

/// Infers topic assignments for an unseen document with `beta` and `gamma`
/// held fixed. Alteration flags of the document are not used; each token's
/// probability is the post-burn-in average of `gamma[z, altered]`.
/// Out-of-vocabulary tokens (`vocab_id = None`) get probability 0.
pub fn fold_in(
    posterior: &PosteriorEstimate,
    hyper: &HyperParams,
    doc: &TokenizedDocument,
    cfg: &FoldInConfig,
    seed: u64,
) -> Result<FoldInResult, ModelError> {
    let k = posterior.num_topics;
    if hyper.alpha.len() != k {
        return Err(ModelError::InvalidHyper(format!(
            "alpha has length {}, posterior has {k} topics",
            hyper.alpha.len()
        )));
    }
    if cfg.sweeps <= cfg.burn_in {
        return Err(ModelError::InvalidSchedule {
            sweeps: cfg.sweeps,
            burn_in: cfg.burn_in,
        });
    }
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(ModelError::InvalidHyper(format!(
            "decision threshold {} outside (0, 1]",
            cfg.threshold
        )));
    }

    let mut words: Vec<(usize, usize)> = Vec::new();
    for (pos, tok) in doc.tokens.iter().enumerate() {
        if let Some(v) = tok.vocab_id {
            if v as usize >= posterior.vocab_size {
                return Err(ModelError::VocabularyMismatch {
                    expected: posterior.vocab_size,
                    found: v as usize + 1,
                });
            }
            words.push((pos, v as usize));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
    let mut doc_topic = vec![0u32; k];
    for &t in &z {
        doc_topic[t] += 1;
    }

    let mut acc = vec![0.0; words.len()];
    let mut scores = vec![0.0; k];
    let mut samples = 0usize;
    for sweep in 0..cfg.sweeps {
        for (i, &(_, w)) in words.iter().enumerate() {
            doc_topic[z[i]] -= 1;
            for t in 0..k {
                scores[t] = (doc_topic[t] as f64 + hyper.alpha[t]) * posterior.beta(t, w);
            }
            z[i] = sample_index(&mut rng, &scores);
            doc_topic[z[i]] += 1;
        }
        if sweep >= cfg.burn_in {
            for (a, &t) in acc.iter_mut().zip(&z) {
                *a += posterior.gamma(t, 1);
            }
            samples += 1;
        }
    }

    let mut token_alt_prob = vec![0.0; doc.tokens.len()];
    for (&(pos, _), a) in words.iter().zip(&acc) {
        token_alt_prob[pos] = a / samples as f64;
    }
    let suggested = token_alt_prob.iter().map(|&p| p >= cfg.threshold).collect();
    Ok(FoldInResult {
        doc_id: doc.doc_id.clone(),
        token_alt_prob,
        suggested,
    })
}

/// Folds in every document of `corpus` in parallel; document `m` uses the
/// seed derived from `(seed, m)`, so results do not depend on scheduling.
pub fn fold_in_corpus(
    posterior: &PosteriorEstimate,
    hyper: &HyperParams,
    corpus: &Corpus,
    cfg: &FoldInConfig,
    seed: u64,
) -> Result<Vec<FoldInResult>, ModelError> {
    corpus
        .documents
        .par_iter()
        .enumerate()
        .map(|(m, doc)| fold_in(posterior, hyper, doc, cfg, derive_seed(seed, m as u64)))
        .collect()
}
