use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{Corpus, TokenizedDocument};

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// Train on everything, no test set.
    S1,
    /// Train on altered documents, test on unaltered ones.
    S2,
    /// Token-level split inside every altered document.
    S3,
}

impl std::str::FromStr for Setting {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, EvalError> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Setting::S1),
            "s2" => Ok(Setting::S2),
            "s3" => Ok(Setting::S3),
            other => Err(EvalError::InvalidSplit(format!(
                "unknown setting `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setting::S1 => "s1",
            Setting::S2 => "s2",
            Setting::S3 => "s3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub setting: Setting,
    /// Present iff `setting` is S3.
    pub test_fraction: Option<f64>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn s1() -> Self {
        SplitSpec {
            setting: Setting::S1,
            test_fraction: None,
            seed: 0,
        }
    }

    pub fn s2() -> Self {
        SplitSpec {
            setting: Setting::S2,
            test_fraction: None,
            seed: 0,
        }
    }

    pub fn s3(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            setting: Setting::S3,
            test_fraction: Some(test_fraction),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        match (self.setting, self.test_fraction) {
            (Setting::S3, Some(f)) if f > 0.0 && f < 1.0 => Ok(()),
            (Setting::S3, Some(f)) => Err(EvalError::InvalidSplit(format!(
                "test fraction {f} outside (0, 1)"
            ))),
            (Setting::S3, None) => Err(EvalError::InvalidSplit("s3 needs a test fraction".into())),
            (_, Some(_)) => Err(EvalError::InvalidSplit(format!(
                "test fraction is only meaningful for s3, not {}",
                self.setting
            ))),
            (_, None) => Ok(()),
        }
    }
}

/// Splits `corpus` into (train, test). Both share the vocabulary of
/// `corpus`; S3 halves keep the original document id and metadata.
///
/// S3 shuffles token positions inside each document before cutting, so
/// the halves are bags of words with no local context left.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), EvalError> {
    spec.validate()?;
    match spec.setting {
        Setting::S1 => Ok((corpus.clone(), corpus.with_documents(vec![]))),
        Setting::S2 => {
            let (train, test): (Vec<_>, Vec<_>) = corpus
                .documents
                .iter()
                .cloned()
                .partition(TokenizedDocument::has_alterations);
            if train.is_empty() {
                return Err(EvalError::NoAlteredDocuments);
            }
            Ok((corpus.with_documents(train), corpus.with_documents(test)))
        }
        Setting::S3 => {
            let f = spec.test_fraction.expect("validated");
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut train = Vec::new();
            let mut test = Vec::new();
            for doc in corpus.documents.iter().filter(|d| d.has_alterations()) {
                let n = doc.tokens.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let n_train = (((1.0 - f) * n as f64) - 1e-9).ceil() as usize;
                let (a, b) = order.split_at(n_train.min(n));
                train.push(subset(doc, a));
                let held_out = subset(doc, b);
                if !held_out.is_empty() {
                    test.push(held_out);
                }
            }
            if train.is_empty() {
                return Err(EvalError::NoAlteredDocuments);
            }
            Ok((corpus.with_documents(train), corpus.with_documents(test)))
        }
    }
}

/// Tokens at `positions`, in original order.
fn subset(doc: &TokenizedDocument, positions: &[usize]) -> TokenizedDocument {
    let mut positions = positions.to_vec();
    positions.sort_unstable();
    TokenizedDocument {
        doc_id: doc.doc_id.clone(),
        meta: doc.meta.clone(),
        tokens: positions.iter().map(|&i| doc.tokens[i].clone()).collect(),
        spans: doc.spans.clone(),
    }
}
