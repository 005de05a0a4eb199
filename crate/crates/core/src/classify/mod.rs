//! Rule cascade assigning each alteration one category. Paratexts,
//! spelling, grammar and stylistic changes are recognised in that order;
//! whatever survives all four tests is content-related.

mod levenshtein;
mod lexicon;
mod rules;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, HandScribe};

pub use levenshtein::levenshtein;
pub use lexicon::{LemmaDictionary, LemmaEntry, WordVectors};
pub use rules::{
    classify_cascade, classify_grammar, classify_paratext, classify_spelling, classify_stylistic,
    ClassifierConfig, ClassifierDeps, ParatextRules, UnknownHandPolicy,
};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("lemma dictionary is empty")]
    EmptyDictionary,
    #[error("vector file line {line}: expected {expected} dimensions, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("span {span_id} of `{doc_id}` is already classified as {category}")]
    AlreadyClassified {
        doc_id: String,
        span_id: usize,
        category: Category,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid paratext pattern `{pattern}`: {message}")]
    BadPattern { pattern: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Category {
    #[default]
    Unclassified,
    Paratext,
    Spelling,
    Grammar,
    Stylistic,
    ContentRelated,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Unclassified,
        Category::Paratext,
        Category::Spelling,
        Category::Grammar,
        Category::Stylistic,
        Category::ContentRelated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Unclassified => "Unclassified",
            Category::Paratext => "Paratext",
            Category::Spelling => "Spelling",
            Category::Grammar => "Grammar",
            Category::Stylistic => "Stylistic",
            Category::ContentRelated => "ContentRelated",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A local group of added and/or deleted tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlterationSpan {
    pub span_id: usize,
    pub doc_id: String,
    /// Deleted reading.
    pub before_tokens: Vec<String>,
    /// Added reading.
    pub after_tokens: Vec<String>,
    pub hand_scribe: HandScribe,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note_type: Option<String>,
    #[serde(default)]
    category: Category,
}

impl AlterationSpan {
    pub fn new(
        span_id: usize,
        doc_id: String,
        before_tokens: Vec<String>,
        after_tokens: Vec<String>,
        hand_scribe: HandScribe,
        note_type: Option<String>,
    ) -> Self {
        debug_assert!(!(before_tokens.is_empty() && after_tokens.is_empty()));
        AlterationSpan {
            span_id,
            doc_id,
            before_tokens,
            after_tokens,
            hand_scribe,
            note_type,
            category: Category::Unclassified,
        }
    }

    pub fn category(&self) -> Category {
        self.category
    }

    /// Categories are write-once: only an unclassified span may be assigned,
    /// and only to a concrete category.
    pub fn assign(&mut self, category: Category) -> Result<(), ClassifyError> {
        if self.category != Category::Unclassified || category == Category::Unclassified {
            return Err(ClassifyError::AlreadyClassified {
                doc_id: self.doc_id.clone(),
                span_id: self.span_id,
                category: self.category,
            });
        }
        self.category = category;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanCategory {
    pub doc_id: String,
    pub span_id: usize,
    pub category: Category,
}

/// Classifies every span of the corpus in place and rewrites token
/// alteration flags: afterwards `alt_flag = 1` exactly for tokens of
/// content-related spans.
pub fn classify_corpus(
    corpus: &mut Corpus,
    deps: &ClassifierDeps<'_>,
) -> Result<Vec<SpanCategory>, ClassifyError> {
    let mut table = Vec::new();
    for doc in &mut corpus.documents {
        let categories = doc
            .spans
            .par_iter()
            .map(|span| classify_cascade(span, deps))
            .collect::<Result<Vec<_>, _>>()?;
        for (span, category) in doc.spans.iter_mut().zip(categories) {
            span.assign(category)?;
            table.push(SpanCategory {
                doc_id: doc.doc_id.clone(),
                span_id: span.span_id,
                category,
            });
        }
        let content: std::collections::HashSet<usize> = doc
            .spans
            .iter()
            .filter(|s| s.category() == Category::ContentRelated)
            .map(|s| s.span_id)
            .collect();
        for tok in &mut doc.tokens {
            tok.alt_flag = u8::from(tok.span_id.is_some_and(|id| content.contains(&id)));
        }
    }
    Ok(table)
}
