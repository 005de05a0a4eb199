//! Corpus data model: parsed TEI documents, tokenized documents and the
//! vocabulary-indexed corpus consumed by the classifier and the topic model.

mod jsonl;
mod tei;
mod tokenize;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::AlterationSpan;

pub use jsonl::{read_corpus, read_vocabulary, vocabulary_path, write_corpus, write_vocabulary};
pub use tei::parse_tei;
pub use tokenize::{tokenize, TokenizerConfig};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("document has no transcription body")]
    MissingBody,
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
    #[error("corpus format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Who wrote a hand, as declared by `handNote/@scribe` in the TEI header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandScribe {
    Author,
    Archivist,
    Editor,
    Unknown,
}

impl HandScribe {
    pub fn from_scribe_attr(value: Option<&str>) -> Self {
        match value.map(|v| v.trim().to_ascii_lowercase()).as_deref() {
            Some("author") => HandScribe::Author,
            Some("archivist") => HandScribe::Archivist,
            Some("editor") => HandScribe::Editor,
            _ => HandScribe::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Base,
    Added,
    Deleted,
    Note,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSegment {
    pub text: String,
    pub kind: SegmentKind,
    pub hand_id: Option<String>,
    pub hand_scribe: Option<HandScribe>,
    pub note_type: Option<String>,
    /// Shared by add/del segments that form one alteration (a replacement
    /// when both kinds are present). Every non-base segment carries one.
    pub span_group: Option<usize>,
    /// Index of the enclosing block (paragraph, line, note). Words never
    /// cross a block boundary.
    pub block: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub author: String,
    pub addressee: Option<String>,
    pub date: Option<String>,
}

impl DocMeta {
    /// Value of a grouping key. Supported keys: author, addressee, date.
    pub fn field(&self, key: &str) -> Option<Option<&str>> {
        match key {
            "author" => Some(Some(self.author.as_str())),
            "addressee" => Some(self.addressee.as_deref()),
            "date" => Some(self.date.as_deref()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub doc_id: String,
    pub meta: DocMeta,
    pub segments: Vec<TextSegment>,
    /// Elements outside the interpreted TEI subset, in first-seen order.
    pub warnings: Vec<String>,
}

impl RawDocument {
    pub fn text(&self) -> String {
        self.segments.iter().map(|s| s.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// `None` before indexing, or for out-of-vocabulary tokens of a
    /// document mapped onto a foreign vocabulary.
    pub vocab_id: Option<u32>,
    pub alt_flag: u8,
    pub span_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub meta: DocMeta,
    pub tokens: Vec<Token>,
    pub spans: Vec<AlterationSpan>,
}

impl TokenizedDocument {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_alterations(&self) -> bool {
        self.tokens.iter().any(|t| t.alt_flag == 1)
    }
}

/// Dense bijection between surface forms and ids in `[0, V)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for (line, w) in words.into_iter().enumerate() {
            let w = w.into();
            if vocab.index.contains_key(&w) {
                return Err(IngestError::Format {
                    line: line + 1,
                    message: format!("duplicate vocabulary entry `{w}`"),
                });
            }
            vocab.intern(&w);
        }
        Ok(vocab)
    }

    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Hex SHA-256 over the id-ordered surface forms. Checkpoints use it to
    /// refuse corpora indexed differently from the training corpus.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<TokenizedDocument>,
    pub vocabulary: Vocabulary,
}

impl Corpus {
    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn document(&self, doc_id: &str) -> Option<&TokenizedDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// Corpus with the same vocabulary and a different document list.
    pub fn with_documents(&self, documents: Vec<TokenizedDocument>) -> Corpus {
        Corpus {
            documents,
            vocabulary: self.vocabulary.clone(),
        }
    }

    /// Checks the structural invariants: unique ids, every token indexed
    /// inside `[0, V)`.
    pub fn validate(&self) -> Result<(), IngestError> {
        let mut seen = HashSet::new();
        let v = self.vocabulary.len() as u32;
        for (line, doc) in self.documents.iter().enumerate() {
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(IngestError::DuplicateDocId(doc.doc_id.clone()));
            }
            for tok in &doc.tokens {
                match tok.vocab_id {
                    Some(id) if id < v => {}
                    other => {
                        return Err(IngestError::Format {
                            line: line + 1,
                            message: format!(
                                "token `{}` has vocab id {:?} outside [0, {v})",
                                tok.surface, other
                            ),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assigns dense vocabulary ids by first occurrence.
pub fn build_corpus(docs: Vec<TokenizedDocument>) -> Result<Corpus, IngestError> {
    build_corpus_with(Vocabulary::new(), docs)
}

/// Like [`build_corpus`] but extends a pre-seeded vocabulary.
pub fn build_corpus_with(
    mut vocabulary: Vocabulary,
    mut docs: Vec<TokenizedDocument>,
) -> Result<Corpus, IngestError> {
    let mut seen = HashSet::new();
    for doc in &docs {
        if !seen.insert(doc.doc_id.clone()) {
            return Err(IngestError::DuplicateDocId(doc.doc_id.clone()));
        }
    }
    for doc in &mut docs {
        for tok in &mut doc.tokens {
            tok.vocab_id = Some(vocabulary.intern(&tok.surface));
        }
    }
    Ok(Corpus {
        documents: docs,
        vocabulary,
    })
}

/// Re-indexes a document against a fixed vocabulary. Unknown surfaces get
/// `vocab_id = None`.
pub fn map_to_vocabulary(doc: &TokenizedDocument, vocabulary: &Vocabulary) -> TokenizedDocument {
    let mut out = doc.clone();
    for tok in &mut out.tokens {
        tok.vocab_id = vocabulary.get(&tok.surface);
    }
    out
}
