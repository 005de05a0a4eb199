//! JSON-lines corpus files: one document per line plus a sidecar vocabulary
//! file listing one surface form per line, line number = vocab id.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Corpus, DocMeta, IngestError, Token, TokenizedDocument, Vocabulary};
use crate::classify::AlterationSpan;

type TokenRow = (String, Option<u32>, u8, Option<usize>);

#[derive(Serialize, Deserialize)]
struct DocumentLine {
    doc_id: String,
    author: String,
    addressee: Option<String>,
    date: Option<String>,
    tokens: Vec<TokenRow>,
    #[serde(default)]
    spans: Vec<AlterationSpan>,
}

impl From<&TokenizedDocument> for DocumentLine {
    fn from(doc: &TokenizedDocument) -> Self {
        DocumentLine {
            doc_id: doc.doc_id.clone(),
            author: doc.meta.author.clone(),
            addressee: doc.meta.addressee.clone(),
            date: doc.meta.date.clone(),
            tokens: doc
                .tokens
                .iter()
                .map(|t| (t.surface.clone(), t.vocab_id, t.alt_flag, t.span_id))
                .collect(),
            spans: doc.spans.clone(),
        }
    }
}

impl From<DocumentLine> for TokenizedDocument {
    fn from(line: DocumentLine) -> Self {
        TokenizedDocument {
            doc_id: line.doc_id,
            meta: DocMeta {
                author: line.author,
                addressee: line.addressee,
                date: line.date,
            },
            tokens: line
                .tokens
                .into_iter()
                .map(|(surface, vocab_id, alt_flag, span_id)| Token {
                    surface,
                    vocab_id,
                    alt_flag,
                    span_id,
                })
                .collect(),
            spans: line.spans,
        }
    }
}

/// `corpus.jsonl` -> `corpus.vocab`
pub fn vocabulary_path(corpus_path: &Path) -> PathBuf {
    corpus_path.with_extension("vocab")
}

pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, mut out: W) -> Result<(), IngestError> {
    for w in vocab.words() {
        writeln!(out, "{w}")?;
    }
    Ok(())
}

pub fn read_vocabulary<R: BufRead>(input: R) -> Result<Vocabulary, IngestError> {
    let words = input.lines().collect::<Result<Vec<_>, _>>()?;
    Vocabulary::from_words(words)
}

pub fn write_documents<W: Write>(
    docs: &[TokenizedDocument],
    mut out: W,
) -> Result<(), IngestError> {
    for doc in docs {
        let line = serde_json::to_string(&DocumentLine::from(doc)).expect("document serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_documents<R: BufRead>(input: R) -> Result<Vec<TokenizedDocument>, IngestError> {
    let mut docs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DocumentLine =
            serde_json::from_str(&line).map_err(|e| IngestError::Format {
                line: i + 1,
                message: e.to_string(),
            })?;
        docs.push(parsed.into());
    }
    Ok(docs)
}

/// Writes `path` and its vocabulary sidecar.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), IngestError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_documents(&corpus.documents, &mut out)?;
    out.flush()?;
    let mut vocab_out = BufWriter::new(File::create(vocabulary_path(path))?);
    write_vocabulary(&corpus.vocabulary, &mut vocab_out)?;
    vocab_out.flush()?;
    Ok(())
}

pub fn read_corpus(path: &Path) -> Result<Corpus, IngestError> {
    let documents = read_documents(BufReader::new(File::open(path)?))?;
    let vocabulary = read_vocabulary(BufReader::new(File::open(vocabulary_path(path))?))?;
    let corpus = Corpus {
        documents,
        vocabulary,
    };
    corpus.validate()?;
    Ok(corpus)
}
