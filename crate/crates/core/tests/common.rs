#![allow(dead_code)]

use alterlda_core::corpus::{
    build_corpus_with, Corpus, DocMeta, Token, TokenizedDocument, Vocabulary,
};

/// Corpus over words `w0..w{v-1}` from per-document (word, flag) lists.
pub fn corpus_from(docs: &[Vec<(usize, usize)>], v: usize) -> Corpus {
    let vocab = Vocabulary::from_words((0..v).map(|i| format!("w{i}"))).unwrap();
    let documents = docs
        .iter()
        .enumerate()
        .map(|(m, toks)| TokenizedDocument {
            doc_id: format!("d{m}"),
            meta: DocMeta {
                author: format!("a{}", m % 2),
                ..DocMeta::default()
            },
            tokens: toks
                .iter()
                .map(|&(w, c)| Token {
                    surface: format!("w{w}"),
                    vocab_id: Some(w as u32),
                    alt_flag: c as u8,
                    span_id: None,
                })
                .collect(),
            spans: vec![],
        })
        .collect();
    build_corpus_with(vocab, documents).unwrap()
}
