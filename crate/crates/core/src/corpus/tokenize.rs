use std::collections::{BTreeMap, HashSet};

use unicode_segmentation::UnicodeSegmentation;

use super::{HandScribe, RawDocument, SegmentKind, TextSegment, Token, TokenizedDocument};
use crate::classify::AlterationSpan;

#[derive(Debug, Clone, Default)]
pub struct TokenizerConfig {
    pub keep_punct: bool,
    /// Surface forms dropped from the token stream (exact match). Alteration
    /// spans keep them.
    pub stopwords: HashSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PieceClass {
    Word,
    Punct,
    Space,
}

fn classify_piece(piece: &str) -> PieceClass {
    if piece.chars().all(char::is_whitespace) {
        PieceClass::Space
    } else if piece.chars().any(char::is_alphanumeric) {
        PieceClass::Word
    } else {
        PieceClass::Punct
    }
}

#[derive(Default)]
struct SpanBuilder {
    before: Vec<String>,
    after: Vec<String>,
    hand: Option<HandScribe>,
    note_type: Option<String>,
}

/// Splits segment text on Unicode word boundaries.
///
/// A word that straddles an alteration boundary inside a single word (e.g.
/// `w<del>u</del><add>ü</add>rde`) yields its two readings: the text before
/// the alteration (`wurde`) and after it (`würde`). Note segments never
/// enter the token stream; they only produce alteration spans.
pub fn tokenize(doc: &RawDocument, cfg: &TokenizerConfig) -> TokenizedDocument {
    let mut tokens = Vec::new();
    let mut spans: BTreeMap<usize, SpanBuilder> = BTreeMap::new();

    for run in runs(&doc.segments) {
        let segs: Vec<&TextSegment> = run.iter().map(|&i| &doc.segments[i]).collect();
        if segs[0].kind == SegmentKind::Note {
            tokenize_note(segs[0], &mut spans);
            continue;
        }

        // byte offset where each segment starts inside the run text
        let mut text = String::new();
        let mut starts = Vec::with_capacity(segs.len());
        for s in &segs {
            starts.push(text.len());
            text.push_str(&s.text);
        }
        let seg_at = |byte: usize| starts.partition_point(|&s| s <= byte) - 1;

        for (offset, piece) in text.split_word_bound_indices() {
            let class = classify_piece(piece);
            if class == PieceClass::Space {
                continue;
            }
            let mut before = String::new();
            let mut after = String::new();
            let mut span = None;
            let mut altered = false;
            for (i, ch) in piece.char_indices() {
                let seg = segs[seg_at(offset + i)];
                match seg.kind {
                    SegmentKind::Base => {
                        before.push(ch);
                        after.push(ch);
                    }
                    SegmentKind::Deleted => before.push(ch),
                    SegmentKind::Added => after.push(ch),
                    SegmentKind::Note => unreachable!("notes form their own run"),
                }
                if seg.kind != SegmentKind::Base {
                    altered = true;
                    if let (None, Some(group)) = (span, seg.span_group) {
                        span = Some(group);
                        let b = spans.entry(group).or_default();
                        b.hand = b.hand.or(seg.hand_scribe);
                    }
                }
            }

            if let Some(group) = span {
                let b = spans.entry(group).or_default();
                if !before.is_empty() {
                    b.before.push(before.clone());
                }
                if !after.is_empty() {
                    b.after.push(after.clone());
                }
            }
            let readings: Vec<String> = if !altered || before == after {
                vec![before]
            } else {
                [before, after]
                    .into_iter()
                    .filter(|r| !r.is_empty())
                    .collect()
            };

            if class == PieceClass::Punct && !cfg.keep_punct {
                continue;
            }
            for surface in readings {
                if cfg.stopwords.contains(&surface) {
                    continue;
                }
                tokens.push(Token {
                    surface,
                    vocab_id: None,
                    alt_flag: u8::from(altered),
                    span_id: span,
                });
            }
        }
    }

    let spans = spans
        .into_iter()
        .filter(|(_, b)| !(b.before.is_empty() && b.after.is_empty()))
        .map(|(span_id, b)| {
            AlterationSpan::new(
                span_id,
                doc.doc_id.clone(),
                b.before,
                b.after,
                b.hand.unwrap_or(HandScribe::Author),
                b.note_type,
            )
        })
        .collect();

    TokenizedDocument {
        doc_id: doc.doc_id.clone(),
        meta: doc.meta.clone(),
        tokens,
        spans,
    }
}

fn tokenize_note(seg: &TextSegment, spans: &mut BTreeMap<usize, SpanBuilder>) {
    let Some(group) = seg.span_group else { return };
    let b = spans.entry(group).or_default();
    b.hand = b.hand.or(seg.hand_scribe);
    if b.note_type.is_none() {
        b.note_type = seg.note_type.clone();
    }
    b.after.extend(
        seg.text
            .split_word_bounds()
            .filter(|p| classify_piece(p) != PieceClass::Space)
            .map(str::to_owned),
    );
}

/// Groups segment indices into runs that words may span: consecutive
/// non-note segments of the same block. Each note segment is its own run.
fn runs(segments: &[TextSegment]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let joins = match out.last().and_then(|r| r.last()) {
            Some(&prev) => {
                let p = &segments[prev];
                p.block == seg.block && p.kind != SegmentKind::Note && seg.kind != SegmentKind::Note
            }
            None => false,
        };
        if joins {
            out.last_mut().unwrap().push(i);
        } else {
            out.push(vec![i]);
        }
    }
    out
}
