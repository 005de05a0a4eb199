use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{FoldInResult, ModelError};
use crate::corpus::Corpus;

pub const TOP_WORDS: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionRow {
    pub group: String,
    pub suggested_count: usize,
    /// Most frequent suggested words, descending; ties alphabetical.
    pub top_words: Vec<String>,
}

/// Suggested alteration counts per metadata group, ascending by count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionTable {
    pub group_by: String,
    pub rows: Vec<SuggestionRow>,
}

pub const MISSING_GROUP: &str = "(none)";

pub fn suggest_report(
    results: &[FoldInResult],
    corpus: &Corpus,
    group_by: &str,
) -> Result<SuggestionTable, ModelError> {
    let mut groups: BTreeMap<String, HashMap<&str, usize>> = BTreeMap::new();
    let mut totals: BTreeMap<String, usize> = BTreeMap::new();
    for result in results {
        let doc = corpus
            .document(&result.doc_id)
            .ok_or_else(|| ModelError::UnknownDocument(result.doc_id.clone()))?;
        let group = doc
            .meta
            .field(group_by)
            .ok_or_else(|| ModelError::UnknownMetadataKey(group_by.to_owned()))?
            .unwrap_or(MISSING_GROUP)
            .to_owned();
        let words = groups.entry(group.clone()).or_default();
        let total = totals.entry(group).or_default();
        for (tok, &s) in doc.tokens.iter().zip(&result.suggested) {
            if s {
                *words.entry(tok.surface.as_str()).or_default() += 1;
                *total += 1;
            }
        }
    }

    let mut rows: Vec<SuggestionRow> = groups
        .into_iter()
        .map(|(group, words)| {
            let mut ranked: Vec<(&str, usize)> = words.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            SuggestionRow {
                suggested_count: totals[&group],
                group,
                top_words: ranked
                    .into_iter()
                    .take(TOP_WORDS)
                    .map(|(w, _)| w.to_owned())
                    .collect(),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.suggested_count
            .cmp(&b.suggested_count)
            .then(a.group.cmp(&b.group))
    });
    Ok(SuggestionTable {
        group_by: group_by.to_owned(),
        rows,
    })
}
