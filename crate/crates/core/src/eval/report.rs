use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auroc, balanced_accuracy, EvalError};
use crate::corpus::Corpus;
use crate::model::{FoldInResult, ModelError, MISSING_GROUP};

pub const TOTAL_GROUP: &str = "(total)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub group: String,
    pub balanced_accuracy: f64,
    /// Absent when the group holds a single class.
    pub auroc: Option<f64>,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub group_by: String,
    /// Sorted by group name.
    pub rows: Vec<EvalRow>,
    pub total_row: Option<EvalRow>,
}

impl EvalReport {
    pub fn empty(group_by: &str) -> Self {
        EvalReport {
            group_by: group_by.to_owned(),
            rows: vec![],
            total_row: None,
        }
    }
}

/// Scores fold-in probabilities against the withheld alteration flags of
/// `test`, per metadata group and in total. A token is predicted altered
/// when its probability reaches `threshold`.
pub fn evaluate(
    results: &[FoldInResult],
    test: &Corpus,
    group_by: &str,
    threshold: f64,
) -> Result<EvalReport, EvalError> {
    let by_id: HashMap<&str, _> = test
        .documents
        .iter()
        .map(|d| (d.doc_id.as_str(), d))
        .collect();
    // group -> (truth, score)
    let mut groups: BTreeMap<String, (Vec<bool>, Vec<f64>)> = BTreeMap::new();
    for result in results {
        let doc = by_id
            .get(result.doc_id.as_str())
            .ok_or_else(|| ModelError::UnknownDocument(result.doc_id.clone()))?;
        if doc.tokens.len() != result.token_alt_prob.len() {
            return Err(EvalError::LengthMismatch {
                left: doc.tokens.len(),
                right: result.token_alt_prob.len(),
            });
        }
        let group = doc
            .meta
            .field(group_by)
            .ok_or_else(|| ModelError::UnknownMetadataKey(group_by.to_owned()))?
            .unwrap_or(MISSING_GROUP)
            .to_owned();
        let entry = groups.entry(group).or_default();
        entry.0.extend(doc.tokens.iter().map(|t| t.alt_flag == 1));
        entry.1.extend_from_slice(&result.token_alt_prob);
    }
    groups.retain(|_, (truth, _)| !truth.is_empty());
    if groups.is_empty() {
        return Ok(EvalReport::empty(group_by));
    }

    let rows = groups
        .par_iter()
        .map(|(group, (truth, scores))| row(group, truth, scores, threshold))
        .collect::<Result<Vec<_>, _>>()?;
    let truth: Vec<bool> = groups.values().flat_map(|g| g.0.iter().copied()).collect();
    let scores: Vec<f64> = groups.values().flat_map(|g| g.1.iter().copied()).collect();
    let total_row = row(TOTAL_GROUP, &truth, &scores, threshold)?;
    Ok(EvalReport {
        group_by: group_by.to_owned(),
        rows,
        total_row: Some(total_row),
    })
}

fn row(group: &str, truth: &[bool], scores: &[f64], threshold: f64) -> Result<EvalRow, EvalError> {
    let pred: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
    let auroc = match auroc(truth, scores) {
        Ok(v) => Some(v),
        Err(EvalError::SingleClass) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalRow {
        group: group.to_owned(),
        balanced_accuracy: balanced_accuracy(truth, &pred)?,
        auroc,
        support: truth.len(),
    })
}
