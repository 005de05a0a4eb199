use super::EvalError;

/// Mean of the per-class recalls. A class absent from `y_true` contributes
/// no term.
pub fn balanced_accuracy(y_true: &[bool], y_pred: &[bool]) -> Result<f64, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    // [class][hit]
    let mut counts = [[0u64; 2]; 2];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        counts[usize::from(t)][usize::from(t == p)] += 1;
    }
    let recalls: Vec<f64> = counts
        .iter()
        .filter(|c| c[0] + c[1] > 0)
        .map(|c| c[1] as f64 / (c[0] + c[1]) as f64)
        .collect();
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// Mann-Whitney AUROC: the fraction of positive/negative pairs in which
/// the positive scores higher, ties counting one half.
pub fn auroc(y_true: &[bool], scores: &[f64]) -> Result<f64, EvalError> {
    if y_true.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(EvalError::NanScore(i));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let positives = y_true.iter().filter(|&&t| t).count() as u128;
    let negatives = y_true.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }

    // twice the win count keeps half-ties integral
    let mut doubled: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        // -0.0 and 0.0 tie
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if y_true[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(doubled as f64 / (2 * positives * negatives) as f64)
}
