use serde::{Deserialize, Serialize};

use super::ModelError;

/// Dirichlet concentrations: `alpha` (length K) for document mixtures,
/// `eta` (length V) for topic-word distributions and `xi` for the per-topic
/// alteration tendency over {unaltered, altered}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: [f64; 2],
}

impl HyperParams {
    pub fn symmetric(k: usize, vocab_size: usize, alpha: f64, eta: f64, xi: [f64; 2]) -> Self {
        HyperParams {
            k,
            alpha: vec![alpha; k],
            eta: vec![eta; vocab_size],
            xi,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.eta.len()
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn eta_sum(&self) -> f64 {
        self.eta.iter().sum()
    }

    pub fn xi_sum(&self) -> f64 {
        self.xi[0] + self.xi[1]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |v: &f64| v.is_finite() && *v > 0.0;
        if self.k == 0 {
            return Err(ModelError::InvalidHyper("K must be at least 1".into()));
        }
        if self.alpha.len() != self.k {
            return Err(ModelError::InvalidHyper(format!(
                "alpha has length {}, expected K = {}",
                self.alpha.len(),
                self.k
            )));
        }
        if !self.alpha.iter().all(positive)
            || !self.eta.iter().all(positive)
            || !self.xi.iter().all(positive)
        {
            return Err(ModelError::InvalidHyper(
                "concentrations must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Validates and checks that `eta` covers a vocabulary of size `v`.
    pub fn validate_for(&self, v: usize) -> Result<(), ModelError> {
        self.validate()?;
        if self.eta.len() != v {
            return Err(ModelError::VocabularyMismatch {
                expected: self.eta.len(),
                found: v,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(HyperParams::symmetric(3, 5, 0.1, 0.1, [1.0, 1.0])
            .validate_for(5)
            .is_ok());
        assert!(HyperParams::symmetric(0, 5, 0.1, 0.1, [1.0, 1.0])
            .validate()
            .is_err());
        assert!(HyperParams::symmetric(2, 5, 0.0, 0.1, [1.0, 1.0])
            .validate()
            .is_err());
        assert!(HyperParams::symmetric(2, 5, 0.1, 0.1, [1.0, -1.0])
            .validate()
            .is_err());
        assert!(HyperParams::symmetric(2, 5, 0.1, f64::NAN, [1.0, 1.0])
            .validate()
            .is_err());
        assert!(matches!(
            HyperParams::symmetric(2, 5, 0.1, 0.1, [1.0, 1.0]).validate_for(4),
            Err(ModelError::VocabularyMismatch {
                expected: 5,
                found: 4
            })
        ));
    }
}
