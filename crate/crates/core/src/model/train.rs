use serde::{Deserialize, Serialize};

use super::{HyperParams, ModelError, ModelState, SamplerMode};
use crate::corpus::Corpus;

/// Smoothed point estimates. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub num_docs: usize,
    /// K x V topic-word distributions.
    pub beta: Vec<f64>,
    /// M x K document-topic mixtures.
    pub theta: Vec<f64>,
    /// K x 2 alteration tendencies; column 1 is the altered mode.
    pub gamma: Vec<f64>,
}

impl PosteriorEstimate {
    pub fn from_state(state: &ModelState) -> Self {
        let h = state.hyper();
        let c = state.counts();
        let obs = state.observations();
        let (k, v, m) = (h.k, obs.vocab_size(), obs.num_docs());
        let eta_sum = h.eta_sum();
        let alpha_sum = h.alpha_sum();
        let xi_sum = h.xi_sum();

        let mut beta = vec![0.0; k * v];
        let mut gamma = vec![0.0; k * 2];
        for t in 0..k {
            let n = c.n_k(t) as f64;
            for w in 0..v {
                beta[t * v + w] = (c.n_kv(t, w) as f64 + h.eta[w]) / (n + eta_sum);
            }
            for a in 0..2 {
                gamma[t * 2 + a] = (c.n_ka(t, a) as f64 + h.xi[a]) / (n + xi_sum);
            }
        }
        let mut theta = vec![0.0; m * k];
        for d in 0..m {
            let len = obs.doc_len(d) as f64;
            for t in 0..k {
                theta[d * k + t] = (c.n_km(t, d) as f64 + h.alpha[t]) / (len + alpha_sum);
            }
        }
        PosteriorEstimate {
            num_topics: k,
            vocab_size: v,
            num_docs: m,
            beta,
            theta,
            gamma,
        }
    }

    pub fn beta(&self, k: usize, v: usize) -> f64 {
        self.beta[k * self.vocab_size + v]
    }

    pub fn theta(&self, m: usize, k: usize) -> f64 {
        self.theta[m * self.num_topics + k]
    }

    pub fn gamma(&self, k: usize, a: usize) -> f64 {
        self.gamma[k * 2 + a]
    }

    pub fn beta_row(&self, k: usize) -> &[f64] {
        &self.beta[k * self.vocab_size..(k + 1) * self.vocab_size]
    }

    fn accumulate(&mut self, other: &PosteriorEstimate) {
        for (a, b) in self
            .beta
            .iter_mut()
            .chain(self.theta.iter_mut())
            .chain(self.gamma.iter_mut())
            .zip(other.beta.iter().chain(&other.theta).chain(&other.gamma))
        {
            *a += b;
        }
    }

    fn scale(&mut self, factor: f64) {
        for x in self
            .beta
            .iter_mut()
            .chain(self.theta.iter_mut())
            .chain(self.gamma.iter_mut())
        {
            *x *= factor;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub sweeps: usize,
    pub burn_in: usize,
    /// Average the estimate over every `lag`-th post-burn-in sweep; `None`
    /// uses the final state only.
    pub sample_lag: Option<usize>,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            sweeps: 1000,
            burn_in: 500,
            sample_lag: Some(10),
        }
    }
}

impl TrainSchedule {
    pub fn single_sample(sweeps: usize, burn_in: usize) -> Self {
        TrainSchedule {
            sweeps,
            burn_in,
            sample_lag: None,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.sweeps <= self.burn_in || self.sample_lag == Some(0) {
            return Err(ModelError::InvalidSchedule {
                sweeps: self.sweeps,
                burn_in: self.burn_in,
            });
        }
        Ok(())
    }
}

pub fn train(
    corpus: &Corpus,
    hyper: HyperParams,
    seed: u64,
    schedule: TrainSchedule,
) -> Result<(ModelState, PosteriorEstimate), ModelError> {
    train_with_mode(corpus, hyper, seed, schedule, SamplerMode::AlterLda)
}

pub fn train_with_mode(
    corpus: &Corpus,
    hyper: HyperParams,
    seed: u64,
    schedule: TrainSchedule,
    mode: SamplerMode,
) -> Result<(ModelState, PosteriorEstimate), ModelError> {
    schedule.validate()?;
    let mut state = ModelState::init(corpus, hyper, seed)?.with_mode(mode);
    let mut sum: Option<PosteriorEstimate> = None;
    let mut samples = 0usize;
    for s in 1..=schedule.sweeps {
        state.sweep();
        if let Some(lag) = schedule.sample_lag {
            if s > schedule.burn_in && (s - schedule.burn_in).is_multiple_of(lag) {
                let est = PosteriorEstimate::from_state(&state);
                match sum.as_mut() {
                    Some(acc) => acc.accumulate(&est),
                    None => sum = Some(est),
                }
                samples += 1;
            }
        }
    }
    let posterior = match sum {
        Some(mut acc) => {
            acc.scale(1.0 / samples as f64);
            acc
        }
        None => PosteriorEstimate::from_state(&state),
    };
    Ok((state, posterior))
}
