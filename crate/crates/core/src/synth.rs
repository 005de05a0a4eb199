//! Corpora drawn from the alterLDA generative process with known latents,
//! and reconstruction scoring against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::corpus::{build_corpus_with, Corpus, DocMeta, Token, TokenizedDocument, Vocabulary};
use crate::model::{
    derive_seed, train_with_mode, HyperParams, ModelError, ModelState, PosteriorEstimate,
    SamplerMode, TrainSchedule,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub num_docs: usize,
    pub doc_len: usize,
    pub vocab_size: usize,
    pub num_topics: usize,
    pub alpha: f64,
    pub eta: f64,
    pub xi: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.num_docs == 0 || self.doc_len == 0 || self.vocab_size == 0 || self.num_topics == 0 {
            return Err(SynthError::InvalidConfig(
                "all sizes must be at least 1".into(),
            ));
        }
        for (name, x) in [("alpha", self.alpha), ("eta", self.eta), ("xi", self.xi)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(SynthError::InvalidConfig(format!(
                    "{name} = {x} is not positive"
                )));
            }
        }
        Ok(())
    }

    /// Symmetric hyperparameters matching the generating concentrations.
    pub fn hyper(&self) -> HyperParams {
        HyperParams::symmetric(
            self.num_topics,
            self.vocab_size,
            self.alpha,
            self.eta,
            [self.xi; 2],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub config: SyntheticConfig,
    /// K x V, row-major
    pub beta_true: Vec<f64>,
    /// M x K
    pub theta_true: Vec<f64>,
    /// K x 2
    pub gamma_true: Vec<f64>,
    pub z_true: Vec<Vec<u32>>,
    pub corpus: Corpus,
}

impl SyntheticTruth {
    pub fn beta_row(&self, k: usize) -> &[f64] {
        let v = self.config.vocab_size;
        &self.beta_true[k * v..(k + 1) * v]
    }

    pub fn theta_row(&self, m: usize) -> &[f64] {
        let k = self.config.num_topics;
        &self.theta_true[m * k..(m + 1) * k]
    }

    pub fn gamma_row(&self, k: usize) -> [f64; 2] {
        [self.gamma_true[2 * k], self.gamma_true[2 * k + 1]]
    }

    /// Fraction of tokens in the majority alteration class.
    pub fn majority_baseline(&self) -> f64 {
        majority_baseline(&self.corpus)
    }
}

pub fn majority_baseline(corpus: &Corpus) -> f64 {
    let total = corpus.total_tokens();
    if total == 0 {
        return 1.0;
    }
    let altered = corpus
        .documents
        .iter()
        .flat_map(|d| &d.tokens)
        .filter(|t| t.alt_flag == 1)
        .count();
    altered.max(total - altered) as f64 / total as f64
}

/// Symmetric Dirichlet draw via log-Gamma variates, so that tiny
/// concentrations do not underflow every component to zero.
fn dirichlet<R: Rng>(rng: &mut R, concentration: f64, n: usize) -> Vec<f64> {
    // G(a) = G(a + 1) * U^(1/a)
    let boosted = Gamma::new(concentration + 1.0, 1.0).expect("positive shape");
    let logs: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = boosted.sample(rng);
            let u = 1.0 - rng.random::<f64>();
            g.ln() + u.ln() / concentration
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    out
}

fn categorical<R: Rng>(rng: &mut R, p: &[f64]) -> usize {
    let mut u = rng.random::<f64>();
    for (i, &x) in p.iter().enumerate() {
        u -= x;
        if u < 0.0 {
            return i;
        }
    }
    // rounding residue: last index with positive mass
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

pub fn synthetic_word(v: usize) -> String {
    format!("w{v}")
}

pub fn generate_corpus(cfg: &SyntheticConfig) -> Result<SyntheticTruth, SynthError> {
    cfg.validate()?;
    let (m_docs, k, v) = (cfg.num_docs, cfg.num_topics, cfg.vocab_size);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let beta_true: Vec<f64> = (0..k)
        .flat_map(|_| dirichlet(&mut rng, cfg.eta, v))
        .collect();
    let gamma_true: Vec<f64> = (0..k)
        .flat_map(|_| dirichlet(&mut rng, cfg.xi, 2))
        .collect();
    let theta_true: Vec<f64> = (0..m_docs)
        .flat_map(|_| dirichlet(&mut rng, cfg.alpha, k))
        .collect();

    let mut z_true = Vec::with_capacity(m_docs);
    let mut documents = Vec::with_capacity(m_docs);
    for m in 0..m_docs {
        let theta = &theta_true[m * k..(m + 1) * k];
        let mut zs = Vec::with_capacity(cfg.doc_len);
        let mut tokens = Vec::with_capacity(cfg.doc_len);
        for _ in 0..cfg.doc_len {
            let z = categorical(&mut rng, theta);
            let w = categorical(&mut rng, &beta_true[z * v..(z + 1) * v]);
            let c = categorical(&mut rng, &gamma_true[2 * z..2 * z + 2]);
            zs.push(z as u32);
            tokens.push(Token {
                surface: synthetic_word(w),
                vocab_id: Some(w as u32),
                alt_flag: c as u8,
                span_id: None,
            });
        }
        z_true.push(zs);
        documents.push(TokenizedDocument {
            doc_id: format!("syn{m:05}"),
            meta: DocMeta {
                author: format!("author{}", m % 5),
                ..DocMeta::default()
            },
            tokens,
            spans: vec![],
        });
    }
    let vocabulary = Vocabulary::from_words((0..v).map(synthetic_word)).expect("distinct words");
    let corpus = build_corpus_with(vocabulary, documents).expect("ids in range");
    Ok(SyntheticTruth {
        config: *cfg,
        beta_true,
        theta_true,
        gamma_true,
        z_true,
        corpus,
    })
}

/// How a token's flag is read off the inferred topic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "threshold")]
pub enum ReconstructionRule {
    /// Most probable flag of the topic.
    Argmax,
    /// Altered iff the topic's alteration probability reaches the value.
    Threshold(f64),
}

impl std::str::FromStr for ReconstructionRule {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        if s == "argmax" {
            return Ok(ReconstructionRule::Argmax);
        }
        s.strip_prefix("threshold:")
            .and_then(|t| t.parse::<f64>().ok())
            .filter(|t| *t > 0.0 && *t <= 1.0)
            .map(ReconstructionRule::Threshold)
            .ok_or_else(|| {
                SynthError::InvalidConfig(format!("rule `{s}`: expected argmax or threshold:<p>"))
            })
    }
}

impl std::fmt::Display for ReconstructionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReconstructionRule::Argmax => f.write_str("argmax"),
            ReconstructionRule::Threshold(t) => write!(f, "threshold:{t}"),
        }
    }
}

/// Predicted flag per token (flat corpus order) from the final topic
/// assignments and the estimated tendencies.
pub fn reconstruct_flags(
    state: &ModelState,
    posterior: &PosteriorEstimate,
    rule: ReconstructionRule,
) -> Vec<u8> {
    state
        .assignments()
        .iter()
        .map(|&z| {
            let (g0, g1) = (
                posterior.gamma(z as usize, 0),
                posterior.gamma(z as usize, 1),
            );
            u8::from(match rule {
                ReconstructionRule::Argmax => g1 > g0,
                ReconstructionRule::Threshold(t) => g1 >= t,
            })
        })
        .collect()
}

/// Infers topics from the words of the synthetic corpus, with the flags
/// kept out of the sampling conditional, then reads each token's flag off
/// the tendency estimated for its topic. Returns the fraction of tokens
/// whose reconstructed flag equals the generated one.
pub fn reconstruction_accuracy(
    truth: &SyntheticTruth,
    hyper: HyperParams,
    schedule: TrainSchedule,
    train_seed: u64,
    rule: ReconstructionRule,
) -> Result<f64, SynthError> {
    let (state, posterior) = train_with_mode(
        &truth.corpus,
        hyper,
        train_seed,
        schedule,
        SamplerMode::WordsOnly,
    )?;
    let predicted = reconstruct_flags(&state, &posterior, rule);
    let observed = truth
        .corpus
        .documents
        .iter()
        .flat_map(|d| &d.tokens)
        .map(|t| t.alt_flag);
    let hits = predicted
        .iter()
        .zip(observed)
        .filter(|(p, c)| **p == *c)
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub alphas: Vec<f64>,
    pub etas: Vec<f64>,
    pub xis: Vec<f64>,
    /// Corpus sizes in tokens.
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub num_topics: usize,
    pub vocab_size: usize,
    pub doc_len: usize,
    pub schedule: TrainSchedule,
    pub rule: ReconstructionRule,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            alphas: vec![0.1, 0.5, 1.0],
            etas: vec![0.1, 0.5, 1.0],
            xis: vec![0.1, 0.5, 1.0],
            sizes: vec![5000, 20000],
            runs: 2,
            num_topics: 10,
            vocab_size: 500,
            doc_len: 100,
            schedule: TrainSchedule {
                sweeps: 300,
                burn_in: 200,
                sample_lag: Some(10),
            },
            rule: ReconstructionRule::Argmax,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub eta: f64,
    pub xi: f64,
    pub tokens: usize,
    pub run: usize,
    pub accuracy: f64,
    pub majority_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCellMean {
    pub alpha: f64,
    pub eta: f64,
    pub xi: f64,
    pub tokens: usize,
    pub accuracy: f64,
}

impl GridResult {
    /// Mean accuracy over runs, in grid order.
    pub fn cell_means(&self) -> Vec<GridCellMean> {
        let mut out: Vec<(GridCellMean, usize)> = Vec::new();
        for r in &self.rows {
            let same = |c: &GridCellMean| {
                c.alpha == r.alpha && c.eta == r.eta && c.xi == r.xi && c.tokens == r.tokens
            };
            match out.iter_mut().find(|(c, _)| same(c)) {
                Some((c, n)) => {
                    c.accuracy += r.accuracy;
                    *n += 1;
                }
                None => out.push((
                    GridCellMean {
                        alpha: r.alpha,
                        eta: r.eta,
                        xi: r.xi,
                        tokens: r.tokens,
                        accuracy: r.accuracy,
                    },
                    1,
                )),
            }
        }
        out.into_iter()
            .map(|(mut c, n)| {
                c.accuracy /= n as f64;
                c
            })
            .collect()
    }
}

pub fn grid_search(grid: &GridConfig) -> Result<GridResult, SynthError> {
    if grid.alphas.is_empty()
        || grid.etas.is_empty()
        || grid.xis.is_empty()
        || grid.sizes.is_empty()
    {
        return Err(SynthError::InvalidConfig("empty grid".into()));
    }
    if grid.runs == 0 || grid.doc_len == 0 {
        return Err(SynthError::InvalidConfig(
            "runs and doc_len must be positive".into(),
        ));
    }
    let mut cells = Vec::new();
    for &alpha in &grid.alphas {
        for &eta in &grid.etas {
            for &xi in &grid.xis {
                for &tokens in &grid.sizes {
                    for run in 0..grid.runs {
                        cells.push((alpha, eta, xi, tokens, run));
                    }
                }
            }
        }
    }
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(index, &(alpha, eta, xi, tokens, run))| {
            let seed = derive_seed(grid.seed, index as u64);
            let cfg = SyntheticConfig {
                num_docs: tokens.div_ceil(grid.doc_len).max(1),
                doc_len: grid.doc_len,
                vocab_size: grid.vocab_size,
                num_topics: grid.num_topics,
                alpha,
                eta,
                xi,
                seed,
            };
            let truth = generate_corpus(&cfg)?;
            let accuracy = reconstruction_accuracy(
                &truth,
                cfg.hyper(),
                grid.schedule,
                derive_seed(seed, u64::MAX),
                grid.rule,
            )?;
            Ok(GridRow {
                alpha,
                eta,
                xi,
                tokens,
                run,
                accuracy,
                majority_baseline: truth.majority_baseline(),
            })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    Ok(GridResult { rows })
}

/// One-sided paired sign test of `low` against `high` alpha, pairing rows
/// that agree on eta, xi, size and run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub pairs: usize,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub mean_low: f64,
    pub mean_high: f64,
    /// P(at least `wins` successes of `wins + losses` fair coin flips).
    pub p_value: f64,
}

pub fn alpha_sign_test(result: &GridResult, low: f64, high: f64) -> SignTest {
    let mut pairs = Vec::new();
    for a in result.rows.iter().filter(|r| r.alpha == low) {
        if let Some(b) = result.rows.iter().find(|b| {
            b.alpha == high
                && b.eta == a.eta
                && b.xi == a.xi
                && b.tokens == a.tokens
                && b.run == a.run
        }) {
            pairs.push((a.accuracy, b.accuracy));
        }
    }
    let wins = pairs.iter().filter(|(a, b)| a > b).count();
    let losses = pairs.iter().filter(|(a, b)| a < b).count();
    let n = (wins + losses) as u64;
    let p_value = if wins == 0 {
        1.0
    } else {
        Binomial::new(0.5, n).expect("valid").sf(wins as u64 - 1)
    };
    let mean = |f: fn(&(f64, f64)) -> f64| {
        if pairs.is_empty() {
            f64::NAN
        } else {
            pairs.iter().map(f).sum::<f64>() / pairs.len() as f64
        }
    };
    SignTest {
        pairs: pairs.len(),
        wins,
        losses,
        ties: pairs.len() - wins - losses,
        mean_low: mean(|p| p.0),
        mean_high: mean(|p| p.1),
        p_value,
    }
}
