use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::{HyperParams, ModelError};
use crate::corpus::Corpus;

/// Observed data of a corpus in flat token order: word ids and alteration
/// flags, with per-document offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    doc_start: Vec<usize>,
    words: Vec<u32>,
    alts: Vec<u8>,
    vocab_size: usize,
}

impl Observations {
    pub fn from_corpus(corpus: &Corpus) -> Result<Self, ModelError> {
        let vocab_size = corpus.vocab_size();
        let mut doc_start = Vec::with_capacity(corpus.num_docs() + 1);
        let mut words = Vec::with_capacity(corpus.total_tokens());
        let mut alts = Vec::with_capacity(corpus.total_tokens());
        doc_start.push(0);
        for (m, doc) in corpus.documents.iter().enumerate() {
            for (n, tok) in doc.tokens.iter().enumerate() {
                match tok.vocab_id {
                    Some(v) if (v as usize) < vocab_size => words.push(v),
                    _ => return Err(ModelError::IndexOutOfRange { doc: m, token: n }),
                }
                alts.push(tok.alt_flag.min(1));
            }
            doc_start.push(words.len());
        }
        Ok(Observations {
            doc_start,
            words,
            alts,
            vocab_size,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.doc_start.len() - 1
    }

    pub fn num_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn doc_len(&self, m: usize) -> usize {
        self.doc_start[m + 1] - self.doc_start[m]
    }

    pub fn doc_range(&self, m: usize) -> std::ops::Range<usize> {
        self.doc_start[m]..self.doc_start[m + 1]
    }

    pub fn word(&self, i: usize) -> usize {
        self.words[i] as usize
    }

    pub fn alt(&self, i: usize) -> usize {
        self.alts[i] as usize
    }
}

/// Sufficient statistics of (z, w, c): the document, word and alteration
/// marginals of the four-way topic/document/mode/word counter, plus topic
/// totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    k: usize,
    /// M x K, document-major
    doc_topic: Vec<u32>,
    /// V x K, word-major
    word_topic: Vec<u32>,
    /// K x 2
    topic_alt: Vec<u32>,
    topic: Vec<u32>,
}

impl CountTables {
    fn zeros(k: usize, m: usize, v: usize) -> Self {
        CountTables {
            k,
            doc_topic: vec![0; m * k],
            word_topic: vec![0; v * k],
            topic_alt: vec![0; k * 2],
            topic: vec![0; k],
        }
    }

    pub fn from_assignments(obs: &Observations, z: &[u32], k: usize) -> Self {
        let mut counts = Self::zeros(k, obs.num_docs(), obs.vocab_size());
        for m in 0..obs.num_docs() {
            for i in obs.doc_range(m) {
                counts.add(m, obs.word(i), obs.alt(i), z[i] as usize);
            }
        }
        counts
    }

    #[inline]
    fn add(&mut self, m: usize, w: usize, a: usize, topic: usize) {
        self.doc_topic[m * self.k + topic] += 1;
        self.word_topic[w * self.k + topic] += 1;
        self.topic_alt[topic * 2 + a] += 1;
        self.topic[topic] += 1;
    }

    #[inline]
    fn remove(&mut self, m: usize, w: usize, a: usize, topic: usize) {
        self.doc_topic[m * self.k + topic] -= 1;
        self.word_topic[w * self.k + topic] -= 1;
        self.topic_alt[topic * 2 + a] -= 1;
        self.topic[topic] -= 1;
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    /// Tokens of topic `k` in document `m`.
    pub fn n_km(&self, k: usize, m: usize) -> u32 {
        self.doc_topic[m * self.k + k]
    }

    /// Tokens of topic `k` with word `v`.
    pub fn n_kv(&self, k: usize, v: usize) -> u32 {
        self.word_topic[v * self.k + k]
    }

    /// Tokens of topic `k` with alteration flag `a`.
    pub fn n_ka(&self, k: usize, a: usize) -> u32 {
        self.topic_alt[k * 2 + a]
    }

    pub fn n_k(&self, k: usize) -> u32 {
        self.topic[k]
    }

    fn num_docs(&self) -> usize {
        self.doc_topic.len() / self.k
    }

    fn vocab_size(&self) -> usize {
        self.word_topic.len() / self.k
    }

    /// Marginal consistency: every topic total equals its document, word
    /// and alteration sums, and totals sum to `w`.
    pub fn is_consistent(&self, w: usize) -> bool {
        let k = self.k;
        (0..k).all(|t| {
            let by_doc: u64 = (0..self.num_docs()).map(|m| self.n_km(t, m) as u64).sum();
            let by_word: u64 = (0..self.vocab_size()).map(|v| self.n_kv(t, v) as u64).sum();
            let by_alt = self.n_ka(t, 0) as u64 + self.n_ka(t, 1) as u64;
            let n = self.n_k(t) as u64;
            by_doc == n && by_word == n && by_alt == n
        }) && self.topic.iter().map(|&n| n as u64).sum::<u64>() == w as u64
    }

    #[cfg(test)]
    pub(crate) fn corrupt(&mut self) {
        self.topic_alt[0] += 1;
    }
}

/// Whether the alteration flags inform topic sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerMode {
    #[default]
    AlterLda,
    /// Plain LDA conditional; flags only enter the count tables, so the
    /// tendency estimate is read off topics inferred from words alone.
    WordsOnly,
}

/// Per-topic collapsed conditional for one token with word `w` and flag `a`
/// in document `m`. `exclude` names the topic currently holding the token
/// when its counts have not been removed yet.
#[inline]
#[allow(clippy::too_many_arguments)]
fn fill_scores(
    counts: &CountTables,
    hyper: &HyperParams,
    eta_sum: f64,
    xi_sum: f64,
    m: usize,
    w: usize,
    a: usize,
    exclude: Option<usize>,
    mode: SamplerMode,
    out: &mut [f64],
) {
    let k = counts.k;
    let doc_row = &counts.doc_topic[m * k..(m + 1) * k];
    let word_row = &counts.word_topic[w * k..(w + 1) * k];
    let eta_w = hyper.eta[w];
    let xi_a = hyper.xi[a];
    for t in 0..k {
        let own = f64::from(u8::from(exclude == Some(t)));
        let n_doc = doc_row[t] as f64 - own;
        let n_word = word_row[t] as f64 - own;
        let n_alt = counts.topic_alt[t * 2 + a] as f64 - own;
        let n_topic = counts.topic[t] as f64 - own;
        let lda = (n_doc + hyper.alpha[t]) * (n_word + eta_w) / (n_topic + eta_sum);
        out[t] = match mode {
            SamplerMode::AlterLda => lda * (n_alt + xi_a) / (n_topic + xi_sum),
            SamplerMode::WordsOnly => lda,
        };
    }
}

/// Draws an index proportional to `weights`.
#[inline]
pub(crate) fn sample_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Collapsed Gibbs sampler state for alterLDA.
#[derive(Debug, Clone)]
pub struct ModelState {
    hyper: HyperParams,
    obs: Observations,
    z: Vec<u32>,
    counts: CountTables,
    seed: u64,
    sweep_index: u64,
    rng: ChaCha8Rng,
    eta_sum: f64,
    xi_sum: f64,
    mode: SamplerMode,
    scratch: Vec<f64>,
}

impl ModelState {
    /// Uniform random topic per token from the seeded generator.
    pub fn init(corpus: &Corpus, hyper: HyperParams, seed: u64) -> Result<Self, ModelError> {
        let obs = Observations::from_corpus(corpus)?;
        if obs.num_tokens() == 0 {
            return Err(ModelError::EmptyCorpus);
        }
        hyper.validate_for(obs.vocab_size())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = hyper.k;
        let z: Vec<u32> = (0..obs.num_tokens())
            .map(|_| rng.random_range(0..k) as u32)
            .collect();
        Ok(Self::assemble(hyper, obs, z, seed, 0, rng))
    }

    /// Rebuilds a state from saved assignments and generator position.
    pub fn restore(
        corpus: &Corpus,
        hyper: HyperParams,
        z: Vec<u32>,
        seed: u64,
        sweep_index: u64,
        rng_word_pos: u128,
    ) -> Result<Self, ModelError> {
        let obs = Observations::from_corpus(corpus)?;
        hyper.validate_for(obs.vocab_size())?;
        if z.len() != obs.num_tokens() || z.iter().any(|&t| t as usize >= hyper.k) {
            return Err(ModelError::Checkpoint(
                "topic assignments do not match the corpus".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(rng_word_pos);
        Ok(Self::assemble(hyper, obs, z, seed, sweep_index, rng))
    }

    fn assemble(
        hyper: HyperParams,
        obs: Observations,
        z: Vec<u32>,
        seed: u64,
        sweep_index: u64,
        rng: ChaCha8Rng,
    ) -> Self {
        let counts = CountTables::from_assignments(&obs, &z, hyper.k);
        ModelState {
            eta_sum: hyper.eta_sum(),
            xi_sum: hyper.xi_sum(),
            mode: SamplerMode::AlterLda,
            scratch: vec![0.0; hyper.k],
            hyper,
            obs,
            z,
            counts,
            seed,
            sweep_index,
            rng,
        }
    }

    pub fn with_mode(mut self, mode: SamplerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn observations(&self) -> &Observations {
        &self.obs
    }

    pub fn assignments(&self) -> &[u32] {
        &self.z
    }

    pub fn doc_assignments(&self, m: usize) -> &[u32] {
        &self.z[self.obs.doc_range(m)]
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sweep_index(&self) -> u64 {
        self.sweep_index
    }

    pub fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Unnormalised conditional over topics for token `n` of document `m`,
    /// with that token's own contribution removed from the counts.
    pub fn full_conditional(&self, m: usize, n: usize) -> Result<Vec<f64>, ModelError> {
        if m >= self.obs.num_docs() || n >= self.obs.doc_len(m) {
            return Err(ModelError::IndexOutOfRange { doc: m, token: n });
        }
        let i = self.obs.doc_range(m).start + n;
        let mut out = vec![0.0; self.hyper.k];
        fill_scores(
            &self.counts,
            &self.hyper,
            self.eta_sum,
            self.xi_sum,
            m,
            self.obs.word(i),
            self.obs.alt(i),
            Some(self.z[i] as usize),
            self.mode,
            &mut out,
        );
        Ok(out)
    }

    /// Resamples every token once, in document order.
    pub fn sweep(&mut self) {
        for m in 0..self.obs.num_docs() {
            for i in self.obs.doc_range(m) {
                self.resample(m, i);
            }
        }
        self.sweep_index += 1;
        debug_assert!(self.counts.is_consistent(self.obs.num_tokens()));
    }

    /// One sweep visiting flat token indices in the given order.
    pub fn sweep_in_order(&mut self, order: &[usize]) {
        for &i in order {
            let m = self.obs.doc_start.partition_point(|&s| s <= i) - 1;
            self.resample(m, i);
        }
        self.sweep_index += 1;
    }

    #[inline]
    fn resample(&mut self, m: usize, i: usize) {
        let w = self.obs.word(i);
        let a = self.obs.alt(i);
        let old = self.z[i] as usize;
        self.counts.remove(m, w, a, old);
        fill_scores(
            &self.counts,
            &self.hyper,
            self.eta_sum,
            self.xi_sum,
            m,
            w,
            a,
            None,
            self.mode,
            &mut self.scratch,
        );
        let new = sample_index(&mut self.rng, &self.scratch);
        self.z[i] = new as u32;
        self.counts.add(m, w, a, new);
    }

    /// Rebuilds the count tables from (z, w, c) and compares them with the
    /// incrementally maintained ones.
    pub fn audit_counts(&self) -> bool {
        let rebuilt = CountTables::from_assignments(&self.obs, &self.z, self.hyper.k);
        rebuilt == self.counts && self.counts.is_consistent(self.obs.num_tokens())
    }

    /// `log p(w, c, z | alpha, eta, xi)` with theta, beta and gamma
    /// integrated out.
    pub fn log_joint(&self) -> f64 {
        let h = &self.hyper;
        let c = &self.counts;
        let k = h.k;
        let alpha_sum = h.alpha_sum();

        let mut lp = 0.0;
        let ln_gamma_alpha: Vec<f64> = h.alpha.iter().map(|&a| ln_gamma(a)).collect();
        for m in 0..self.obs.num_docs() {
            lp += ln_gamma(alpha_sum) - ln_gamma(self.obs.doc_len(m) as f64 + alpha_sum);
            for (t, (&a, &lg)) in h.alpha.iter().zip(&ln_gamma_alpha).enumerate() {
                let n = c.n_km(t, m);
                if n > 0 {
                    lp += ln_gamma(n as f64 + a) - lg;
                }
            }
        }
        for t in 0..k {
            lp += ln_gamma(self.eta_sum) - ln_gamma(c.n_k(t) as f64 + self.eta_sum);
            for v in 0..self.obs.vocab_size() {
                let n = c.n_kv(t, v);
                if n > 0 {
                    lp += ln_gamma(n as f64 + h.eta[v]) - ln_gamma(h.eta[v]);
                }
            }
            lp += ln_gamma(self.xi_sum) - ln_gamma(c.n_k(t) as f64 + self.xi_sum);
            for a in 0..2 {
                lp += ln_gamma(c.n_ka(t, a) as f64 + h.xi[a]) - ln_gamma(h.xi[a]);
            }
        }
        lp
    }

    #[cfg(test)]
    pub(crate) fn counts_mut(&mut self) -> &mut CountTables {
        &mut self.counts
    }

    #[cfg(test)]
    pub(crate) fn set_assignments(&mut self, z: Vec<u32>) {
        self.counts = CountTables::from_assignments(&self.obs, &z, self.hyper.k);
        self.z = z;
    }
}
