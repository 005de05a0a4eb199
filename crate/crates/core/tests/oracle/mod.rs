//! Brute-force reference for the collapsed alterLDA joint: Dirichlet-
//! multinomial marginals written as rising-factorial products, and exact
//! posteriors over every topic assignment of a tiny corpus.

#![allow(dead_code)]

/// One token: (document, word, alteration flag).
pub type Obs = (usize, usize, usize);

#[derive(Debug, Clone)]
pub struct Instance {
    pub k: usize,
    pub v: usize,
    pub m: usize,
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: [f64; 2],
    pub tokens: Vec<Obs>,
}

/// x (x + 1) ... (x + n - 1)
pub fn rising(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// ln of the Dirichlet-multinomial probability of `counts`, by
/// accumulating rising factorials in log space term by term.
fn ln_dm(counts: &[usize], prior: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    let prior_sum: f64 = prior.iter().sum();
    let mut lp = 0.0;
    for (&n, &a) in counts.iter().zip(prior) {
        for i in 0..n {
            lp += (a + i as f64).ln();
        }
    }
    for i in 0..total {
        lp -= (prior_sum + i as f64).ln();
    }
    lp
}

impl Instance {
    /// ln p(w, c, z) with theta, beta and gamma integrated out.
    pub fn ln_joint(&self, z: &[usize]) -> f64 {
        let mut lp = 0.0;
        for d in 0..self.m {
            let mut counts = vec![0; self.k];
            for (t, &(doc, _, _)) in self.tokens.iter().enumerate() {
                if doc == d {
                    counts[z[t]] += 1;
                }
            }
            lp += ln_dm(&counts, &self.alpha);
        }
        for topic in 0..self.k {
            let mut words = vec![0; self.v];
            let mut flags = vec![0; 2];
            for (t, &(_, w, c)) in self.tokens.iter().enumerate() {
                if z[t] == topic {
                    words[w] += 1;
                    flags[c] += 1;
                }
            }
            lp += ln_dm(&words, &self.eta);
            lp += ln_dm(&flags, &self.xi);
        }
        lp
    }

    /// Mixed-radix decoding of configuration `index`, token 0 least
    /// significant.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        (0..self.tokens.len())
            .map(|_| {
                let t = index % self.k;
                index /= self.k;
                t
            })
            .collect()
    }

    pub fn encode(&self, z: &[usize]) -> usize {
        z.iter().rev().fold(0, |acc, &t| acc * self.k + t)
    }

    /// Exact posterior over all K^W configurations.
    pub fn posterior(&self) -> Vec<f64> {
        let n = self.k.pow(self.tokens.len() as u32);
        let logs: Vec<f64> = (0..n).map(|i| self.ln_joint(&self.decode(i))).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
