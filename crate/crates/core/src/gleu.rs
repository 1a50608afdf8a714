//! Sentence-level GLEU.
//!
//! N-gram precision against a reference, minus n-grams the hypothesis kept
//! from the source that the reference changed. For each order `n`:
//!
//! ```text
//! numerator_n   = max(0, Σ min(c_H, c_R) − Σ min(c_H, max(0, c_S − c_R)))
//! denominator_n = Σ c_H
//! ```
//!
//! The score is the brevity penalty times the geometric mean of the
//! per-order precisions. Zero numerators are smoothed to
//! `1 / (2·(denominator + 1))`; orders the hypothesis is too short for
//! contribute a neutral precision of 1.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};
use crate::util::{seeded_rng, stable_mean, DEFAULT_SEED};

/// How multiple references are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiRefMode {
    /// Mean over `iterations` draws, each picking one reference uniformly.
    Sampled,
    /// Mean over every reference, deterministic.
    MeanOverAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GleuConfig {
    pub max_n: usize,
    pub iterations: usize,
    pub seed: u64,
    pub mode: MultiRefMode,
}

impl Default for GleuConfig {
    fn default() -> Self {
        GleuConfig {
            max_n: 4,
            iterations: 500,
            seed: DEFAULT_SEED,
            mode: MultiRefMode::Sampled,
        }
    }
}

impl GleuConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_n == 0 {
            return Err(Error::InvalidArgument("GLEU max_n must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("GLEU iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counts needed to score one hypothesis against one reference. Summing
/// these over sentences gives the pooled corpus statistic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GleuStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
}

fn ngram_counts(tokens: &[Token], n: usize) -> HashMap<&[Token], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

impl GleuStats {
    pub fn zero(max_n: usize) -> Self {
        GleuStats {
            hyp_len: 0,
            ref_len: 0,
            numerators: vec![0; max_n],
            denominators: vec![0; max_n],
        }
    }

    pub fn compute(source: &Sentence, hypothesis: &Sentence, reference: &Sentence, max_n: usize) -> Self {
        let mut stats = GleuStats::zero(max_n);
        stats.hyp_len = hypothesis.len();
        stats.ref_len = reference.len();
        for n in 1..=max_n {
            let hyp = ngram_counts(hypothesis, n);
            let reff = ngram_counts(reference, n);
            let src = ngram_counts(source, n);
            let mut matched = 0u64;
            let mut penalty = 0u64;
            for (gram, &ch) in &hyp {
                let cr = reff.get(gram).copied().unwrap_or(0);
                let cs = src.get(gram).copied().unwrap_or(0);
                matched += ch.min(cr);
                penalty += ch.min(cs.saturating_sub(cr));
            }
            stats.numerators[n - 1] = matched.saturating_sub(penalty);
            stats.denominators[n - 1] = hyp.values().sum();
        }
        stats
    }

    pub fn add(&mut self, other: &GleuStats) {
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        for (a, b) in self.numerators.iter_mut().zip(&other.numerators) {
            *a += b;
        }
        for (a, b) in self.denominators.iter_mut().zip(&other.denominators) {
            *a += b;
        }
    }

    pub fn precision(&self, n: usize) -> f64 {
        let num = self.numerators[n - 1];
        let den = self.denominators[n - 1];
        if den == 0 {
            1.0
        } else if num == 0 {
            1.0 / (2.0 * (den as f64 + 1.0))
        } else {
            num as f64 / den as f64
        }
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        }
    }

    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let max_n = self.numerators.len();
        let log_sum: f64 = (1..=max_n).map(|n| self.precision(n).ln()).sum();
        self.brevity_penalty() * (log_sum / max_n as f64).exp()
    }
}

/// GLEU of `hypothesis` against a single reference.
pub fn gleu_sentence(source: &Sentence, hypothesis: &Sentence, reference: &Sentence, cfg: &GleuConfig) -> f64 {
    GleuStats::compute(source, hypothesis, reference, cfg.max_n).score()
}

/// Which reference each draw uses for sentence `sentence_index`.
///
/// Sampled mode draws from a stream seeded by `(cfg.seed, sentence_index)`,
/// so the result does not depend on the order sentences are processed in.
pub fn reference_draws(n_refs: usize, cfg: &GleuConfig, sentence_index: usize) -> Vec<usize> {
    match cfg.mode {
        MultiRefMode::MeanOverAll => (0..n_refs).collect(),
        MultiRefMode::Sampled => {
            let mut rng = seeded_rng(cfg.seed, &[sentence_index as u64]);
            (0..cfg.iterations).map(|_| rng.gen_range(0..n_refs)).collect()
        }
    }
}

/// A sentence's statistics against each of its references, plus the
/// sequence of reference draws that determines how they are averaged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceGleu {
    pub per_ref: Vec<GleuStats>,
    pub draws: Vec<u32>,
}

impl SentenceGleu {
    pub fn compute(
        source: &Sentence,
        hypothesis: &Sentence,
        references: &[Sentence],
        cfg: &GleuConfig,
        sentence_index: usize,
    ) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "GLEU needs at least one reference (sentence {sentence_index})"
            )));
        }
        let per_ref = references
            .iter()
            .map(|r| GleuStats::compute(source, hypothesis, r, cfg.max_n))
            .collect();
        let draws = reference_draws(references.len(), cfg, sentence_index)
            .into_iter()
            .map(|j| j as u32)
            .collect();
        Ok(SentenceGleu { per_ref, draws })
    }

    /// Statistics used by draw `j`; draws cycle when `j` exceeds their count.
    pub fn draw(&self, j: usize) -> &GleuStats {
        &self.per_ref[self.draws[j % self.draws.len()] as usize]
    }

    /// Mean score over the draws.
    pub fn score(&self) -> f64 {
        let per_ref: Vec<f64> = self.per_ref.iter().map(GleuStats::score).collect();
        let scores: Vec<f64> = self.draws.iter().map(|&j| per_ref[j as usize]).collect();
        stable_mean(&scores)
    }
}

/// GLEU against several references, combined per `cfg.mode`.
pub fn gleu_multi_ref(
    source: &Sentence,
    hypothesis: &Sentence,
    references: &[Sentence],
    cfg: &GleuConfig,
    sentence_index: usize,
) -> Result<f64> {
    Ok(SentenceGleu::compute(source, hypothesis, references, cfg, sentence_index)?.score())
}

/// Pooled corpus GLEU: draw `j` sums every sentence's draw `j` (cycling for
/// sentences with fewer draws) and the result is the mean over draws.
pub fn gleu_pooled(sentences: &[SentenceGleu], max_n: usize) -> f64 {
    let n_draws = sentences.iter().map(|s| s.draws.len()).max().unwrap_or(0);
    if n_draws == 0 {
        return 0.0;
    }
    let scores: Vec<f64> = (0..n_draws)
        .map(|j| {
            let mut pooled = GleuStats::zero(max_n);
            for sentence in sentences {
                pooled.add(sentence.draw(j));
            }
            pooled.score()
        })
        .collect();
    stable_mean(&scores)
}
