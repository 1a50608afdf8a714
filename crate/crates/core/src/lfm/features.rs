use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::grammaticality::{is_word, Wordlist};

use super::lm::NgramLm;

pub const FEATURE_NAMES: [&str; 8] = [
    "token_count",
    "misspelling_rate",
    "oov_rate",
    "lm_mean_logprob",
    "lm_min_logprob",
    "mean_token_logfreq",
    "max_char_repeat_len",
    "punct_ratio",
];

/// Sentence features in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 8]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn is_punctuation(token: &str) -> bool {
    token.chars().all(|c| !c.is_alphanumeric())
}

fn longest_char_run(token: &str) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for c in token.chars() {
        run = if Some(c) == prev { run + 1 } else { 1 };
        prev = Some(c);
        best = best.max(run);
    }
    best
}

/// Computes the feature vector. An empty sentence maps to all zeros.
///
/// Rates are fractions of all tokens. Misspellings are spellable tokens
/// (letters, no digits) missing from the wordlist; OOV tokens are those
/// unseen by the language model.
pub fn featurize(sentence: &Sentence, lm: &NgramLm, wordlist: &Wordlist) -> FeatureVector {
    let n = sentence.len();
    if n == 0 {
        return FeatureVector::default();
    }
    let nf = n as f64;
    let rate = |pred: &dyn Fn(&str) -> bool| sentence.iter().filter(|t| pred(t)).count() as f64 / nf;
    let logprobs = lm.token_logprobs(sentence);
    FeatureVector([
        nf,
        rate(&|t| is_word(t) && !wordlist.contains(t)),
        rate(&|t| !lm.contains(t)),
        logprobs.iter().sum::<f64>() / nf,
        logprobs.iter().copied().fold(f64::INFINITY, f64::min),
        sentence.iter().map(|t| (1.0 + lm.count(t) as f64).ln()).sum::<f64>() / nf,
        sentence.iter().map(|t| longest_char_run(t)).max().unwrap_or(0) as f64,
        rate(&is_punctuation),
    ])
}
