//! Interpolated n-gram language model.
//!
//! `P(t | ctx) = Σ_k w_k · P_k(t | ctx_k)`, where `P_1` is add-one smoothed
//! over the vocabulary plus UNK and `P_k` for `k ≥ 2` is the maximum
//! likelihood estimate given the last `k − 1` tokens. When that context was
//! never seen, `P_k` falls back to `P_{k−1}`. Sentences are padded on the
//! left with `order − 1` boundary symbols.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

type Id = u32;

const BOS: Id = 0;
const UNK: Id = 1;
const FIRST_WORD: Id = 2;

#[derive(Debug, Clone)]
pub struct NgramLm {
    order: usize,
    weights: Vec<f64>,
    vocab: IndexMap<String, Id>,
    unigram: Vec<u64>,
    total_tokens: u64,
    // counts[k] holds (k+1)-grams for k ≥ 1; index 0 is unused.
    ngrams: Vec<HashMap<Vec<Id>, u64>>,
    contexts: Vec<HashMap<Vec<Id>, u64>>,
}

impl NgramLm {
    /// Trains with uniform interpolation weights.
    pub fn train<'a, I>(sentences: I, order: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let weights = vec![1.0 / order.max(1) as f64; order.max(1)];
        Self::train_weighted(sentences, order, weights)
    }

    pub fn train_weighted<'a, I>(sentences: I, order: usize, weights: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        if order == 0 {
            return Err(Error::InvalidArgument("language model order must be at least 1".into()));
        }
        if weights.len() != order || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "need {order} positive interpolation weights, got {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "interpolation weights must sum to 1, got {sum}"
            )));
        }

        let mut lm = NgramLm {
            order,
            weights,
            vocab: IndexMap::new(),
            unigram: vec![0, 0],
            total_tokens: 0,
            ngrams: vec![HashMap::new(); order],
            contexts: vec![HashMap::new(); order],
        };
        let mut n_sentences = 0;
        for sentence in sentences {
            n_sentences += 1;
            let mut ids = vec![BOS; order - 1];
            for token in sentence.iter() {
                let next = FIRST_WORD + lm.vocab.len() as Id;
                let id = *lm.vocab.entry(token.as_str().to_owned()).or_insert(next);
                if id as usize == lm.unigram.len() {
                    lm.unigram.push(0);
                }
                lm.unigram[id as usize] += 1;
                lm.total_tokens += 1;
                ids.push(id);
            }
            for pos in (order - 1)..ids.len() {
                for k in 1..order {
                    let context = &ids[pos - k..pos];
                    *lm.ngrams[k].entry(ids[pos - k..=pos].to_vec()).or_insert(0) += 1;
                    *lm.contexts[k].entry(context.to_vec()).or_insert(0) += 1;
                }
            }
        }
        if n_sentences == 0 {
            return Err(Error::InvalidArgument(
                "cannot train a language model on an empty corpus".into(),
            ));
        }
        Ok(lm)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of distinct training tokens, excluding UNK.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.contains_key(token)
    }

    /// Training count of a token (0 if unseen).
    pub fn count(&self, token: &str) -> u64 {
        self.vocab.get(token).map_or(0, |&id| self.unigram[id as usize])
    }

    fn id(&self, token: &str) -> Id {
        self.vocab.get(token).copied().unwrap_or(UNK)
    }

    fn p_unigram(&self, id: Id) -> f64 {
        let count = if id == UNK { 0 } else { self.unigram[id as usize] };
        (count + 1) as f64 / (self.total_tokens + self.vocab.len() as u64 + 1) as f64
    }

    /// `history` holds the `order − 1` ids preceding `id`.
    fn prob_ids(&self, history: &[Id], id: Id) -> f64 {
        let mut per_order = Vec::with_capacity(self.order);
        per_order.push(self.p_unigram(id));
        for k in 1..self.order {
            let context = &history[history.len() - k..];
            let estimate = match self.contexts[k].get(context) {
                Some(&total) => {
                    let mut gram = context.to_vec();
                    gram.push(id);
                    self.ngrams[k].get(&gram).copied().unwrap_or(0) as f64 / total as f64
                }
                None => per_order[k - 1],
            };
            per_order.push(estimate);
        }
        self.weights.iter().zip(&per_order).map(|(w, p)| w * p).sum()
    }

    /// `P(token | context)`, where `context` lists preceding tokens, most
    /// recent last. Missing history is filled with boundary symbols.
    pub fn prob(&self, context: &[&str], token: &str) -> f64 {
        let mut history = vec![BOS; self.order - 1];
        history.extend(context.iter().map(|t| self.id(t)));
        self.prob_ids(&history[history.len() - (self.order - 1)..], self.id(token))
    }

    /// Natural-log probability of every token of `sentence`.
    pub fn token_logprobs(&self, sentence: &Sentence) -> Vec<f64> {
        let mut ids = vec![BOS; self.order - 1];
        ids.extend(sentence.iter().map(|t| self.id(t)));
        ((self.order - 1)..ids.len())
            .map(|pos| self.prob_ids(&ids[pos + 1 - self.order..pos], ids[pos]).ln())
            .collect()
    }

    /// All vocabulary tokens, for enumerating the distribution.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocab.keys().map(String::as_str)
    }
}
