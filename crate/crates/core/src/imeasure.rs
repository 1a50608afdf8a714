//! Simplified I-measure.
//!
//! Source↔reference and source↔hypothesis alignments are joined on source
//! positions into (source, hypothesis, reference) triples, each classified
//! as tp/tn/fp/fn/fpn. Weighted accuracy of the hypothesis is then
//! normalized against the accuracy of leaving the source unchanged, giving a
//! score in [−1, 1].

use serde::{Deserialize, Serialize};

use crate::align::{align, AlignOp};
use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IMeasureConfig {
    /// Reward weight on corrected tokens.
    pub weight: f64,
}

impl Default for IMeasureConfig {
    fn default() -> Self {
        IMeasureConfig { weight: 2.0 }
    }
}

impl IMeasureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "I-measure weight must be positive, got {}",
                self.weight
            )));
        }
        Ok(())
    }
}

/// Token classification counts. An fpn triple counts once in `fpn` and
/// also once in each of `fp` and `fn_`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fpn: usize,
}

impl ClassCounts {
    pub fn add(&mut self, other: ClassCounts) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.fpn += other.fpn;
    }

    /// Number of aligned triples that produced these counts.
    pub fn triples(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_ - self.fpn
    }

    fn classify(&mut self, s: Option<&Token>, h: Option<&Token>, r: Option<&Token>) {
        if s == r {
            if h == s {
                self.tn += 1;
            } else {
                self.fp += 1;
            }
        } else if h == r {
            self.tp += 1;
        } else if h == s {
            self.fn_ += 1;
        } else {
            self.fpn += 1;
            self.fp += 1;
            self.fn_ += 1;
        }
    }

    /// Weighted accuracy. With no triples at all the accuracy is 1.
    pub fn weighted_accuracy(&self, weight: f64) -> f64 {
        let numerator = weight * self.tp as f64 + self.tn as f64;
        let denominator = weight * (self.tp + self.fp) as f64 + self.tn as f64 + self.fn_ as f64
            - (weight + 1.0) * self.fpn as f64 / 2.0;
        if denominator == 0.0 {
            1.0
        } else {
            numerator / denominator
        }
    }
}

/// Target-side tokens aligned to each source position, plus insertions
/// before each source position (index `n` holds trailing insertions).
struct Projection<'a> {
    aligned: Vec<Option<&'a Token>>,
    inserted: Vec<Vec<&'a Token>>,
}

fn project<'a>(source: &[Token], target: &'a [Token]) -> Projection<'a> {
    let n = source.len();
    let mut aligned = vec![None; n];
    let mut inserted = vec![Vec::new(); n + 1];
    let mut next_source = 0;
    for op in align(source, target) {
        match op {
            AlignOp::Match(i, j) | AlignOp::Substitute(i, j) => {
                aligned[i] = Some(&target[j]);
                next_source = i + 1;
            }
            AlignOp::Delete(i) => next_source = i + 1,
            AlignOp::Insert(j) => inserted[next_source].push(&target[j]),
        }
    }
    Projection { aligned, inserted }
}

/// Classifies every aligned (source, hypothesis, reference) triple.
pub fn classify_tokens(source: &Sentence, hypothesis: &Sentence, reference: &Sentence) -> ClassCounts {
    let hyp = project(source, hypothesis);
    let reff = project(source, reference);
    let mut counts = ClassCounts::default();
    for k in 0..=source.len() {
        let (ins_h, ins_r) = (&hyp.inserted[k], &reff.inserted[k]);
        for op in align(ins_h, ins_r) {
            match op {
                AlignOp::Match(a, b) | AlignOp::Substitute(a, b) => {
                    counts.classify(None, Some(ins_h[a]), Some(ins_r[b]))
                }
                AlignOp::Delete(a) => counts.classify(None, Some(ins_h[a]), None),
                AlignOp::Insert(b) => counts.classify(None, None, Some(ins_r[b])),
            }
        }
        if k < source.len() {
            counts.classify(Some(&source[k]), hyp.aligned[k], reff.aligned[k]);
        }
    }
    counts
}

/// Baseline-normalized score from system and unchanged-source counts.
pub fn i_from_counts(system: &ClassCounts, baseline: &ClassCounts, weight: f64) -> f64 {
    let sys = system.weighted_accuracy(weight);
    let base = baseline.weighted_accuracy(weight);
    if sys >= base {
        if base == 1.0 {
            0.0
        } else {
            (sys - base) / (1.0 - base)
        }
    } else {
        sys / base - 1.0
    }
}

/// Counts against each reference for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceIMeasure {
    /// `(system, baseline)` counts per reference.
    pub per_ref: Vec<(ClassCounts, ClassCounts)>,
}

impl SentenceIMeasure {
    pub fn compute(source: &Sentence, hypothesis: &Sentence, references: &[Sentence]) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidArgument("I-measure needs at least one reference".into()));
        }
        Ok(SentenceIMeasure {
            per_ref: references
                .iter()
                .map(|r| {
                    (
                        classify_tokens(source, hypothesis, r),
                        classify_tokens(source, source, r),
                    )
                })
                .collect(),
        })
    }

    /// Index and score of the reference giving the highest I (first on ties).
    pub fn best(&self, weight: f64) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, (sys, base)) in self.per_ref.iter().enumerate() {
            let i = i_from_counts(sys, base, weight);
            if i > best.1 {
                best = (k, i);
            }
        }
        best
    }
}

/// Sentence I-measure: the maximum over references.
pub fn i_measure_sentence(
    source: &Sentence,
    hypothesis: &Sentence,
    references: &[Sentence],
    cfg: &IMeasureConfig,
) -> Result<f64> {
    Ok(SentenceIMeasure::compute(source, hypothesis, references)?
        .best(cfg.weight)
        .1)
}

/// Pooled corpus I-measure: each sentence contributes the counts of its best
/// reference.
pub fn i_measure_pooled(sentences: &[SentenceIMeasure], weight: f64) -> f64 {
    let mut sys = ClassCounts::default();
    let mut base = ClassCounts::default();
    for sentence in sentences {
        let (k, _) = sentence.best(weight);
        sys.add(sentence.per_ref[k].0);
        base.add(sentence.per_ref[k].1);
    }
    i_from_counts(&sys, &base, weight)
}
