//! Reference-less error-count scoring.
//!
//! A sentence's score is `1 − #errors / #tokens`, clamped at 0, where errors
//! come from a [`DetectorSuite`]: any mix of the built-in rule detectors and
//! external checker processes.

mod detectors;
mod external;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub(crate) use detectors::is_word;
pub use detectors::{
    ArticleDetector, CapitalizationDetector, DuplicateDetector, PunctuationSpacingDetector, SpellDetector,
    TerminalPunctuationDetector, Wordlist, BUILTIN_DETECTORS,
};
pub use external::{CheckerCommand, CheckerSession, ExternalChecker, DEFAULT_CHECKER_TIMEOUT};

/// A detected error region. `start == end` marks a point error.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErrorSpan {
    pub start: usize,
    pub end: usize,
    pub category: String,
    pub detector: String,
}

impl ErrorSpan {
    pub fn new(start: usize, end: usize, category: impl Into<String>, detector: impl Into<String>) -> Self {
        ErrorSpan {
            start,
            end,
            category: category.into(),
            detector: detector.into(),
        }
    }
}

impl fmt::Display for ErrorSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{} {} ({})", self.start, self.end, self.category, self.detector)
    }
}

/// A grammatical error detector.
pub trait Detector: Send + Sync {
    fn id(&self) -> &str;

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>>;

    /// Detects errors in many sentences. External checkers override this to
    /// pipeline their requests.
    fn detect_batch(&self, sentences: &[&Sentence]) -> Result<Vec<Vec<ErrorSpan>>> {
        sentences.iter().map(|s| self.detect(s)).collect()
    }
}

/// How spans reported by different detectors are merged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupPolicy {
    /// Spans with equal `(start, end, category)` count once; the detector
    /// listed first in the suite is credited.
    #[default]
    SpanAndCategory,
    /// Every reported span counts.
    KeepAll,
}

/// An ordered set of detectors with unique ids.
///
/// Built-in detectors are pure. An external checker holds a pool of
/// sessions and hands each caller exclusive use of one, so a suite can be
/// shared across worker threads.
#[derive(Default)]
pub struct DetectorSuite {
    detectors: Vec<Box<dyn Detector>>,
    pub dedup: DedupPolicy,
}

impl DetectorSuite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, detector: impl Detector + 'static) -> Result<Self> {
        self.add(Box::new(detector))?;
        Ok(self)
    }

    pub fn add(&mut self, detector: Box<dyn Detector>) -> Result<()> {
        if self.detectors.iter().any(|d| d.id() == detector.id()) {
            return Err(Error::InvalidArgument(format!(
                "detector id {:?} is already in the suite",
                detector.id()
            )));
        }
        self.detectors.push(detector);
        Ok(())
    }

    /// Removes a detector by id, returning whether it was present.
    pub fn remove(&mut self, id: &str) -> bool {
        let before = self.detectors.len();
        self.detectors.retain(|d| d.id() != id);
        self.detectors.len() != before
    }

    pub fn ids(&self) -> Vec<&str> {
        self.detectors.iter().map(|d| d.id()).collect()
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    fn merge(&self, per_detector: Vec<Vec<ErrorSpan>>) -> Vec<ErrorSpan> {
        let mut spans = Vec::new();
        let mut seen = HashSet::new();
        for found in per_detector {
            for span in found {
                let keep = match self.dedup {
                    DedupPolicy::SpanAndCategory => seen.insert((span.start, span.end, span.category.clone())),
                    DedupPolicy::KeepAll => true,
                };
                if keep {
                    spans.push(span);
                }
            }
        }
        spans.sort_by(|a, b| (a.start, a.end, &a.category).cmp(&(b.start, b.end, &b.category)));
        spans
    }

    /// Union of all detectors' spans, deduplicated and ordered by
    /// `(start, end, category)`.
    pub fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        let per_detector = self
            .detectors
            .iter()
            .map(|d| d.detect(sentence))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.merge(per_detector))
    }

    /// [`DetectorSuite::detect`] over many sentences.
    pub fn detect_all(&self, sentences: &[&Sentence]) -> Result<Vec<Vec<ErrorSpan>>> {
        let mut per_detector: Vec<std::vec::IntoIter<Vec<ErrorSpan>>> = self
            .detectors
            .iter()
            .map(|d| d.detect_batch(sentences).map(Vec::into_iter))
            .collect::<Result<_>>()?;
        Ok((0..sentences.len())
            .map(|_| {
                let found = per_detector
                    .iter_mut()
                    .map(|it| it.next().unwrap_or_default())
                    .collect();
                self.merge(found)
            })
            .collect())
    }
}

/// Error and token counts; sums over sentences give the pooled statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCountStats {
    pub errors: usize,
    pub tokens: usize,
}

impl ErrorCountStats {
    pub fn add(&mut self, other: ErrorCountStats) {
        self.errors += other.errors;
        self.tokens += other.tokens;
    }

    /// `max(0, 1 − errors/tokens)`; no tokens scores 1.
    pub fn score(&self) -> f64 {
        if self.tokens == 0 {
            return 1.0;
        }
        (1.0 - self.errors as f64 / self.tokens as f64).max(0.0)
    }
}

pub fn error_count_stats(sentence: &Sentence, suite: &DetectorSuite) -> Result<ErrorCountStats> {
    Ok(ErrorCountStats {
        errors: suite.detect(sentence)?.len(),
        tokens: sentence.len(),
    })
}

pub fn error_count_score(sentence: &Sentence, suite: &DetectorSuite) -> Result<f64> {
    Ok(error_count_stats(sentence, suite)?.score())
}
