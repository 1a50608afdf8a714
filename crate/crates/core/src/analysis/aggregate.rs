//! Sentence-mode and corpus-mode aggregation of per-sentence statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gleu::{gleu_pooled, SentenceGleu};
use crate::grammaticality::ErrorCountStats;
use crate::imeasure::{i_measure_pooled, SentenceIMeasure};
use crate::maxmatch::{best_annotator, m2_pooled, M2Counts};
use crate::util::mean;

use super::AggregationMode;

/// One system's per-sentence sufficient statistics for a single metric,
/// together with the parameters needed to turn them into scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "kebab-case")]
pub enum SentenceRecords {
    Gleu {
        max_n: usize,
        sentences: Vec<SentenceGleu>,
    },
    M2 {
        beta: f64,
        sentences: Vec<Vec<(u32, M2Counts)>>,
    },
    IMeasure {
        weight: f64,
        sentences: Vec<SentenceIMeasure>,
    },
    ErrorCount {
        sentences: Vec<ErrorCountStats>,
    },
    Lfm {
        sentences: Vec<f64>,
    },
}

impl SentenceRecords {
    pub fn len(&self) -> usize {
        match self {
            SentenceRecords::Gleu { sentences, .. } => sentences.len(),
            SentenceRecords::M2 { sentences, .. } => sentences.len(),
            SentenceRecords::IMeasure { sentences, .. } => sentences.len(),
            SentenceRecords::ErrorCount { sentences } => sentences.len(),
            SentenceRecords::Lfm { sentences } => sentences.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn supports(&self, mode: AggregationMode) -> bool {
        !matches!((self, mode), (SentenceRecords::Lfm { .. }, AggregationMode::Corpus))
    }

    pub fn sentence_scores(&self) -> Vec<f64> {
        match self {
            SentenceRecords::Gleu { sentences, .. } => sentences.iter().map(SentenceGleu::score).collect(),
            SentenceRecords::M2 { beta, sentences } => sentences
                .iter()
                .map(|per_annotator| best_annotator(per_annotator, *beta).1)
                .collect(),
            SentenceRecords::IMeasure { weight, sentences } => sentences.iter().map(|s| s.best(*weight).1).collect(),
            SentenceRecords::ErrorCount { sentences } => sentences.iter().map(ErrorCountStats::score).collect(),
            SentenceRecords::Lfm { sentences } => sentences.clone(),
        }
    }

    /// System-level score. Sentence mode is the mean sentence score; corpus
    /// mode pools the statistics before scoring.
    pub fn aggregate(&self, mode: AggregationMode) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Undefined("cannot aggregate an empty system".into()));
        }
        match mode {
            AggregationMode::Sentence => Ok(mean(&self.sentence_scores())),
            AggregationMode::Corpus => match self {
                SentenceRecords::Gleu { max_n, sentences } => Ok(gleu_pooled(sentences, *max_n)),
                SentenceRecords::M2 { beta, sentences } => Ok(m2_pooled(sentences, *beta)),
                SentenceRecords::IMeasure { weight, sentences } => Ok(i_measure_pooled(sentences, *weight)),
                SentenceRecords::ErrorCount { sentences } => {
                    let mut total = ErrorCountStats::default();
                    for s in sentences {
                        total.add(*s);
                    }
                    Ok(total.score())
                }
                SentenceRecords::Lfm { .. } => Err(Error::InvalidArgument(
                    "the LFM metric scores single sentences and has no corpus mode".into(),
                )),
            },
        }
    }
}
