//! Scores whole system outputs with any metric, in parallel over sentences.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{MetricScores, SentenceRecords};
use crate::corpus::{validate_alignment, Corpus, ReferenceSet, Sentence, SystemOutput};
use crate::error::{Error, Result};
use crate::gleu::{GleuConfig, SentenceGleu};
use crate::grammaticality::{DetectorSuite, ErrorCountStats};
use crate::imeasure::{IMeasureConfig, SentenceIMeasure};
use crate::lfm::LfmScorer;
use crate::maxmatch::{all_annotator_counts, M2Config};

/// Sentences handed to the detector suite at once, so external checkers
/// can pipeline their requests.
const DETECTION_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Gleu,
    M2,
    IMeasure,
    ErrorCount,
    Lfm,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Gleu,
        Metric::M2,
        Metric::IMeasure,
        Metric::ErrorCount,
        Metric::Lfm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Gleu => "gleu",
            Metric::M2 => "m2",
            Metric::IMeasure => "i-measure",
            Metric::ErrorCount => "error-count",
            Metric::Lfm => "lfm",
        }
    }

    /// True for metrics that compare against references.
    pub fn is_reference_based(self) -> bool {
        matches!(self, Metric::Gleu | Metric::M2 | Metric::IMeasure)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown metric {s:?} (expected gleu, m2, i-measure, error-count or lfm)"
            ))
        })
    }
}

/// Everything needed to score system outputs against one corpus. Metrics
/// whose resources are absent fail with an invalid-argument error.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    pub corpus: &'a Corpus,
    /// References for GLEU and I-measure.
    pub references: Option<&'a ReferenceSet>,
    pub gleu: &'a GleuConfig,
    pub m2: &'a M2Config,
    pub imeasure: &'a IMeasureConfig,
    pub detectors: Option<&'a DetectorSuite>,
    pub lfm: Option<&'a LfmScorer>,
}

impl<'a> Scorer<'a> {
    /// Per-sentence statistics for one system.
    pub fn records(&self, metric: Metric, output: &SystemOutput) -> Result<SentenceRecords> {
        match (metric, self.references) {
            (Metric::Gleu | Metric::IMeasure, Some(refs)) => self.records_with(metric, output, refs),
            (Metric::Gleu | Metric::IMeasure, None) => {
                Err(Error::InvalidArgument(format!("metric {metric} needs references")))
            }
            _ => self.records_with(metric, output, &ReferenceSet::default()),
        }
    }

    /// Like [`Scorer::records`] but against an explicit reference set, as
    /// used by ablation and the gaming check.
    pub fn records_with(&self, metric: Metric, output: &SystemOutput, refs: &ReferenceSet) -> Result<SentenceRecords> {
        let uses_refs = matches!(metric, Metric::Gleu | Metric::IMeasure);
        validate_alignment(self.corpus, Some(output), uses_refs.then_some(refs)).into_result()?;
        let hyps = &output.hypotheses;
        let sources: Vec<&Sentence> = self.corpus.sources().collect();
        Ok(match metric {
            Metric::Gleu => {
                self.gleu.validate()?;
                let sentences = (0..hyps.len())
                    .into_par_iter()
                    .map(|i| SentenceGleu::compute(sources[i], &hyps[i], refs.get(i), self.gleu, i))
                    .collect::<Result<Vec<_>>>()?;
                SentenceRecords::Gleu {
                    max_n: self.gleu.max_n,
                    sentences,
                }
            }
            Metric::M2 => {
                self.m2.validate()?;
                let units = &self.corpus.units;
                let sentences = (0..hyps.len())
                    .into_par_iter()
                    .map(|i| all_annotator_counts(&units[i].source, &hyps[i], &units[i].annotations, self.m2))
                    .collect::<Result<Vec<_>>>()?;
                SentenceRecords::M2 {
                    beta: self.m2.beta,
                    sentences,
                }
            }
            Metric::IMeasure => {
                self.imeasure.validate()?;
                let sentences = (0..hyps.len())
                    .into_par_iter()
                    .map(|i| SentenceIMeasure::compute(sources[i], &hyps[i], refs.get(i)))
                    .collect::<Result<Vec<_>>>()?;
                SentenceRecords::IMeasure {
                    weight: self.imeasure.weight,
                    sentences,
                }
            }
            Metric::ErrorCount => {
                let suite = self
                    .detectors
                    .ok_or_else(|| Error::InvalidArgument("metric error-count needs a detector suite".into()))?;
                let chunks = hyps
                    .par_chunks(DETECTION_CHUNK)
                    .map(|chunk| {
                        let refs: Vec<&Sentence> = chunk.iter().collect();
                        let spans = suite.detect_all(&refs)?;
                        Ok(chunk
                            .iter()
                            .zip(spans)
                            .map(|(s, found)| ErrorCountStats {
                                errors: found.len(),
                                tokens: s.len(),
                            })
                            .collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>>>()?;
                SentenceRecords::ErrorCount {
                    sentences: chunks.into_iter().flatten().collect(),
                }
            }
            Metric::Lfm => {
                let lfm = self.lfm.ok_or_else(|| {
                    Error::InvalidArgument("metric lfm needs a model, language model and wordlist".into())
                })?;
                let sentences = hyps.par_iter().map(|h| lfm.score(h)).collect::<Result<Vec<_>>>()?;
                SentenceRecords::Lfm { sentences }
            }
        })
    }

    /// Sentence scores of every system against an explicit reference set.
    pub fn metric_scores_with(
        &self,
        metric: Metric,
        outputs: &[SystemOutput],
        refs: &ReferenceSet,
    ) -> Result<MetricScores> {
        let mut scores = MetricScores::new(metric.name());
        for output in outputs {
            let records = self.records_with(metric, output, refs)?;
            scores.insert(output.system_id.clone(), records.sentence_scores())?;
        }
        Ok(scores)
    }

    /// Sentence scores of every system with the scorer's own references.
    pub fn metric_scores(&self, metric: Metric, outputs: &[SystemOutput]) -> Result<MetricScores> {
        let mut scores = MetricScores::new(metric.name());
        for output in outputs {
            scores.insert(
                output.system_id.clone(),
                self.records(metric, output)?.sentence_scores(),
            )?;
        }
        Ok(scores)
    }
}
