//! Interpolation, aggregation, ranking and correlation analyses.
//!
//! The interpolated score of a sentence is `(1 − λ)·S_F + λ·S_R`, where
//! `S_F` comes from a reference-less metric and `S_R` from a
//! reference-based one. Raw values are combined, so I-measure's [−1, 1]
//! range is not rescaled.

mod aggregate;
mod experiment;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::mean;

pub use aggregate::SentenceRecords;
pub use experiment::{
    ablate_references, correlate, derangement_preferring_shuffle, gaming_check, sweep_lambda, AblationPoint,
    AblationResult, Coefficient, CorrelationReport, GamingReport, LambdaSweepResult, OraclePoint, Significance,
    SweepPoint,
};
pub use stats::{average_ranks, compare_correlations, fisher_z, pearson, rank_systems, spearman, RankedSystem, ZTest};

/// Number of points in the λ grid.
pub const LAMBDA_GRID_SIZE: usize = 101;

/// `0.00, 0.01, …, 1.00`, each computed as `k / 100`.
pub fn lambda_grid() -> Vec<f64> {
    (0..LAMBDA_GRID_SIZE)
        .map(|k| k as f64 / (LAMBDA_GRID_SIZE - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    /// Mean of sentence-level scores.
    #[default]
    Sentence,
    /// Metric-specific pooled statistic.
    Corpus,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Sentence => "sentence",
            AggregationMode::Corpus => "corpus",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentence" => Ok(AggregationMode::Sentence),
            "corpus" => Ok(AggregationMode::Corpus),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation mode {other:?} (expected sentence or corpus)"
            ))),
        }
    }
}

/// `(1 − λ)·gbm + λ·rbm`. Equal components are returned unchanged, and the
/// endpoints `λ = 0` and `λ = 1` return the components exactly.
pub fn interpolate(gbm: f64, rbm: f64, lambda: f64) -> f64 {
    if gbm == rbm {
        return gbm;
    }
    (1.0 - lambda) * gbm + lambda * rbm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub metric: String,
    pub system: String,
    pub sentence: usize,
    pub value: f64,
}

/// Interpolates two sentence scores for the same system and sentence.
pub fn interpolate_scores(gbm: &SentenceScore, rbm: &SentenceScore, lambda: f64) -> Result<SentenceScore> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} is outside [0, 1]")));
    }
    if gbm.system != rbm.system || gbm.sentence != rbm.sentence {
        return Err(Error::Validation(format!(
            "cannot interpolate {}#{} with {}#{}",
            gbm.system, gbm.sentence, rbm.system, rbm.sentence
        )));
    }
    Ok(SentenceScore {
        metric: format!("{}+{}@{lambda}", gbm.metric, rbm.metric),
        system: gbm.system.clone(),
        sentence: gbm.sentence,
        value: interpolate(gbm.value, rbm.value, lambda),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemScore {
    pub system: String,
    pub metric: String,
    pub mode: AggregationMode,
    pub value: f64,
}

/// Per-sentence scores of one metric, for each system, in a fixed system
/// order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub metric: String,
    pub systems: IndexMap<String, Vec<f64>>,
}

impl MetricScores {
    pub fn new(metric: impl Into<String>) -> Self {
        MetricScores {
            metric: metric.into(),
            systems: IndexMap::new(),
        }
    }

    /// Adds a system; every system must cover the same number of sentences.
    pub fn insert(&mut self, system: impl Into<String>, scores: Vec<f64>) -> Result<()> {
        let system = system.into();
        if self.systems.contains_key(&system) {
            return Err(Error::Validation(format!("duplicate system id {system:?}")));
        }
        if let Some(first) = self.systems.values().next() {
            if first.len() != scores.len() {
                return Err(Error::Validation(format!(
                    "system {system:?} has {} sentence scores, expected {}",
                    scores.len(),
                    first.len()
                )));
            }
        }
        self.systems.insert(system, scores);
        Ok(())
    }

    pub fn n_sentences(&self) -> usize {
        self.systems.values().next().map_or(0, Vec::len)
    }

    /// Sentence-mode system scores.
    pub fn system_means(&self) -> Vec<(String, f64)> {
        self.systems
            .iter()
            .map(|(id, scores)| (id.clone(), mean(scores)))
            .collect()
    }

    /// Checks that `other` scores the same systems over the same sentences.
    pub fn check_same_grid(&self, other: &MetricScores) -> Result<()> {
        let same = self.systems.len() == other.systems.len()
            && self
                .systems
                .iter()
                .all(|(id, scores)| other.systems.get(id).is_some_and(|o| o.len() == scores.len()));
        if same {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "metrics {} and {} were not scored on the same systems and sentences",
                self.metric, other.metric
            )))
        }
    }
}
