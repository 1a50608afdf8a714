//! Versioned JSON score reports.

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::analysis::{
    AblationResult, AggregationMode, CorrelationReport, GamingReport, LambdaSweepResult, RankedSystem,
};
use crate::error::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Significant digits used for reals unless overridden.
pub const DEFAULT_REPORT_PRECISION: usize = 6;

/// Scores of one system under one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemEntry {
    pub id: String,
    pub metric: String,
    /// Aggregation used when this entry is ranked or correlated.
    pub mode: AggregationMode,
    pub mean_sentence_score: f64,
    /// Pooled score; `null` for metrics without a corpus mode.
    pub corpus_score: Option<f64>,
    pub per_sentence: Vec<f64>,
}

impl SystemEntry {
    /// The score selected by `mode`.
    pub fn score(&self, mode: AggregationMode) -> Option<f64> {
        match mode {
            AggregationMode::Sentence => Some(self.mean_sentence_score),
            AggregationMode::Corpus => self.corpus_score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub metric: String,
    pub mode: AggregationMode,
    pub ranking: Vec<RankedSystem>,
}

/// Top-level report. Keys are written in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    #[serde(default)]
    pub systems: Vec<SystemEntry>,
    #[serde(default)]
    pub correlations: Vec<CorrelationReport>,
    #[serde(default)]
    pub sweep: Option<LambdaSweepResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rankings: Vec<RankingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<AblationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaming: Option<GamingReport>,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            format_version: REPORT_FORMAT_VERSION,
            systems: Vec::new(),
            correlations: Vec::new(),
            sweep: None,
            rankings: Vec::new(),
            ablation: None,
            gaming: None,
        }
    }
}

impl Report {
    /// Metric names in first-seen order.
    pub fn metrics(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for entry in &self.systems {
            if !names.contains(&entry.metric.as_str()) {
                names.push(&entry.metric);
            }
        }
        names
    }

    pub fn entries_for<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a SystemEntry> + 'a {
        self.systems.iter().filter(move |e| e.metric == metric)
    }
}

fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_value(value: &mut Value, digits: usize) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(rounded) = Number::from_f64(round_significant(x, digits)) {
                *n = rounded;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_value(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_value(v, digits)),
        _ => {}
    }
}

/// Renders a report as pretty JSON with a trailing newline. Reals are
/// rounded to `precision` significant digits; `None` keeps full precision.
/// Non-finite reals are written as `null`.
pub fn write_report(report: &Report, precision: Option<usize>) -> Result<String> {
    if precision == Some(0) {
        return Err(Error::InvalidArgument("report precision must be at least 1".into()));
    }
    let mut value = serde_json::to_value(report)?;
    if let Some(digits) = precision {
        round_value(&mut value, digits);
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn read_report(text: &str) -> Result<Report> {
    let report: Report = serde_json::from_str(text.trim_start_matches('\u{feff}'))?;
    if report.format_version != REPORT_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported report format_version {} (expected {REPORT_FORMAT_VERSION})",
            report.format_version
        )));
    }
    Ok(report)
}
