//! Linguistic feature-based model: sentence features fed to a ridge
//! regression trained on grammaticality judgements.

mod features;
mod lm;
mod ridge;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::grammaticality::Wordlist;

pub use features::{featurize, FeatureVector, FEATURE_NAMES};
pub use lm::NgramLm;
pub use ridge::{cholesky_solve, normal_equations, train_ridge, RidgeFit};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_LM_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Serialized LFM regression model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfmModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stdevs: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alpha: f64,
    /// Names of features that were constant in training.
    #[serde(default)]
    pub dropped: Vec<String>,
}

impl LfmModel {
    fn from_fit(fit: RidgeFit) -> Self {
        LfmModel {
            format_version: MODEL_FORMAT_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            dropped: fit.dropped.iter().map(|&j| FEATURE_NAMES[j].to_string()).collect(),
            means: fit.means,
            stdevs: fit.stdevs,
            weights: fit.weights,
            bias: fit.bias,
            alpha: fit.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let expected: Vec<&str> = FEATURE_NAMES.to_vec();
        if self.feature_names != expected {
            return Err(Error::ModelFormat(format!(
                "model features {:?} do not match this build's features {expected:?}",
                self.feature_names
            )));
        }
        let p = FEATURE_NAMES.len();
        if self.means.len() != p || self.stdevs.len() != p || self.weights.len() != p {
            return Err(Error::ModelFormat(format!("model vectors must have {p} entries")));
        }
        if self.stdevs.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::ModelFormat("model stdevs must be positive".into()));
        }
        Ok(())
    }

    /// Unclipped regression output.
    pub fn predict_raw(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::ModelFormat(format!(
                "model expects {} features, got {}",
                self.weights.len(),
                features.len()
            )));
        }
        let dot: f64 = features
            .iter()
            .zip(&self.means)
            .zip(&self.stdevs)
            .zip(&self.weights)
            .map(|(((x, m), s), w)| w * (x - m) / s)
            .sum();
        Ok(self.bias + dot)
    }

    /// Regression output clipped to [0, 1].
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        Ok(self.predict_raw(features)?.clamp(0.0, 1.0))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: LfmModel =
            serde_json::from_str(text.trim_start_matches('\u{feff}')).map_err(|e| Error::ModelFormat(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}

/// Trains the regression on labelled feature vectors. Targets are expected
/// in [0, 1].
pub fn train_lfm(rows: &[(FeatureVector, f64)], alpha: f64) -> Result<LfmModel> {
    let x: Vec<Vec<f64>> = rows.iter().map(|(f, _)| f.0.to_vec()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, t)| *t).collect();
    Ok(LfmModel::from_fit(train_ridge(&x, &y, alpha, true)?))
}

/// Maps a score on the 1–4 judgement scale linearly onto [0, 1].
pub fn rescale_1_to_4(score: f64) -> f64 {
    (score - 1.0) / 3.0
}

/// A model bundled with the resources its features need.
#[derive(Debug, Clone)]
pub struct LfmScorer {
    pub model: LfmModel,
    pub lm: Arc<NgramLm>,
    pub wordlist: Arc<Wordlist>,
}

impl LfmScorer {
    pub fn new(model: LfmModel, lm: Arc<NgramLm>, wordlist: Arc<Wordlist>) -> Result<Self> {
        model.validate()?;
        Ok(LfmScorer { model, lm, wordlist })
    }

    pub fn score(&self, sentence: &Sentence) -> Result<f64> {
        lfm_score(sentence, &self.model, &self.lm, &self.wordlist)
    }
}

pub fn lfm_score(sentence: &Sentence, model: &LfmModel, lm: &NgramLm, wordlist: &Wordlist) -> Result<f64> {
    model.predict(featurize(sentence, lm, wordlist).as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_model(bias: f64) -> LfmModel {
        LfmModel {
            format_version: MODEL_FORMAT_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            means: vec![0.0; 8],
            stdevs: vec![1.0; 8],
            weights: vec![0.0; 8],
            bias,
            alpha: 1.0,
            dropped: vec![],
        }
    }

    fn resources() -> (NgramLm, Wordlist) {
        let corpus = vec![Sentence::tokenize("the cat sat ."), Sentence::tokenize("a dog ran .")];
        (
            NgramLm::train(&corpus, 3).unwrap(),
            Wordlist::from_words(["the", "cat", "sat", "a", "dog", "ran"]),
        )
    }

    #[test]
    fn clipping() {
        let (lm, wl) = resources();
        let s = Sentence::tokenize("the cat sat .");
        assert_eq!(lfm_score(&s, &constant_model(0.5), &lm, &wl).unwrap(), 0.5);
        assert_eq!(lfm_score(&s, &constant_model(1.7), &lm, &wl).unwrap(), 1.0);
        assert_eq!(lfm_score(&s, &constant_model(-0.2), &lm, &wl).unwrap(), 0.0);
    }

    #[test]
    fn feature_count_mismatch() {
        assert!(matches!(
            constant_model(0.5).predict(&[1.0, 2.0]),
            Err(Error::ModelFormat(_))
        ));
        let mut bad = constant_model(0.5);
        bad.weights.pop();
        assert!(bad.validate().is_err());
        bad = constant_model(0.5);
        bad.format_version = 9;
        assert!(LfmModel::from_json(&bad.to_json().unwrap()).is_err());
    }

    #[test]
    fn train_and_round_trip() {
        let (lm, wl) = resources();
        let data = [
            ("the cat sat .", 1.0),
            ("teh cat sat", 0.2),
            ("a dog ran .", 0.9),
            ("a a dgo rann", 0.0),
            ("the dog sat .", 0.8),
        ];
        let rows: Vec<(FeatureVector, f64)> = data
            .iter()
            .map(|(s, y)| (featurize(&Sentence::tokenize(s), &lm, &wl), *y))
            .collect();
        let model = train_lfm(&rows, 1.0).unwrap();
        let json = model.to_json().unwrap();
        let back = LfmModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), json);
        for (features, _) in &rows {
            let a = model.predict(features.as_slice()).unwrap();
            let b = back.predict(features.as_slice()).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(
            lfm_score(&Sentence::tokenize("the cat sat ."), &model, &lm, &wl).unwrap()
                > lfm_score(&Sentence::tokenize("teh cat sat"), &model, &lm, &wl).unwrap()
        );
    }

    #[test]
    fn rescaling() {
        assert_eq!(rescale_1_to_4(1.0), 0.0);
        assert_eq!(rescale_1_to_4(4.0), 1.0);
        assert_eq!(rescale_1_to_4(2.5), 0.5);
    }
}
