//! Metric-quality experiments: correlation with a human ranking, the λ
//! sweep, reference ablation and the shuffled-reference gaming check.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::ReferenceSet;
use crate::error::{Error, Result};
use crate::formats::HumanRanking;
use crate::util::{mean, seeded_rng, stable_mean};

use super::stats::{compare_correlations, pearson, spearman};
use super::{interpolate, lambda_grid, AggregationMode, MetricScores};

/// Human scores aligned with `systems`.
fn human_scores(systems: &[(String, f64)], human: &HumanRanking) -> Result<Vec<f64>> {
    systems
        .iter()
        .map(|(id, _)| {
            human
                .get(id)
                .ok_or_else(|| Error::Validation(format!("system {id:?} is missing from the human ranking")))
        })
        .collect()
}

/// Correlation coefficients, `None` where undefined (a constant series).
fn coefficients(metric: &[f64], human: &[f64]) -> Result<(Option<f64>, Option<f64>)> {
    let defined = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok((defined(spearman(metric, human))?, defined(pearson(metric, human))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Spearman,
    Pearson,
}

/// A Fisher z comparison of this report's coefficient against another
/// metric's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub against: String,
    pub coefficient: Coefficient,
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub metric: String,
    pub mode: AggregationMode,
    pub n: usize,
    pub spearman: Option<f64>,
    pub pearson: Option<f64>,
    #[serde(default)]
    pub significance: Vec<Significance>,
}

/// Correlates system-level metric scores with the human ranking. Every
/// scored system must appear in the ranking.
pub fn correlate(
    metric: &str,
    mode: AggregationMode,
    systems: &[(String, f64)],
    human: &HumanRanking,
) -> Result<CorrelationReport> {
    let values: Vec<f64> = systems.iter().map(|(_, v)| *v).collect();
    let human = human_scores(systems, human)?;
    let (spearman, pearson) = coefficients(&values, &human)?;
    Ok(CorrelationReport {
        metric: metric.to_owned(),
        mode,
        n: systems.len(),
        spearman,
        pearson,
        significance: Vec::new(),
    })
}

impl CorrelationReport {
    /// Fills in pairwise comparisons between all reports. Pairs where a
    /// coefficient is undefined or ±1 are skipped.
    pub fn compare_all(reports: &mut [CorrelationReport]) {
        let snapshot: Vec<(String, usize, Option<f64>, Option<f64>)> = reports
            .iter()
            .map(|r| (format!("{}/{}", r.metric, r.mode), r.n, r.spearman, r.pearson))
            .collect();
        for (a, report) in reports.iter_mut().enumerate() {
            report.significance.clear();
            for (b, (name, n, rho, r)) in snapshot.iter().enumerate() {
                if a == b {
                    continue;
                }
                let pairs = [
                    (Coefficient::Spearman, report.spearman, *rho),
                    (Coefficient::Pearson, report.pearson, *r),
                ];
                for (coefficient, mine, theirs) in pairs {
                    if let (Some(x), Some(y)) = (mine, theirs) {
                        if let Ok(t) = compare_correlations(x, report.n, y, *n) {
                            report.significance.push(Significance {
                                against: name.clone(),
                                coefficient,
                                z: t.z,
                                p: t.p,
                            });
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub spearman: Option<f64>,
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepResult {
    pub gbm: String,
    pub rbm: String,
    pub n_systems: usize,
    pub points: Vec<SweepPoint>,
    pub oracle_spearman: Option<OraclePoint>,
    pub oracle_pearson: Option<OraclePoint>,
}

fn oracle(points: &[SweepPoint], pick: impl Fn(&SweepPoint) -> Option<f64>) -> Option<OraclePoint> {
    let mut best: Option<OraclePoint> = None;
    for p in points {
        if let Some(value) = pick(p) {
            // Strict comparison keeps the smallest λ among ties.
            if best.is_none_or(|b| value > b.value) {
                best = Some(OraclePoint {
                    lambda: p.lambda,
                    value,
                });
            }
        }
    }
    best
}

/// Interpolated sentence-mode system scores at one λ, in `gbm` order.
fn interpolated_means(gbm: &MetricScores, rbm: &MetricScores, lambda: f64) -> Vec<(String, f64)> {
    gbm.systems
        .iter()
        .map(|(id, f)| {
            let r = &rbm.systems[id];
            let values: Vec<f64> = f.iter().zip(r).map(|(&f, &r)| interpolate(f, r, lambda)).collect();
            (id.clone(), mean(&values))
        })
        .collect()
}

/// Correlation with the human ranking at every λ of the 101-point grid,
/// plus the oracle λ for each coefficient (ties go to the smallest λ).
pub fn sweep_lambda(gbm: &MetricScores, rbm: &MetricScores, human: &HumanRanking) -> Result<LambdaSweepResult> {
    gbm.check_same_grid(rbm)?;
    let systems: Vec<(String, f64)> = gbm.systems.keys().map(|id| (id.clone(), 0.0)).collect();
    let human = human_scores(&systems, human)?;
    let points = lambda_grid()
        .into_par_iter()
        .map(|lambda| {
            let values: Vec<f64> = interpolated_means(gbm, rbm, lambda)
                .into_iter()
                .map(|(_, v)| v)
                .collect();
            let (spearman, pearson) = coefficients(&values, &human)?;
            Ok(SweepPoint {
                lambda,
                spearman,
                pearson,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSweepResult {
        gbm: gbm.metric.clone(),
        rbm: rbm.metric.clone(),
        n_systems: systems.len(),
        oracle_spearman: oracle(&points, |p| p.spearman),
        oracle_pearson: oracle(&points, |p| p.pearson),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub n_refs: usize,
    /// Oracle Spearman ρ of each trial.
    pub trials: Vec<f64>,
    pub mean: f64,
    /// 95% normal-approximation interval; absent for a single trial.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub gbm: String,
    pub rbm: String,
    pub seed: u64,
    pub points: Vec<AblationPoint>,
}

/// Reference indices kept for each sentence: `n` of them, sampled without
/// replacement and sorted.
fn sample_references(refs: &ReferenceSet, n: usize, seed: u64, trial: usize) -> Vec<Vec<usize>> {
    refs.iter()
        .enumerate()
        .map(|(i, available)| {
            let mut rng = seeded_rng(seed, &[n as u64, trial as u64, i as u64]);
            let mut picked = sample(&mut rng, available.len(), n).into_vec();
            picked.sort_unstable();
            picked
        })
        .collect()
}

/// For each reference count in `sizes`, rescores the reference-based metric
/// on `trials` random subsets of the references and records the oracle
/// Spearman ρ of the λ sweep against `gbm`.
#[allow(clippy::too_many_arguments)]
pub fn ablate_references<F>(
    gbm: &MetricScores,
    rbm_name: &str,
    human: &HumanRanking,
    refs: &ReferenceSet,
    sizes: &[usize],
    trials: usize,
    seed: u64,
    scorer: F,
) -> Result<AblationResult>
where
    F: Fn(&ReferenceSet) -> Result<MetricScores> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("ablation needs at least one trial".into()));
    }
    let available = refs.iter().map(<[_]>::len).min().unwrap_or(0);
    for &n in sizes {
        if n == 0 || n > available {
            return Err(Error::InvalidArgument(format!(
                "cannot sample {n} references; every sentence has at least {available}"
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    let rhos = jobs
        .par_iter()
        .map(|&(n, trial)| {
            let subset = refs.select(&sample_references(refs, n, seed, trial))?;
            let mut rbm = scorer(&subset)?;
            rbm.metric = rbm_name.to_owned();
            let sweep = sweep_lambda(gbm, &rbm, human)?;
            sweep.oracle_spearman.map(|o| o.value).ok_or_else(|| {
                Error::Undefined(format!(
                    "Spearman ρ is undefined at every λ ({n} references, trial {trial})"
                ))
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let points = sizes
        .iter()
        .zip(rhos.chunks(trials))
        .map(|(&n_refs, trials)| {
            let mean = stable_mean(trials);
            let (ci_low, ci_high) = if trials.len() < 2 {
                (None, None)
            } else {
                let var = trials.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials.len() - 1) as f64;
                let half = 1.96 * var.sqrt() / (trials.len() as f64).sqrt();
                (Some(mean - half), Some(mean + half))
            };
            AblationPoint {
                n_refs,
                trials: trials.to_vec(),
                mean,
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(AblationResult {
        gbm: gbm.metric.clone(),
        rbm: rbm_name.to_owned(),
        seed,
        points,
    })
}

/// A seeded shuffle that avoids fixed points: uniform shuffles are retried
/// until one is a derangement, falling back to a random cyclic permutation.
/// `n < 2` has no derangement and is returned as the identity.
pub fn derangement_preferring_shuffle<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    if n < 2 {
        return perm;
    }
    for _ in 0..64 {
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return perm;
        }
    }
    // Sattolo's algorithm yields a single n-cycle.
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..i);
        perm.swap(i, j);
    }
    perm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamingReport {
    pub gbm: String,
    pub rbm: String,
    pub lambda: f64,
    pub seed: u64,
    pub permutation: Vec<usize>,
    pub gbm_true: f64,
    pub gbm_shuffled: f64,
    pub rbm_true: f64,
    pub rbm_shuffled: f64,
    pub interpolated_true: f64,
    pub interpolated_shuffled: f64,
    /// `(true − shuffled) / |true|`; absent when the true score is 0.
    pub rbm_relative_drop: Option<f64>,
    pub interpolated_relative_drop: Option<f64>,
}

fn grand_mean(scores: &MetricScores) -> f64 {
    let means: Vec<f64> = scores.system_means().into_iter().map(|(_, v)| v).collect();
    mean(&means)
}

fn interpolated_grand_mean(gbm: &MetricScores, rbm: &MetricScores, lambda: f64) -> f64 {
    let means: Vec<f64> = interpolated_means(gbm, rbm, lambda)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    mean(&means)
}

fn relative_drop(before: f64, after: f64) -> Option<f64> {
    (before != 0.0).then(|| (before - after) / before.abs())
}

/// Rescores the reference-based metric against references reassigned to
/// the wrong sentences and reports how much the plain and interpolated
/// scores fall. The reference-less component is unaffected by construction.
pub fn gaming_check<F>(
    gbm: &MetricScores,
    rbm: &MetricScores,
    refs: &ReferenceSet,
    lambda: f64,
    seed: u64,
    scorer: F,
) -> Result<GamingReport>
where
    F: Fn(&ReferenceSet) -> Result<MetricScores>,
{
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} is outside [0, 1]")));
    }
    gbm.check_same_grid(rbm)?;
    if refs.len() < 2 {
        return Err(Error::InvalidArgument(
            "the gaming check needs at least two sentences".into(),
        ));
    }
    if refs.len() != rbm.n_sentences() {
        return Err(Error::Validation(format!(
            "{} reference lists for {} scored sentences",
            refs.len(),
            rbm.n_sentences()
        )));
    }
    let mut rng = seeded_rng(seed, &[]);
    let permutation = derangement_preferring_shuffle(refs.len(), &mut rng);
    let mut shuffled = scorer(&refs.permuted(&permutation)?)?;
    shuffled.metric = rbm.metric.clone();
    rbm.check_same_grid(&shuffled)?;

    let gbm_mean = grand_mean(gbm);
    let (rbm_true, rbm_shuffled) = (grand_mean(rbm), grand_mean(&shuffled));
    let interpolated_true = interpolated_grand_mean(gbm, rbm, lambda);
    let interpolated_shuffled = interpolated_grand_mean(gbm, &shuffled, lambda);
    Ok(GamingReport {
        gbm: gbm.metric.clone(),
        rbm: rbm.metric.clone(),
        lambda,
        seed,
        permutation,
        gbm_true: gbm_mean,
        gbm_shuffled: gbm_mean,
        rbm_true,
        rbm_shuffled,
        interpolated_true,
        interpolated_shuffled,
        rbm_relative_drop: relative_drop(rbm_true, rbm_shuffled),
        interpolated_relative_drop: relative_drop(interpolated_true, interpolated_shuffled),
    })
}
