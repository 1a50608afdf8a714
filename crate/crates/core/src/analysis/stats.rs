//! Ranks, correlation coefficients and the Fisher z comparison.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Ranks in descending order of value (largest value gets rank 1); tied
/// values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSystem {
    pub system: String,
    pub value: f64,
    pub rank: f64,
}

/// Orders systems best first. Ties share the average rank and keep their
/// input order.
pub fn rank_systems(scores: &[(String, f64)]) -> Result<Vec<RankedSystem>> {
    let mut seen = HashSet::new();
    for (system, value) in scores {
        if !seen.insert(system.as_str()) {
            return Err(Error::Validation(format!("duplicate system id {system:?}")));
        }
        if value.is_nan() {
            return Err(Error::Undefined(format!("score of system {system:?} is NaN")));
        }
    }
    let values: Vec<f64> = scores.iter().map(|(_, v)| *v).collect();
    let ranks = average_ranks(&values);
    let mut ranked: Vec<RankedSystem> = scores
        .iter()
        .zip(ranks)
        .map(|((system, value), rank)| RankedSystem {
            system: system.clone(),
            value: *value,
            rank,
        })
        .collect();
    ranked.sort_by(|a, b| a.rank.total_cmp(&b.rank));
    Ok(ranked)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "correlation needs at least 3 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Undefined("correlation input is not finite".into()));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Fisher's z transform, `atanh(r)`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if r.is_nan() || r.abs() >= 1.0 {
        return Err(Error::Undefined(format!("Fisher transform of r = {r} is not finite")));
    }
    Ok(r.atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    /// Two-tailed p-value under the standard normal.
    pub p: f64,
}

/// Tests whether two correlations from independent samples differ.
pub fn compare_correlations(r1: f64, n1: usize, r2: f64, n2: usize) -> Result<ZTest> {
    if n1 < 4 || n2 < 4 {
        return Err(Error::InvalidArgument(format!(
            "correlation comparison needs n ≥ 4 (got {n1} and {n2})"
        )));
    }
    let diff = fisher_z(r1)? - fisher_z(r2)?;
    let se = (1.0 / (n1 - 3) as f64 + 1.0 / (n2 - 3) as f64).sqrt();
    let z = diff / se;
    Ok(ZTest {
        z,
        p: erfc(z.abs() / std::f64::consts::SQRT_2),
    })
}
