//! Ridge regression through the normal equations.

use crate::error::{Error, Result};

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky
/// factorization.
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("matrix and vector sizes differ".into()));
    }
    // Pivots below this are treated as singular.
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let tolerance = scale * 1e-12;
    // Lower-triangular factor, A = L Lᵀ.
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - dot;
                if d.is_nan() || d <= tolerance {
                    return Err(Error::Numerical(
                        "normal equations are not positive definite (collinear features with α = 0?)".into(),
                    ));
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - dot) / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let dot: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - dot) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let dot: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - dot) / l[i][i];
    }
    Ok(x)
}

/// `(XᵀX, Xᵀy)` for a row-major design matrix.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let p = x.first().map_or(0, Vec::len);
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &target) in x.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * target;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    (xtx, xty)
}

/// A fitted ridge model in standardized coordinates:
/// `ŷ = bias + Σ_j weights[j] · (x_j − means[j]) / stdevs[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub means: Vec<f64>,
    pub stdevs: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alpha: f64,
    /// Indices of constant features; their weight is 0 and stdev 1.
    pub dropped: Vec<usize>,
}

impl RidgeFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.bias
            + x.iter()
                .zip(&self.means)
                .zip(&self.stdevs)
                .zip(&self.weights)
                .map(|(((x, m), s), w)| w * (x - m) / s)
                .sum::<f64>()
    }

    /// Slope per raw feature unit.
    pub fn raw_weights(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.stdevs).map(|(w, s)| w / s).collect()
    }

    /// Prediction at the all-zero raw feature vector.
    pub fn intercept(&self) -> f64 {
        self.bias
            - self
                .raw_weights()
                .iter()
                .zip(&self.means)
                .map(|(w, m)| w * m)
                .sum::<f64>()
    }
}

/// Fits ridge regression with an unpenalized bias.
///
/// Features are centered (and scaled to unit population stdev when
/// `standardize` is set), the target is centered, and
/// `(XᵀX + αI) w = Xᵀy` is solved on the centered data. The bias is the
/// target mean. Constant features are dropped.
pub fn train_ridge(x: &[Vec<f64>], y: &[f64], alpha: f64, standardize: bool) -> Result<RidgeFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} feature rows for {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("ridge regression needs at least 2 rows".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("α must be finite and ≥ 0, got {alpha}")));
    }
    let p = x[0].len();
    if x.iter().any(|row| row.len() != p) {
        return Err(Error::InvalidArgument("feature rows differ in length".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "training data contains non-finite values".into(),
        ));
    }

    let rows = x.len() as f64;
    let means: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / rows).collect();
    let spreads: Vec<f64> = (0..p)
        .map(|j| (x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / rows).sqrt())
        .collect();
    let kept: Vec<usize> = (0..p).filter(|&j| spreads[j] > 0.0).collect();
    let dropped: Vec<usize> = (0..p).filter(|&j| spreads[j] == 0.0).collect();
    let stdevs: Vec<f64> = (0..p)
        .map(|j| {
            if standardize && spreads[j] > 0.0 {
                spreads[j]
            } else {
                1.0
            }
        })
        .collect();

    let y_mean = y.iter().sum::<f64>() / rows;
    let design: Vec<Vec<f64>> = x
        .iter()
        .map(|r| kept.iter().map(|&j| (r[j] - means[j]) / stdevs[j]).collect())
        .collect();
    let centered_y: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let (mut xtx, xty) = normal_equations(&design, &centered_y);
    for (i, row) in xtx.iter_mut().enumerate() {
        row[i] += alpha;
    }
    let solved = if kept.is_empty() {
        Vec::new()
    } else {
        cholesky_solve(&xtx, &xty)?
    };

    let mut weights = vec![0.0; p];
    for (&j, w) in kept.iter().zip(solved) {
        weights[j] = w;
    }
    Ok(RidgeFit {
        means,
        stdevs,
        weights,
        bias: y_mean,
        alpha,
        dropped,
    })
}
