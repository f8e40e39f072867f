//! Convergence diagnostics over replicated path evaluations.
//!
//! All reductions run sequentially over replicate-ordered slices, so the
//! results do not depend on how the replicates were scheduled.

mod ks;
mod normal;

pub use ks::{kolmogorov_survival, ks_statistic, ks_test, KsResult, MIN_KS_SAMPLES};
pub use normal::{normal_cdf, normal_cdf_with_variance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kac_stroock::PathEvaluation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub label: String,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(Self { values, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear-interpolated quantile, `q` in `[0,1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub mean: f64,
    /// Unbiased.
    pub variance: f64,
    pub stderr_mean: f64,
}

/// Welford's single pass.
pub fn empirical_moments(samples: &SampleSet) -> Result<EmpiricalMoments> {
    let m = samples.values.len();
    if m < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: m });
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in samples.values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let variance = m2 / (m - 1) as f64;
    Ok(EmpiricalMoments { mean, variance, stderr_mean: (variance / m as f64).sqrt() })
}

fn common_grid(paths: &[PathEvaluation]) -> Result<&[f64]> {
    let first = paths.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    for (i, p) in paths.iter().enumerate() {
        if p.grid != first.grid {
            return Err(Error::GridMismatch(format!("replicate {i} uses a different grid")));
        }
        let g = p.grid.len();
        if p.x_values.len() != g || p.w_values.len() != g || p.r_values.len() != g {
            return Err(Error::GridMismatch(format!("replicate {i} has ragged value arrays")));
        }
    }
    Ok(&first.grid)
}

fn grid_indices(grid: &[f64], times: &[f64]) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            grid.iter()
                .position(|&g| g == t)
                .ok_or_else(|| Error::GridMismatch(format!("time {t} is not a grid point")))
        })
        .collect()
}

/// Empirical covariance of `X_n` across replicates, with per-entry
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceGrid {
    pub times: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub replicates: usize,
}

pub fn covariance_grid(paths: &[PathEvaluation], times: &[f64]) -> Result<CovarianceGrid> {
    if paths.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: paths.len() });
    }
    let grid = common_grid(paths)?;
    let idx = grid_indices(grid, times)?;
    let m = paths.len();
    let mf = m as f64;
    let columns: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| paths.iter().map(|p| p.x_values[i]).collect())
        .collect();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / mf).collect();

    let k = times.len();
    let mut covariance = vec![vec![0.0; k]; k];
    let mut stderr = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let products: Vec<f64> = (0..m)
                .map(|r| (columns[a][r] - means[a]) * (columns[b][r] - means[b]))
                .collect();
            let sum: f64 = products.iter().sum();
            let cov = sum / (mf - 1.0);
            let pm = sum / mf;
            let spread = products.iter().map(|z| (z - pm) * (z - pm)).sum::<f64>() / (mf - 1.0);
            let se = (spread / mf).sqrt();
            covariance[a][b] = cov;
            covariance[b][a] = cov;
            stderr[a][b] = se;
            stderr[b][a] = se;
        }
    }
    Ok(CovarianceGrid { times: times.to_vec(), covariance, stderr, replicates: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathField {
    X,
    W,
    R,
}

/// Per-replicate `sup_t |field(t)|` over the grid.
pub fn sup_norm_stats(paths: &[PathEvaluation], field: PathField) -> Result<SampleSet> {
    common_grid(paths)?;
    let values = paths
        .iter()
        .map(|p| {
            let v = match field {
                PathField::X => &p.x_values,
                PathField::W => &p.w_values,
                PathField::R => &p.r_values,
            };
            v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
        })
        .collect();
    SampleSet::new(values, format!("sup |{field:?}|"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementCorrelation {
    pub corr: f64,
    pub stderr: f64,
}

/// Correlation of `X(t1) - X(s1)` with `X(t2) - X(s2)` for
/// `s1 < t1 <= s2 < t2`. Standard error is `1/sqrt(M)`.
pub fn increment_independence_check(
    paths: &[PathEvaluation],
    (s1, t1, s2, t2): (f64, f64, f64, f64),
) -> Result<IncrementCorrelation> {
    if !(s1 < t1 && t1 <= s2 && s2 < t2) {
        return Err(Error::OverlappingIncrements { s1, t1, s2, t2 });
    }
    if paths.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: paths.len() });
    }
    let grid = common_grid(paths)?;
    let idx = grid_indices(grid, &[s1, t1, s2, t2])?;
    let first: Vec<f64> = paths.iter().map(|p| p.x_values[idx[1]] - p.x_values[idx[0]]).collect();
    let second: Vec<f64> = paths.iter().map(|p| p.x_values[idx[3]] - p.x_values[idx[2]]).collect();
    let m = paths.len() as f64;
    let ma = first.iter().sum::<f64>() / m;
    let mb = second.iter().sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in first.iter().zip(&second) {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::InvalidParameter("increment has zero variance".into()));
    }
    Ok(IncrementCorrelation { corr: sab / (saa * sbb).sqrt(), stderr: 1.0 / m.sqrt() })
}
