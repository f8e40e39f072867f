use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// KS test of `X_n(t)/sqrt(t)` against `N(0,1)` at each marginal time.
    KsMarginals,
    /// Empirical covariance against `min(s, t)`.
    Covariance,
    /// Pointwise remainder bound and sup-norm summary.
    Remainder,
    /// Mean of `(C/sqrt n) max_{i<=n+1} U_i` against its moment bound.
    MaximalBound,
    /// Correlation of disjoint increments.
    Increments,
    /// Frequency of `L(n) > n`.
    TimeChange,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::KsMarginals,
        Check::Covariance,
        Check::Remainder,
        Check::MaximalBound,
        Check::Increments,
        Check::TimeChange,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// `--assert` fails a KS marginal with p-value at or below this.
    pub ks_p_min: f64,
    pub covariance_sigmas: f64,
    pub increment_sigmas: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ks_p_min: 0.001, covariance_sigmas: 4.0, increment_sigmas: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: InterArrivalLaw,
    pub n_values: Vec<u64>,
    pub replicates: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub seed: u64,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default = "default_marginal_times")]
    pub marginal_times: Vec<f64>,
    #[serde(default = "default_covariance_times")]
    pub covariance_times: Vec<f64>,
    /// `(s1, t1, s2, t2)`
    #[serde(default = "default_increments")]
    pub increments: [f64; 4],
    /// Order `p > 2` at which the moment condition is certified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_p: Option<f64>,
    /// Replaces `sqrt(mean/variance)`; meant for degenerate or
    /// hypothesis-violating runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kac_constant: Option<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Embed every replicate's grid evaluation in the report.
    #[serde(default)]
    pub emit_paths: bool,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
    /// Above this `n`, paths are evaluated without being stored.
    #[serde(default = "default_streaming_threshold")]
    pub streaming_threshold: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_grid() -> usize {
    1024
}

fn default_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

fn default_marginal_times() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

fn default_covariance_times() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

fn default_increments() -> [f64; 4] {
    [0.0, 0.3, 0.5, 0.9]
}

fn default_max_events() -> u64 {
    crate::renewal::DEFAULT_MAX_EVENTS
}

fn default_streaming_threshold() -> u64 {
    10_000_000
}

impl ExperimentConfig {
    /// Configuration shipped as `configs/default.json`.
    pub fn default_for(law: InterArrivalLaw) -> Self {
        Self {
            law,
            n_values: vec![100, 1000, 10_000],
            replicates: 2000,
            grid: default_grid(),
            seed: 42,
            checks: default_checks(),
            marginal_times: default_marginal_times(),
            covariance_times: default_covariance_times(),
            increments: default_increments(),
            moment_p: Some(3.0),
            kac_constant: None,
            thresholds: Thresholds::default(),
            emit_paths: false,
            max_events: default_max_events(),
            streaming_threshold: default_streaming_threshold(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn has(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n_values must be a nonempty list of integers >= 1".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        if self.grid < 2 {
            return bad(format!("grid must be >= 2, got {}", self.grid));
        }
        let unit = |t: &f64| t.is_finite() && *t > 0.0 && *t <= 1.0;
        if !self.marginal_times.iter().all(unit) {
            return bad("marginal_times must lie in (0, 1]".into());
        }
        if !self.covariance_times.iter().all(unit) {
            return bad("covariance_times must lie in (0, 1]".into());
        }
        let [s1, t1, s2, t2] = self.increments;
        if !(0.0 <= s1 && s1 < t1 && t1 <= s2 && s2 < t2 && t2 <= 1.0) {
            return bad(format!("increments must satisfy 0 <= s1 < t1 <= s2 < t2 <= 1, got {:?}", self.increments));
        }
        if let Some(p) = self.moment_p {
            if !(p.is_finite() && p > 2.0) {
                return bad(format!("moment_p must exceed 2, got {p}"));
            }
        }
        if let Some(c) = self.kac_constant {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("kac_constant must be positive, got {c}"));
            }
        }
        let th = &self.thresholds;
        if !(0.0..1.0).contains(&th.ks_p_min) || th.covariance_sigmas <= 0.0 || th.increment_sigmas <= 0.0 {
            return bad("thresholds out of range".into());
        }
        Ok(())
    }

    /// Sorted evaluation times: the uniform grid plus every diagnostic time.
    pub fn evaluation_times(&self) -> Vec<f64> {
        let mut times = crate::kac_stroock::uniform_grid(self.grid);
        times.extend(&self.marginal_times);
        times.extend(&self.covariance_times);
        times.extend(self.increments);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[10],"replicates":5,"seed":1}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.grid, 1024);
        assert_eq!(c.checks, Check::ALL.to_vec());
        assert_eq!(c.thresholds, Thresholds::default());
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[0],"replicates":5,"seed":1}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[],"replicates":5,"seed":1}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":0,"seed":1}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":1,"seed":1,"grid":1}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":1,"seed":1,"bogus":1}"#,
            r#"{"law":{"kind":"exponential","rate":0.0},"n_values":[3],"replicates":1,"seed":1}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":1,"seed":1,"increments":[0.0,0.5,0.3,0.9]}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":1,"seed":1,"moment_p":2.0}"#,
            r#"{"law":{"kind":"exponential","rate":1.0},"n_values":[3],"replicates":1,"seed":1,"marginal_times":[0.0]}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn evaluation_times_merge_grid_and_diagnostics() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let times = c.evaluation_times();
        assert!(times.contains(&0.3) && times.contains(&0.9) && times.contains(&0.25));
        assert_eq!(times.first(), Some(&0.0));
        assert_eq!(times.last(), Some(&1.0));
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(times.len(), 1025 + 2);
    }
}
