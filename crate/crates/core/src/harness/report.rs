use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::distributions::MomentCertificate;
use crate::error::{Error, Result};
use crate::kac_stroock::PathEvaluation;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub label: String,
    pub mean: f64,
    /// `None` when infinite.
    pub variance: Option<f64>,
    pub kac_constant: f64,
    pub kac_constant_overridden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlag {
    pub certificate: MomentCertificate,
    pub within_hypotheses: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub label: String,
    pub t: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub n: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    pub times: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// `min(s, t)`
    pub target: Vec<Vec<f64>>,
    /// Largest `|cov - target| / stderr`; `None` if every stderr is zero.
    pub max_abs_z: Option<f64>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderSummary {
    pub sup_r_median: f64,
    pub sup_r_q90: f64,
    pub sup_r_max: f64,
    pub sup_r_tilde_median: f64,
    /// Replicates where `|R_n(t)| <= R~_n(t)` failed at some grid point.
    pub bound_violations: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalBoundSummary {
    pub p: f64,
    pub mean_sup: f64,
    pub stderr: Option<f64>,
    /// `C (n+1)^{1/p} E[U^p]^{1/p} / sqrt(n)`; `None` if the moment is infinite.
    pub bound: Option<f64>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSummary {
    pub increments: [f64; 4],
    pub corr: f64,
    pub stderr: f64,
    pub seed: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChangeSummary {
    /// Replicates with `L(n) > n`.
    pub exceed_count: usize,
    pub exceed_frequency: f64,
    pub seed: u64,
    #[serde(rename = "M")]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDiagnostics {
    pub n: u64,
    pub seed: u64,
    pub stream_path: Vec<u64>,
    #[serde(rename = "M")]
    pub replicates: usize,
    pub streamed: bool,
    pub ks: Vec<KsEntry>,
    pub covariance: Option<CovarianceSummary>,
    pub remainder: Option<RemainderSummary>,
    pub maximal_bound: Option<MaximalBoundSummary>,
    pub increments: Option<IncrementSummary>,
    pub time_change: Option<TimeChangeSummary>,
    /// Checks that were requested but could not run, with the reason.
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<PathEvaluation>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub toolkit_version: String,
    pub rng_algorithm: String,
    pub config: ExperimentConfig,
    pub law: LawSummary,
    pub hypotheses: Option<HypothesisFlag>,
    pub results: Vec<NDiagnostics>,
    pub assertions: Vec<Assertion>,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn all_assertions_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Copy with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_wall_clock(&self) -> Self {
        Self { wall_clock_seconds: 0.0, ..self.clone() }
    }

    /// Plain-text summary table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "renewal-ks {}  rng={}", self.toolkit_version, self.rng_algorithm);
        let _ = writeln!(
            out,
            "law {}  mean={}  var={}  C={}{}",
            self.law.label,
            fmt(self.law.mean),
            self.law.variance.map(fmt).unwrap_or_else(|| "inf".into()),
            fmt(self.law.kac_constant),
            if self.law.kac_constant_overridden { " (override)" } else { "" }
        );
        if let Some(h) = &self.hypotheses {
            let _ = writeln!(out, "moment check: {}", h.note);
        }
        let _ = writeln!(out, "seed {}  wall clock {:.2}s", self.config.seed, self.wall_clock_seconds);
        for r in &self.results {
            let _ = writeln!(out, "\n== n = {}  M = {}{}", r.n, r.replicates, if r.streamed { "  (streamed)" } else { "" });
            if !r.ks.is_empty() {
                let _ = writeln!(out, "  {:<8} {:>10} {:>10}", "t", "KS D", "p-value");
                for k in &r.ks {
                    let _ = writeln!(out, "  {:<8} {:>10.5} {:>10.4}", k.t, k.statistic, k.p_value);
                }
            }
            if let Some(c) = &r.covariance {
                let _ = writeln!(out, "  covariance vs min(s,t): max |z| = {}", c.max_abs_z.map(fmt).unwrap_or_else(|| "n/a".into()));
                for (i, row) in c.covariance.iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:>8.4}")).collect();
                    let _ = writeln!(out, "    t={:<6} {}", c.times[i], cells.join(" "));
                }
            }
            if let Some(rem) = &r.remainder {
                let _ = writeln!(
                    out,
                    "  sup|R_n|: median {:.5}  q90 {:.5}  max {:.5}; bound violations {}",
                    rem.sup_r_median, rem.sup_r_q90, rem.sup_r_max, rem.bound_violations
                );
            }
            if let Some(mb) = &r.maximal_bound {
                let _ = writeln!(
                    out,
                    "  E[sup R~~_n] ~ {:.5}  bound(p={}) {}",
                    mb.mean_sup,
                    mb.p,
                    mb.bound.map(fmt).unwrap_or_else(|| "inf".into())
                );
            }
            if let Some(inc) = &r.increments {
                let _ = writeln!(out, "  increment corr {:.5} (se {:.5})", inc.corr, inc.stderr);
            }
            if let Some(tc) = &r.time_change {
                let _ = writeln!(out, "  L(n) > n in {} of {} replicates ({:.4})", tc.exceed_count, tc.replicates, tc.exceed_frequency);
            }
            for s in &r.skipped {
                let _ = writeln!(out, "  skipped: {s}");
            }
        }
        if !self.assertions.is_empty() {
            let _ = writeln!(out);
            for a in &self.assertions {
                let _ = writeln!(out, "[{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
        }
        out
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}
