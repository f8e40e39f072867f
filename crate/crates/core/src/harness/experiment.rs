use std::time::Instant;

use rayon::prelude::*;

use super::config::{Check, ExperimentConfig};
use super::report::*;
use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};
use crate::kac_stroock::{
    evaluate_points, evaluate_points_streaming, r_tilde_tilde_sup, KacProcessParams,
    PathEvaluation, PointValue,
};
use crate::renewal::simulate_path_capped;
use crate::rng::{RngStream, ALGORITHM_ID};
use crate::stats::{
    covariance_grid, empirical_moments, increment_independence_check, ks_test, normal_cdf,
    sup_norm_stats, PathField, SampleSet, MIN_KS_SAMPLES,
};

pub const THREADS_ENV: &str = "RENEWAL_KS_THREADS";

/// Stream for replicate `r` at scale `n`: path `[n, r]` below the seed.
/// Child 0 drives the renewal path, child 1 the maximal-term draws.
pub fn replicate_stream(seed: u64, n: u64, r: u64) -> RngStream {
    RngStream::at_path(seed, vec![n, r])
}

#[derive(Debug, Clone)]
struct ReplicateOutcome {
    eval: PathEvaluation,
    count_at_n: usize,
    sup_r_tilde: f64,
    bound_holds: bool,
    sup_r_tilde_tilde: Option<f64>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    law: &'a InterArrivalLaw,
    params: KacProcessParams,
    times: &'a [f64],
}

fn run_replicate(ctx: &Context, r: u64) -> Result<ReplicateOutcome> {
    let n = ctx.params.n();
    let stream = replicate_stream(ctx.cfg.seed, n, r);
    let mut path_stream = stream.child(0);
    let streamed = n > ctx.cfg.streaming_threshold;
    let points: Vec<PointValue> = if streamed {
        evaluate_points_streaming(ctx.law, &ctx.params, ctx.times, &mut path_stream, ctx.cfg.max_events)?
    } else {
        let path = simulate_path_capped(ctx.law, n as f64, &mut path_stream, ctx.cfg.max_events)?;
        evaluate_points(&path, &ctx.params, ctx.times)?
    };
    let count_at_n = points.last().map(|p| p.count).unwrap_or(0);
    let bound_holds = points.iter().all(|p| p.r.abs() <= p.r_tilde);
    let sup_r_tilde = points.iter().fold(0.0, |acc: f64, p| acc.max(p.r_tilde));

    let sup_r_tilde_tilde = if ctx.cfg.has(Check::MaximalBound) {
        let mut s = stream.child(1);
        let sampler = ctx.law.sampler();
        let draws = n + 1;
        if streamed {
            let max = (0..draws).map(|_| sampler.draw(&mut s)).fold(0.0, f64::max);
            Some(ctx.params.amplitude() * max)
        } else {
            let us: Vec<f64> = (0..draws).map(|_| sampler.draw(&mut s)).collect();
            Some(r_tilde_tilde_sup(&us, &ctx.params)?)
        }
    } else {
        None
    };

    Ok(ReplicateOutcome {
        eval: PathEvaluation::from_points(&points),
        count_at_n,
        sup_r_tilde,
        bound_holds,
        sup_r_tilde_tilde,
    })
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV}={raw} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(e.to_string()))
}

/// Runs every configured diagnostic for each `n`. The report depends only
/// on the config (wall-clock aside), not on thread count or scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let law = &config.law;
    let (mean, variance) = law.moments();
    let kac_constant = match config.kac_constant {
        Some(c) => c,
        None => law.kac_constant()?,
    };
    let law_summary = LawSummary {
        label: law.label(),
        mean,
        variance: variance.is_finite().then_some(variance),
        kac_constant,
        kac_constant_overridden: config.kac_constant.is_some(),
    };

    let hypotheses = match config.moment_p {
        Some(p) => {
            let certificate = law.certificate(p)?;
            let within = certificate.within_hypotheses();
            let note = if within {
                format!("E[U^{p}] finite: within theorem hypotheses")
            } else {
                format!("E[U^{p}] infinite: outside theorem hypotheses")
            };
            Some(HypothesisFlag { certificate, within_hypotheses: within, note })
        }
        None => None,
    };

    let times = config.evaluation_times();
    let run_all = || -> Result<Vec<NDiagnostics>> {
        config
            .n_values
            .iter()
            .map(|&n| {
                let params = KacProcessParams::new(n, kac_constant)?;
                let ctx = Context { cfg: config, law, params, times: &times };
                let outcomes = (0..config.replicates as u64)
                    .into_par_iter()
                    .map(|r| run_replicate(&ctx, r))
                    .collect::<Result<Vec<_>>>()?;
                diagnostics_for(&ctx, outcomes)
            })
            .collect()
    };
    let results = match worker_pool()? {
        Some(pool) => pool.install(run_all)?,
        None => run_all()?,
    };

    let mut assertions = Vec::new();
    if let Some(h) = &hypotheses {
        assertions.push(Assertion {
            name: "moment_condition".into(),
            passed: h.within_hypotheses,
            detail: h.note.clone(),
        });
    }
    for r in &results {
        assertions.extend(assertions_for(config, r));
    }

    Ok(ExperimentReport {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        rng_algorithm: ALGORITHM_ID.to_string(),
        config: config.clone(),
        law: law_summary,
        hypotheses,
        results,
        assertions,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

fn diagnostics_for(ctx: &Context, outcomes: Vec<ReplicateOutcome>) -> Result<NDiagnostics> {
    let cfg = ctx.cfg;
    let n = ctx.params.n();
    let m = outcomes.len();
    let seed = cfg.seed;
    let mut skipped = Vec::new();
    let evals: Vec<PathEvaluation> = outcomes.iter().map(|o| o.eval.clone()).collect();

    let mut ks = Vec::new();
    if cfg.has(Check::KsMarginals) {
        if m < MIN_KS_SAMPLES {
            skipped.push(format!("ks_marginals: needs at least {MIN_KS_SAMPLES} replicates"));
        } else {
            for &t in &cfg.marginal_times {
                let idx = evals[0].index_of(t).expect("marginal times are evaluation points");
                let scale = t.sqrt();
                let values = evals.iter().map(|e| e.x_values[idx] / scale).collect();
                let label = format!("X_n({t})/sqrt({t}), n={n}");
                let set = SampleSet::new(values, label.clone())?;
                let res = ks_test(&set, normal_cdf)?;
                ks.push(KsEntry {
                    label,
                    t,
                    statistic: res.statistic,
                    p_value: res.p_value,
                    n,
                    replicates: m,
                    seed,
                });
            }
        }
    }

    let covariance = if cfg.has(Check::Covariance) {
        if m < 2 {
            skipped.push("covariance: needs at least 2 replicates".into());
            None
        } else {
            let grid = covariance_grid(&evals, &cfg.covariance_times)?;
            let target: Vec<Vec<f64>> = grid
                .times
                .iter()
                .map(|&s| grid.times.iter().map(|&t| s.min(t)).collect())
                .collect();
            let mut max_abs_z: Option<f64> = None;
            for i in 0..grid.times.len() {
                for j in 0..grid.times.len() {
                    let se = grid.stderr[i][j];
                    if se > 0.0 {
                        let z = (grid.covariance[i][j] - target[i][j]).abs() / se;
                        max_abs_z = Some(max_abs_z.map_or(z, |cur| cur.max(z)));
                    }
                }
            }
            Some(CovarianceSummary {
                times: grid.times,
                covariance: grid.covariance,
                stderr: grid.stderr,
                target,
                max_abs_z,
                seed,
                replicates: m,
            })
        }
    } else {
        None
    };

    let remainder = if cfg.has(Check::Remainder) {
        let sups = sup_norm_stats(&evals, PathField::R)?;
        let tilde = SampleSet::new(outcomes.iter().map(|o| o.sup_r_tilde).collect(), "sup R~")?;
        Some(RemainderSummary {
            sup_r_median: sups.median(),
            sup_r_q90: sups.quantile(0.9),
            sup_r_max: sups.quantile(1.0),
            sup_r_tilde_median: tilde.median(),
            bound_violations: outcomes.iter().filter(|o| !o.bound_holds).count(),
            seed,
            replicates: m,
        })
    } else {
        None
    };

    let maximal_bound = if cfg.has(Check::MaximalBound) {
        let p = cfg.moment_p.unwrap_or(3.0);
        let sups: Vec<f64> = outcomes.iter().filter_map(|o| o.sup_r_tilde_tilde).collect();
        let set = SampleSet::new(sups, "sup R~~")?;
        let (mean_sup, stderr) = match empirical_moments(&set) {
            Ok(mo) => (mo.mean, Some(mo.stderr_mean)),
            Err(_) => (set.values[0], None),
        };
        let bound = ctx.law.pth_moment(p)?.value().map(|mp| {
            ctx.params.c() * ((n + 1) as f64).powf(1.0 / p) * mp.powf(1.0 / p) / (n as f64).sqrt()
        });
        Some(MaximalBoundSummary { p, mean_sup, stderr, bound, seed, replicates: m })
    } else {
        None
    };

    let increments = if cfg.has(Check::Increments) {
        let [s1, t1, s2, t2] = cfg.increments;
        match increment_independence_check(&evals, (s1, t1, s2, t2)) {
            Ok(ic) => Some(IncrementSummary {
                increments: cfg.increments,
                corr: ic.corr,
                stderr: ic.stderr,
                seed,
                replicates: m,
            }),
            Err(e @ (Error::TooFewSamples { .. } | Error::InvalidParameter(_))) => {
                skipped.push(format!("increments: {e}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let time_change = if cfg.has(Check::TimeChange) {
        let exceed_count = outcomes.iter().filter(|o| o.count_at_n as u64 > n).count();
        Some(TimeChangeSummary {
            exceed_count,
            exceed_frequency: exceed_count as f64 / m as f64,
            seed,
            replicates: m,
        })
    } else {
        None
    };

    Ok(NDiagnostics {
        n,
        seed,
        stream_path: vec![n],
        replicates: m,
        streamed: n > cfg.streaming_threshold,
        ks,
        covariance,
        remainder,
        maximal_bound,
        increments,
        time_change,
        skipped,
        paths: cfg.emit_paths.then_some(evals),
    })
}

fn assertions_for(cfg: &ExperimentConfig, r: &NDiagnostics) -> Vec<Assertion> {
    let th = &cfg.thresholds;
    let mut out = Vec::new();
    for k in &r.ks {
        out.push(Assertion {
            name: format!("ks n={} t={}", r.n, k.t),
            passed: k.p_value > th.ks_p_min,
            detail: format!("p = {:.4} (need > {})", k.p_value, th.ks_p_min),
        });
    }
    if let Some(c) = &r.covariance {
        if let Some(z) = c.max_abs_z {
            out.push(Assertion {
                name: format!("covariance n={}", r.n),
                passed: z <= th.covariance_sigmas,
                detail: format!("max |z| = {:.3} (need <= {})", z, th.covariance_sigmas),
            });
        }
    }
    if let Some(rem) = &r.remainder {
        out.push(Assertion {
            name: format!("remainder bound n={}", r.n),
            passed: rem.bound_violations == 0,
            detail: format!("{} violating replicates", rem.bound_violations),
        });
    }
    if let Some(mb) = &r.maximal_bound {
        if let Some(bound) = mb.bound {
            out.push(Assertion {
                name: format!("maximal term n={}", r.n),
                passed: mb.mean_sup <= bound,
                detail: format!("mean sup {:.5} vs bound {:.5}", mb.mean_sup, bound),
            });
        }
    }
    if let Some(inc) = &r.increments {
        out.push(Assertion {
            name: format!("increments n={}", r.n),
            passed: inc.corr.abs() <= th.increment_sigmas * inc.stderr,
            detail: format!("corr {:.4}, limit {:.4}", inc.corr, th.increment_sigmas * inc.stderr),
        });
    }
    out
}
