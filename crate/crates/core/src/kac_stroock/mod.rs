//! Exact evaluation of the renewal Kac-Stroock process
//! `X_n(t) = C sqrt(n) \int_0^t (-1)^{L(nu)} du` and its decomposition.
//!
//! The integral is never approximated. With `L = L(nt)` it equals
//!
//! ```text
//! X_n(t) = (C/sqrt n) sum_{j<=L} (-1)^(j-1) U_j  +  (C/sqrt n) (-1)^L (nt - S_L)
//!        =            W_n(t)                     +           R_n(t)
//! ```
//!
//! and the alternating prefix sums are cached on the path, so each query
//! costs one binary search.

mod quadrature;
mod streaming;

pub use quadrature::evaluate_x_quadrature;
pub use streaming::evaluate_points_streaming;

use serde::{Deserialize, Serialize};

use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};
use crate::renewal::{CompensatedSum, RenewalPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KacProcessParams {
    n: u64,
    c: f64,
}

impl KacProcessParams {
    pub fn new(n: u64, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
        }
        Ok(Self { n, c })
    }

    /// Parameters with `C` taken from the law's moments.
    pub fn for_law(law: &InterArrivalLaw, n: u64) -> Result<Self> {
        Self::new(n, law.kac_constant()?)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `C / sqrt(n)`.
    pub fn amplitude(&self) -> f64 {
        self.c / (self.n as f64).sqrt()
    }

    /// `n * t` after validating `t`.
    fn scaled_time(&self, path: &RenewalPath, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
        }
        let nt = self.n as f64 * t;
        if nt > path.horizon() {
            return Err(Error::HorizonTooShort { needed: nt, horizon: path.horizon() });
        }
        Ok(nt)
    }
}

/// `floor(n t)`, decided by comparing `t` against the rounded rationals
/// `k/n`. Exact whenever `t` is itself a rounded rational `i/G` with
/// `nG` well below `2^52`, including the values produced by [`phi_n`] and
/// [`crate::donsker::psi_n`].
pub fn floor_scaled(n: u64, t: f64) -> u64 {
    if !(t > 0.0) {
        return 0;
    }
    let nf = n as f64;
    let mut k = (nf * t).floor() as u64;
    while k > 0 && (k as f64 / nf) > t {
        k -= 1;
    }
    while ((k + 1) as f64 / nf) <= t {
        k += 1;
    }
    k
}

/// Uniform grid `i/G`, `i = 0..=G`.
pub fn uniform_grid(size: usize) -> Vec<f64> {
    (0..=size).map(|i| i as f64 / size as f64).collect()
}

/// All quantities at one time point, from a single counting query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub t: f64,
    /// `L(nt)`
    pub count: usize,
    pub x: f64,
    pub w: f64,
    pub r: f64,
    pub r_tilde: f64,
}

fn point_from_parts(
    params: &KacProcessParams,
    t: f64,
    nt: f64,
    count: usize,
    alternating: f64,
    last_arrival: f64,
    next_gap: f64,
) -> PointValue {
    let a = params.amplitude();
    let sign = if count % 2 == 0 { 1.0 } else { -1.0 };
    let w = a * alternating;
    let r = a * sign * (nt - last_arrival);
    PointValue { t, count, x: w + r, w, r, r_tilde: a * next_gap }
}

pub fn evaluate_point(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<PointValue> {
    let nt = params.scaled_time(path, t)?;
    let count = path.count_at(nt)?;
    let next_gap = path
        .inter_arrival(count + 1)
        .ok_or(Error::HorizonTooShort { needed: nt, horizon: path.horizon() })?;
    Ok(point_from_parts(
        params,
        t,
        nt,
        count,
        path.alternating_prefix()[count],
        path.arrival(count),
        next_gap,
    ))
}

/// Evaluates at each of `times` (any order).
pub fn evaluate_points(
    path: &RenewalPath,
    params: &KacProcessParams,
    times: &[f64],
) -> Result<Vec<PointValue>> {
    times.iter().map(|&t| evaluate_point(path, params, t)).collect()
}

pub fn evaluate_x(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    Ok(evaluate_point(path, params, t)?.x)
}

/// `W_n(t) = (C/sqrt n) sum_{j<=L(nt)} (-1)^(j-1) U_j`.
pub fn w_component(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    Ok(evaluate_point(path, params, t)?.w)
}

/// `R_n(t) = (C/sqrt n) (-1)^L(nt) (nt - S_L(nt))`.
pub fn r_component(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    Ok(evaluate_point(path, params, t)?.r)
}

/// `(C/sqrt n) U_{L(nt)+1}`, which dominates `|R_n(t)|`.
pub fn r_tilde(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    Ok(evaluate_point(path, params, t)?.r_tilde)
}

/// `(C/sqrt n) U_{floor(ns)+1}` over a deterministic index.
pub fn r_tilde_tilde(inter_arrivals: &[f64], params: &KacProcessParams, s: f64) -> Result<f64> {
    let idx = floor_scaled(params.n, s) as usize;
    inter_arrivals
        .get(idx)
        .map(|u| params.amplitude() * u)
        .ok_or(Error::InsufficientDraws { needed: idx + 1, available: inter_arrivals.len() })
}

/// `sup_s (C/sqrt n) U_{floor(ns)+1} = (C/sqrt n) max_{i<=n+1} U_i`.
pub fn r_tilde_tilde_sup(inter_arrivals: &[f64], params: &KacProcessParams) -> Result<f64> {
    let needed = params.n as usize + 1;
    if inter_arrivals.len() < needed {
        return Err(Error::InsufficientDraws { needed, available: inter_arrivals.len() });
    }
    let max = inter_arrivals[..needed].iter().copied().fold(0.0, f64::max);
    Ok(params.amplitude() * max)
}

/// Random time change: `L(nt)/n` when `L(n) <= n`, otherwise `t/mu`.
/// The branch is fixed once per path.
#[derive(Debug, Clone)]
pub struct TimeChange<'a> {
    path: &'a RenewalPath,
    n: u64,
    mean: f64,
    counting_branch: bool,
}

impl<'a> TimeChange<'a> {
    /// `mu` is always the law's exact mean; no override is accepted.
    pub fn new(path: &'a RenewalPath, params: &KacProcessParams, law: &InterArrivalLaw) -> Result<Self> {
        let n = params.n;
        let total = params.scaled_time(path, 1.0)?;
        let count = path.count_at(total)?;
        Ok(Self { path, n, mean: law.mean(), counting_branch: count as u64 <= n })
    }

    /// Whether the event `L(n)/n <= 1` holds on this path.
    pub fn counting_branch(&self) -> bool {
        self.counting_branch
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(Error::InvalidParameter(format!("time change defined on [0,1], got {t}")));
        }
        if self.counting_branch {
            let count = self.path.count_at(self.n as f64 * t)?;
            Ok(count as f64 / self.n as f64)
        } else {
            Ok(t / self.mean)
        }
    }
}

pub fn phi_n(
    path: &RenewalPath,
    params: &KacProcessParams,
    law: &InterArrivalLaw,
    t: f64,
) -> Result<f64> {
    TimeChange::new(path, params, law)?.eval(t)
}

/// Values of `X_n`, `W_n`, `R_n` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEvaluation {
    pub grid: Vec<f64>,
    pub x_values: Vec<f64>,
    pub w_values: Vec<f64>,
    pub r_values: Vec<f64>,
}

impl PathEvaluation {
    pub fn from_points(points: &[PointValue]) -> Self {
        Self {
            grid: points.iter().map(|p| p.t).collect(),
            x_values: points.iter().map(|p| p.x).collect(),
            w_values: points.iter().map(|p| p.w).collect(),
            r_values: points.iter().map(|p| p.r).collect(),
        }
    }

    /// Index of `t` in the grid; exact match required.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.grid.iter().position(|&g| g == t)
    }

    /// CSV with columns `t,x,w,r`, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,w,r")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid[i], self.x_values[i], self.w_values[i], self.r_values[i]
            )?;
        }
        Ok(())
    }
}

pub fn evaluate_grid(
    path: &RenewalPath,
    params: &KacProcessParams,
    grid: &[f64],
) -> Result<PathEvaluation> {
    Ok(PathEvaluation::from_points(&evaluate_points(path, params, grid)?))
}

/// Both sides of the rescaling identity `X_n(t) = sqrt(rho mu) X~_n(t/(rho mu))`,
/// where `X~_n` is driven by the coupled draws `U_k/(rho mu)` and uses its
/// own normalizing constant.
pub fn scaled_coupling_check(
    path: &RenewalPath,
    law: &InterArrivalLaw,
    rho: f64,
    n: u64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0,1), got {rho}")));
    }
    let params = KacProcessParams::for_law(law, n)?;
    let lhs = evaluate_x(path, &params, t)?;

    let factor = rho * law.mean();
    let scaled_law = law.scaled(factor)?;
    let scaled_params = KacProcessParams::for_law(&scaled_law, n)?;
    let scaled_draws: Vec<f64> = path.inter_arrivals().iter().map(|u| u / factor).collect();
    let mut acc = CompensatedSum::default();
    scaled_draws.iter().for_each(|&u| acc.add(u));
    // the largest horizon the coupled draws still overshoot
    let last = acc.value();
    let horizon = f64::from_bits(last.to_bits() - 1);
    let scaled_path = RenewalPath::from_inter_arrivals(scaled_draws, horizon)?;
    let rhs = factor.sqrt() * evaluate_x(&scaled_path, &scaled_params, t / factor)?;
    Ok((lhs, rhs))
}
