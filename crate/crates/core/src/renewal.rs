//! Renewal paths and exact counting queries.
//!
//! A [`RenewalPath`] is materialized eagerly up to the first arrival that
//! strictly exceeds its horizon. Arrival times are kept as compensated
//! prefix sums because the parity `(-1)^L(t)` is discontinuous in them.

use std::io::Write;
use std::sync::OnceLock;

use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_MAX_EVENTS: u64 = 1_000_000_000;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug)]
pub struct RenewalPath {
    inter_arrivals: Vec<f64>,
    // S_1..S_K; S_0 = 0 is implicit
    arrivals: Vec<f64>,
    horizon: f64,
    // A_0..A_K with A_k = sum_{j<=k} (-1)^(j-1) U_j
    alternating: OnceLock<Vec<f64>>,
}

impl Clone for RenewalPath {
    fn clone(&self) -> Self {
        Self {
            inter_arrivals: self.inter_arrivals.clone(),
            arrivals: self.arrivals.clone(),
            horizon: self.horizon,
            alternating: OnceLock::new(),
        }
    }
}

impl PartialEq for RenewalPath {
    fn eq(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.inter_arrivals == other.inter_arrivals
    }
}

/// Draws `U_1, U_2, ...` until the running sum first strictly exceeds
/// `horizon`, keeping the overshooting draw.
pub fn simulate_path(
    law: &InterArrivalLaw,
    horizon: f64,
    stream: &mut RngStream,
) -> Result<RenewalPath> {
    simulate_path_capped(law, horizon, stream, DEFAULT_MAX_EVENTS)
}

pub fn simulate_path_capped(
    law: &InterArrivalLaw,
    horizon: f64,
    stream: &mut RngStream,
    max_events: u64,
) -> Result<RenewalPath> {
    check_horizon(horizon)?;
    let sampler = law.sampler();
    let expected = (horizon / law.mean()).min(max_events as f64).max(0.0) as usize + 16;
    let mut inter_arrivals = Vec::with_capacity(expected);
    let mut arrivals = Vec::with_capacity(expected);
    let mut acc = CompensatedSum::default();
    loop {
        if inter_arrivals.len() as u64 >= max_events {
            return Err(Error::RunawayPath { cap: max_events, horizon });
        }
        let u = sampler.draw(stream);
        acc.add(u);
        inter_arrivals.push(u);
        let s = acc.value();
        arrivals.push(s);
        if s > horizon {
            break;
        }
    }
    Ok(RenewalPath { inter_arrivals, arrivals, horizon, alternating: OnceLock::new() })
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")))
    }
}

impl RenewalPath {
    /// Builds a path from given inter-arrival times. The last arrival must
    /// strictly exceed `horizon` and all earlier ones must not.
    pub fn from_inter_arrivals(inter_arrivals: Vec<f64>, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if inter_arrivals.iter().any(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::InvalidParameter("inter-arrival times must be finite and >= 0".into()));
        }
        let mut acc = CompensatedSum::default();
        let arrivals: Vec<f64> = inter_arrivals
            .iter()
            .map(|&u| {
                acc.add(u);
                acc.value()
            })
            .collect();
        match arrivals.split_last() {
            Some((&last, rest)) if last > horizon && rest.iter().all(|&s| s <= horizon) => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "arrivals must end with exactly one arrival beyond horizon {horizon}"
                )))
            }
        }
        Ok(Self { inter_arrivals, arrivals, horizon, alternating: OnceLock::new() })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `U_1..U_K`, including the overshoot draw.
    pub fn inter_arrivals(&self) -> &[f64] {
        &self.inter_arrivals
    }

    /// `S_1..S_K`.
    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// `S_k` with `S_0 = 0`.
    pub fn arrival(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.arrivals[k - 1]
        }
    }

    /// `U_k`, 1-based.
    pub fn inter_arrival(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.inter_arrivals.get(i).copied())
    }

    /// `L(t)`: number of `k >= 1` with `S_k <= t`.
    pub fn count_at(&self, t: f64) -> Result<usize> {
        if !(t <= self.horizon) {
            return Err(Error::QueryBeyondHorizon { t, horizon: self.horizon });
        }
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("query time {t} is negative")));
        }
        Ok(self.arrivals.partition_point(|&s| s <= t))
    }

    pub fn parity_at(&self, t: f64) -> Result<i8> {
        Ok(if self.count_at(t)? % 2 == 0 { 1 } else { -1 })
    }

    /// Alternating prefix sums `A_0..A_K`, computed on first use.
    pub fn alternating_prefix(&self) -> &[f64] {
        self.alternating.get_or_init(|| {
            let mut out = Vec::with_capacity(self.inter_arrivals.len() + 1);
            out.push(0.0);
            let mut acc = CompensatedSum::default();
            for (j, &u) in self.inter_arrivals.iter().enumerate() {
                acc.add(if j % 2 == 0 { u } else { -u });
                out.push(acc.value());
            }
            out
        })
    }

    /// CSV dump with columns `k,U_k,S_k`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,U_k,S_k")?;
        for (i, (u, s)) in self.inter_arrivals.iter().zip(&self.arrivals).enumerate() {
            writeln!(out, "{},{:.16e},{:.16e}", i + 1, u, s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed_path() -> RenewalPath {
        RenewalPath::from_inter_arrivals(vec![0.5, 0.7, 1.8], 2.9).unwrap()
    }

    #[test]
    fn point_mass_path() {
        let law = InterArrivalLaw::point_mass(1.0).unwrap();
        let path = simulate_path(&law, 3.5, &mut RngStream::new(1)).unwrap();
        assert_eq!(path.arrivals(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(path.inter_arrivals().len(), 4);
        // arrival exactly at the horizon is not an overshoot
        let path = simulate_path(&law, 4.0, &mut RngStream::new(1)).unwrap();
        assert_eq!(path.len(), 5);
    }

    #[test]
    fn count_examples() {
        let p = fixed_path();
        assert_eq!(p.arrivals(), &[0.5, 1.2, 3.0]);
        assert_eq!(p.count_at(0.4).unwrap(), 0);
        assert_eq!(p.count_at(1.2).unwrap(), 2);
        assert_eq!(p.count_at(2.9).unwrap(), 2);
        assert_eq!(p.parity_at(0.0).unwrap(), 1);
        assert_eq!(p.parity_at(1.0).unwrap(), -1);
        assert_eq!(p.count_at(2.9).unwrap(), p.len() - 1);
    }

    #[test]
    fn query_beyond_horizon() {
        let p = fixed_path();
        assert!(matches!(p.count_at(2.95), Err(Error::QueryBeyondHorizon { .. })));
        assert!(p.count_at(f64::NAN).is_err());
    }

    #[test]
    fn simultaneous_arrivals_count_with_multiplicity() {
        let p = RenewalPath::from_inter_arrivals(vec![0.5, 0.0, 2.0], 1.0).unwrap();
        assert_eq!(p.count_at(0.6).unwrap(), 2);
        assert_eq!(p.parity_at(0.6).unwrap(), 1);
        assert_eq!(p.parity_at(0.5).unwrap(), 1);
    }

    #[test]
    fn atom_at_zero_law_simulates() {
        let law = InterArrivalLaw::atoms(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let p = simulate_path(&law, 50.0, &mut RngStream::new(5)).unwrap();
        assert!(p.arrivals().windows(2).all(|w| w[0] <= w[1]));
        assert!(p.inter_arrivals().iter().any(|&u| u == 0.0));
    }

    #[test]
    fn runaway_cap() {
        let law = InterArrivalLaw::atoms(vec![0.0, 1.0], vec![0.999, 0.001]).unwrap();
        let r = simulate_path_capped(&law, 1000.0, &mut RngStream::new(5), 1000);
        assert!(matches!(r, Err(Error::RunawayPath { cap: 1000, .. })));
    }

    #[test]
    fn invalid_construction() {
        assert!(RenewalPath::from_inter_arrivals(vec![0.5, 0.7], 2.0).is_err());
        assert!(RenewalPath::from_inter_arrivals(vec![3.0, 0.7], 2.0).is_err());
        assert!(RenewalPath::from_inter_arrivals(vec![-1.0, 4.0], 2.0).is_err());
        assert!(simulate_path(&InterArrivalLaw::exponential(1.0).unwrap(), 0.0, &mut RngStream::new(1)).is_err());
    }

    #[test]
    fn poisson_count_near_horizon() {
        let law = InterArrivalLaw::exponential(1.0).unwrap();
        let h = 1e6;
        let p = simulate_path(&law, h, &mut RngStream::new(11)).unwrap();
        let count = p.count_at(h).unwrap() as f64;
        assert!((count - h).abs() <= 4.0 * h.sqrt(), "count {count}");
    }

    #[test]
    fn compensated_prefix_is_accurate() {
        // 0.1 is not representable; naive summation drifts by ~1e-10 here
        let us = vec![0.1; 1_000_001];
        let p = RenewalPath::from_inter_arrivals(us, 100_000.0).unwrap();
        let exact = 0.1f64 * 1e6; // within an ulp of the true decimal sum
        assert!((p.arrival(1_000_000) - exact).abs() <= 4.0 * f64::EPSILON * exact);
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        fixed_path().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,U_k,S_k");
        assert_eq!(lines.len(), 4);
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields, vec![2.0, 0.7, 0.5 + 0.7]);
    }

    proptest! {
        #[test]
        fn sandwich_and_monotonicity(seed in any::<u64>(), horizon in 0.5f64..200.0, fracs in proptest::collection::vec(0.0f64..=1.0, 1..20)) {
            let law = InterArrivalLaw::gamma(0.7, 1.3).unwrap();
            let p = simulate_path(&law, horizon, &mut RngStream::new(seed)).unwrap();
            prop_assert!(*p.arrivals().last().unwrap() > horizon);
            let mut ts: Vec<f64> = fracs.iter().map(|f| f * horizon).collect();
            ts.sort_by(f64::total_cmp);
            let mut prev = 0;
            for t in ts {
                let l = p.count_at(t).unwrap();
                prop_assert!(p.arrival(l) <= t);
                prop_assert!(t < p.arrival(l + 1));
                prop_assert!(l >= prev);
                prev = l;
            }
            prop_assert_eq!(p.count_at(horizon).unwrap(), p.len() - 1);
        }

        #[test]
        fn seeded_paths_are_reproducible(seed in any::<u64>()) {
            let law = InterArrivalLaw::uniform(0.0, 2.0).unwrap();
            let a = simulate_path(&law, 30.0, &mut RngStream::new(seed)).unwrap();
            let b = simulate_path(&law, 30.0, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(a.inter_arrivals(), b.inter_arrivals());
        }
    }
}
