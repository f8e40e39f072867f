//! Reduction of the alternating sums to an ordinary random walk.
//!
//! Pairs `D_j = U_{2j-1} - U_{2j}` are i.i.d., centered, with second moment
//! `2 Var(U_1)`, so `B_n(t) = n^{-1/2} sum_{j<=[nt]} D_j` is a Donsker walk.
//! Everything here reuses the inter-arrival draws of a renewal path, so the
//! identities between these processes hold pathwise.

use crate::error::{Error, Result};
use crate::kac_stroock::{floor_scaled, KacProcessParams};
use crate::renewal::{CompensatedSum, RenewalPath};

#[derive(Debug, Clone, PartialEq)]
pub struct PairedDifferenceSeq {
    diffs: Vec<f64>,
    // partial sums P_0..P_len
    prefix: Vec<f64>,
    source_count: usize,
}

impl PairedDifferenceSeq {
    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    /// Number of inter-arrival draws consumed (always even).
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// `sum_{j<=k} D_j`.
    pub fn partial_sum(&self, k: usize) -> Result<f64> {
        self.prefix
            .get(k)
            .copied()
            .ok_or(Error::InsufficientDraws { needed: 2 * k, available: self.source_count })
    }
}

/// `D_j = U_{2j-1} - U_{2j}`; a trailing unpaired draw is ignored.
pub fn paired_differences(inter_arrivals: &[f64]) -> Result<PairedDifferenceSeq> {
    if inter_arrivals.len() < 2 {
        return Err(Error::InsufficientDraws { needed: 2, available: inter_arrivals.len() });
    }
    let diffs: Vec<f64> = inter_arrivals.chunks_exact(2).map(|p| p[0] - p[1]).collect();
    let mut prefix = Vec::with_capacity(diffs.len() + 1);
    prefix.push(0.0);
    let mut acc = CompensatedSum::default();
    for &d in &diffs {
        acc.add(d);
        prefix.push(acc.value());
    }
    let source_count = 2 * diffs.len();
    Ok(PairedDifferenceSeq { diffs, prefix, source_count })
}

fn check_unit_time(t: f64) -> Result<()> {
    if t.is_finite() && (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must lie in [0,1], got {t}")))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `B_n(t) = n^{-1/2} sum_{j<=[nt]} D_j`.
pub fn random_walk(diffs: &PairedDifferenceSeq, n: u64, t: f64) -> Result<f64> {
    check_n(n)?;
    check_unit_time(t)?;
    let k = floor_scaled(n, t) as usize;
    Ok(diffs.partial_sum(k)? / (n as f64).sqrt())
}

/// `Psi_n(t) = [nt] / (2n)`, within `1/(2n)` of `t/2`.
pub fn psi_n(n: u64, t: f64) -> Result<f64> {
    check_n(n)?;
    check_unit_time(t)?;
    Ok(floor_scaled(n, t) as f64 / (2 * n) as f64)
}

fn deterministic_index(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<usize> {
    check_unit_time(t)?;
    let m = floor_scaled(params.n(), t) as usize;
    if m > path.inter_arrivals().len() {
        return Err(Error::InsufficientDraws { needed: m, available: path.inter_arrivals().len() });
    }
    Ok(m)
}

/// `(C/sqrt n) sum_{j<=[nt]} (-1)^(j-1) U_j` at the deterministic index `[nt]`.
pub fn w_tilde(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    let m = deterministic_index(path, params, t)?;
    Ok(params.amplitude() * path.alternating_prefix()[m])
}

/// `n^{-1/2} sum_{j<=[[nt]/2]} D_j`, the pair part without the constant `C`.
pub fn w_tilde_tilde(path: &RenewalPath, n: u64, t: f64) -> Result<f64> {
    check_n(n)?;
    check_unit_time(t)?;
    let m = floor_scaled(n, t) as usize;
    let pairs = m / 2;
    if pairs == 0 {
        return Ok(0.0);
    }
    let seq = paired_differences(&path.inter_arrivals()[..2 * pairs.min(path.inter_arrivals().len() / 2)])?;
    Ok(seq.partial_sum(pairs)? / (n as f64).sqrt())
}

/// Splits `w_tilde` into the paired-difference sum and the unpaired last
/// term `C (1 - (-1)^[nt]) / (2 sqrt n) U_[nt]`.
pub fn w_tilde_split(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<(f64, f64)> {
    let m = deterministic_index(path, params, t)?;
    let pair_part = params.c() * w_tilde_tilde(path, params.n(), t)?;
    let boundary_part = if m % 2 == 1 {
        params.amplitude() * path.inter_arrivals()[m - 1]
    } else {
        0.0
    };
    Ok((pair_part, boundary_part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::InterArrivalLaw;
    use crate::kac_stroock::uniform_grid;
    use crate::renewal::simulate_path;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn path_of(us: Vec<f64>) -> RenewalPath {
        let total: f64 = us[..us.len() - 1].iter().sum();
        RenewalPath::from_inter_arrivals(us, total.max(1e-9)).unwrap()
    }

    #[test]
    fn pair_examples() {
        assert_eq!(paired_differences(&[3.0, 1.0, 2.0, 2.0]).unwrap().diffs(), &[2.0, 0.0]);
        let odd = paired_differences(&[1.0; 5]).unwrap();
        assert_eq!(odd.diffs(), &[0.0, 0.0]);
        assert_eq!(odd.source_count(), 4);
        assert!(matches!(paired_differences(&[1.0]), Err(Error::InsufficientDraws { .. })));
        let fwd = paired_differences(&[1.0, 4.0, 2.5, 0.5]).unwrap();
        let rev = paired_differences(&[4.0, 1.0, 0.5, 2.5]).unwrap();
        assert!(fwd.diffs().iter().zip(rev.diffs()).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn random_walk_examples() {
        let d = paired_differences(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(random_walk(&d, 2, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(random_walk(&d, 2, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(random_walk(&d, 3, 1.0).is_err());
    }

    #[test]
    fn w_tilde_examples() {
        let p = path_of(vec![1.0, 3.0, 9.0]);
        let params = KacProcessParams::new(2, 1.0).unwrap();
        assert_eq!(w_tilde(&p, &params, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(w_tilde(&p, &params, 1.0).unwrap(), -(2f64.sqrt()), epsilon = 1e-15);

        let p = path_of(vec![1.0, 3.0, 5.0, 1.0]);
        let params = KacProcessParams::new(3, 1.0).unwrap();
        let (pair, boundary) = w_tilde_split(&p, &params, 1.0).unwrap();
        assert_abs_diff_eq!(pair, -2.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(boundary, 5.0 / 3f64.sqrt(), epsilon = 1e-15);
        // [nt] = 2 even: no boundary term
        let (_, boundary) = w_tilde_split(&p, &params, 0.7).unwrap();
        assert_eq!(boundary, 0.0);
        // [nt] = 1: empty pair sum
        let (pair, _) = w_tilde_split(&p, &params, 0.34).unwrap();
        assert_eq!(pair, 0.0);
        let short = KacProcessParams::new(10, 1.0).unwrap();
        assert!(matches!(w_tilde(&p, &short, 1.0), Err(Error::InsufficientDraws { .. })));
    }

    #[test]
    fn psi_bound() {
        assert_eq!(psi_n(4, 1.0).unwrap(), 0.5);
        assert_eq!(psi_n(4, 0.0).unwrap(), 0.0);
        for n in [1u64, 10, 100] {
            let bound = 1.0 / (2 * n) as f64;
            for i in 0..=100_000u64 {
                let t = i as f64 / 100_000.0;
                assert!((psi_n(n, t).unwrap() - t / 2.0).abs() <= bound);
            }
        }
        assert!(psi_n(0, 0.5).is_err());
        assert!(psi_n(3, 1.5).is_err());
    }

    #[test]
    fn b_n_variance_matches_twice_variance() {
        let law = InterArrivalLaw::uniform(0.0, 1.0).unwrap();
        let n = 200u64;
        let m = 4000;
        let root = RngStream::new(21);
        let values: Vec<f64> = (0..m)
            .map(|r| {
                let mut s = root.child(r);
                let us: Vec<f64> = (0..2 * n).map(|_| law.sample(&mut s)).collect();
                random_walk(&paired_differences(&us).unwrap(), n, 1.0).unwrap()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        // sd of a sample variance of near-normal data is ~ var * sqrt(2/m)
        let target = 2.0 / 12.0;
        assert!((var - target).abs() < 4.0 * target * (2.0 / m as f64).sqrt(), "var {var}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_and_composition(seed in any::<u64>(), n in 1u64..400) {
            let law = InterArrivalLaw::gamma(1.5, 0.5).unwrap();
            // horizon 2n/mu gives ample draws for every [nt] <= n
            let path = simulate_path(&law, 2.0 * n as f64 / law.mean() + 10.0, &mut RngStream::new(seed)).unwrap();
            let params = KacProcessParams::for_law(&law, n).unwrap();
            let diffs = paired_differences(path.inter_arrivals()).unwrap();
            let max_u = path.inter_arrivals()[..n as usize].iter().copied().fold(0.0, f64::max);
            for t in uniform_grid(128) {
                let w = w_tilde(&path, &params, t).unwrap();
                let (pair, boundary) = w_tilde_split(&path, &params, t).unwrap();
                prop_assert!((pair + boundary - w).abs() <= 1e-12 * (1.0 + w.abs()));
                prop_assert!(boundary <= params.amplitude() * max_u);
                let wtt = w_tilde_tilde(&path, n, t).unwrap();
                let composed = random_walk(&diffs, n, psi_n(n, t).unwrap()).unwrap();
                prop_assert_eq!(wtt, composed);
                prop_assert!((pair / params.c() - wtt).abs() <= 1e-15 * (1.0 + wtt.abs()) * 4.0);
            }
        }
    }
}
