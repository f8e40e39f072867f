//! Constant-memory evaluation for very large `n`.
//!
//! Walks the draws once, in the same order and with the same compensated
//! accumulators as [`crate::renewal::simulate_path`] followed by
//! [`super::evaluate_points`], so both routes return bit-identical values
//! for the same stream.

use super::{point_from_parts, KacProcessParams, PointValue};
use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};
use crate::renewal::CompensatedSum;
use crate::rng::RngStream;

/// `times` must be sorted ascending and lie in `[0, 1]`.
pub fn evaluate_points_streaming(
    law: &InterArrivalLaw,
    params: &KacProcessParams,
    times: &[f64],
    stream: &mut RngStream,
    max_events: u64,
) -> Result<Vec<PointValue>> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("streaming evaluation needs ascending times".into()));
    }
    if let Some(&t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!("time {t} outside [0,1]")));
    }
    let horizon = params.n() as f64;
    let sampler = law.sampler();
    let mut drawn: u64 = 0;
    let mut draw = |stream: &mut RngStream| -> Result<f64> {
        if drawn >= max_events {
            return Err(Error::RunawayPath { cap: max_events, horizon });
        }
        drawn += 1;
        Ok(sampler.draw(stream))
    };

    let mut arrivals = CompensatedSum::default();
    let mut alternating = CompensatedSum::default();
    let mut count = 0usize;
    let mut last_arrival = 0.0;
    // U_{count+1} and S_{count+1}
    let mut next_gap = draw(stream)?;
    arrivals.add(next_gap);
    let mut next_arrival = arrivals.value();

    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let nt = params.n() as f64 * t;
        while next_arrival <= nt {
            alternating.add(if count % 2 == 0 { next_gap } else { -next_gap });
            count += 1;
            last_arrival = next_arrival;
            next_gap = draw(stream)?;
            arrivals.add(next_gap);
            next_arrival = arrivals.value();
        }
        out.push(point_from_parts(
            params,
            t,
            nt,
            count,
            alternating.value(),
            last_arrival,
            next_gap,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kac_stroock::{evaluate_points, uniform_grid};
    use crate::renewal::simulate_path;

    #[test]
    fn matches_materialized_path_bit_for_bit() {
        let laws = [
            InterArrivalLaw::exponential(1.0).unwrap(),
            InterArrivalLaw::uniform(0.0, 1.0).unwrap(),
            InterArrivalLaw::atoms(vec![0.0, 1.0], vec![0.4, 0.6]).unwrap(),
        ];
        let grid = uniform_grid(257);
        for (i, law) in laws.iter().enumerate() {
            for n in [1u64, 17, 1000] {
                let params = KacProcessParams::for_law(law, n).unwrap();
                let path = simulate_path(law, n as f64, &mut RngStream::new(i as u64)).unwrap();
                let a = evaluate_points(&path, &params, &grid).unwrap();
                let b = evaluate_points_streaming(law, &params, &grid, &mut RngStream::new(i as u64), u64::MAX).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn rejects_unsorted_and_caps() {
        let law = InterArrivalLaw::exponential(1.0).unwrap();
        let params = KacProcessParams::for_law(&law, 100).unwrap();
        let mut s = RngStream::new(0);
        assert!(evaluate_points_streaming(&law, &params, &[0.5, 0.1], &mut s, 10).is_err());
        assert!(matches!(
            evaluate_points_streaming(&law, &params, &[1.0], &mut s, 10),
            Err(Error::RunawayPath { .. })
        ));
    }
}
