//! Reference value of `X_n(t)` by exact piecewise integration.
//!
//! Partitions `[0, t]` at the points `S_k / n` and sums signed segment
//! lengths directly. This never touches the alternating prefix sums, so it
//! serves as an independent check on the closed form.

use super::KacProcessParams;
use crate::error::{Error, Result};
use crate::renewal::{CompensatedSum, RenewalPath};

pub fn evaluate_x_quadrature(path: &RenewalPath, params: &KacProcessParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    let n = params.n() as f64;
    if n * t > path.horizon() {
        return Err(Error::HorizonTooShort { needed: n * t, horizon: path.horizon() });
    }
    let mut integral = CompensatedSum::default();
    let mut left = 0.0;
    let mut sign = 1.0;
    for &s in path.arrivals() {
        let right = s / n;
        if right > t {
            break;
        }
        integral.add(sign * (right - left));
        left = right;
        sign = -sign;
    }
    integral.add(sign * (t - left));
    Ok(params.c() * n.sqrt() * integral.value())
}
