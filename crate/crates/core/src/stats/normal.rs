use statrs::function::erf::erfc;

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 * erfc(x / std::f64::consts::SQRT_2)
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// CDF of `N(0, variance)`.
pub fn normal_cdf_with_variance(x: f64, variance: f64) -> f64 {
    normal_cdf(x / variance.sqrt())
}
