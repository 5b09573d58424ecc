//! Standard normal distribution helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// `Φ(z)`, the standard normal CDF, through the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `Φ⁻¹(p)` for `p` in `(0, 1)`, polished with one Newton step.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let z = -SQRT_2 * erfc_inv(2.0 * p);
    let pdf = normal_pdf(z);
    if pdf > 0.0 {
        z - (normal_cdf(z) - p) / pdf
    } else {
        z
    }
}

/// Antiderivative of `Φ`: `G(x) = x Φ(x) + φ(x)`, with `G(-∞) = 0`.
pub fn normal_cdf_integral(x: f64) -> f64 {
    x * normal_cdf(x) + normal_pdf(x)
}
