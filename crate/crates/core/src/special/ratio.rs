//! The modified Bessel ratio `f(x) = I_{N/2}(x) / I_{N/2-1}(x)` and the
//! derivative identities built on it.
//!
//! `f` is evaluated directly as a ratio through the Gauss continued fraction
//!
//! ```text
//! I_{ν+1}(x) / I_ν(x) = 1 / (2(ν+1)/x + 1 / (2(ν+2)/x + 1 / (2(ν+3)/x + ...)))
//! ```
//!
//! so neither Bessel function is ever formed on its own. Derivatives come from
//! the Riccati identity `f' = 1 - (N-1) f / x - f²` and its derivative.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_ratio`]. The continued fraction needs
/// on the order of `x` terms before its tail becomes negligible; past this
/// point evaluation is refused with [`Error::Overflow`].
pub const MAX_RATIO_ARGUMENT: f64 = 1.0e5;

/// Below this argument a three-term power series replaces the continued fraction.
pub const SERIES_CUTOFF: f64 = 1.0e-4;

const CF_TOLERANCE: f64 = 1.0e-16;
const CF_MAX_TERMS: usize = 4 * MAX_RATIO_ARGUMENT as usize + 1000;

fn check_args(func: &'static str, x: f64, dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::domain(func, format!("dimension N = {dim} must be >= 2")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(func, format!("argument x = {x} must be finite and > 0")));
    }
    if x > MAX_RATIO_ARGUMENT {
        return Err(Error::Overflow {
            func,
            arg: x,
            limit: MAX_RATIO_ARGUMENT,
        });
    }
    Ok(())
}

/// `f(x) = I_{N/2}(x) / I_{N/2-1}(x)` for `x > 0`, `N >= 2`.
pub fn bessel_ratio(x: f64, dim: usize) -> Result<f64> {
    check_args("bessel_ratio", x, dim)?;
    let nu = dim as f64 / 2.0 - 1.0;
    if x < SERIES_CUTOFF {
        return Ok(ratio_series(x, nu));
    }
    ratio_continued_fraction(x, nu)
}

// I_ν(x) = (x/2)^ν / Γ(ν+1) · Σ_k y^k / (k! (ν+1)_k), y = x²/4.
fn ratio_series(x: f64, nu: f64) -> f64 {
    let y = 0.25 * x * x;
    let sum = |mu: f64| 1.0 + y / (mu + 1.0) * (1.0 + y / (2.0 * (mu + 2.0)));
    0.5 * x / (nu + 1.0) * sum(nu + 1.0) / sum(nu)
}

// Modified Lentz evaluation of the Gauss continued fraction.
fn ratio_continued_fraction(x: f64, nu: f64) -> Result<f64> {
    const TINY: f64 = 1.0e-300;
    let inv_x = 1.0 / x;
    let mut h = TINY;
    let mut c = h;
    let mut d = 0.0;
    for k in 1..=CF_MAX_TERMS {
        let bk = 2.0 * (nu + k as f64) * inv_x;
        d += bk;
        if d == 0.0 {
            d = TINY;
        }
        c = bk + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < CF_TOLERANCE {
            return Ok(h);
        }
    }
    Err(Error::numerical(
        "special_functions",
        format!("continued fraction for f({x}) did not converge in {CF_MAX_TERMS} terms"),
    ))
}

/// `f'(x) = 1 - (N-1) f(x)/x - f(x)²`.
pub fn bessel_ratio_deriv(x: f64, dim: usize) -> Result<f64> {
    let f = bessel_ratio(x, dim)?;
    Ok(deriv_from_ratio(x, dim, f))
}

#[inline]
pub(crate) fn deriv_from_ratio(x: f64, dim: usize, f: f64) -> f64 {
    1.0 - (dim as f64 - 1.0) * f / x - f * f
}

/// `(x f(x))'' = 2 f'(x) + x f''(x)`, with `f''` obtained by differentiating
/// the Riccati identity.
pub fn g_second_deriv(x: f64, dim: usize) -> Result<f64> {
    Ok(RatioEval::new(x, dim)?.g_second)
}

/// `(f(x)/x)' = (f'(x) - f(x)/x) / x`.
pub fn ratio_over_x_deriv(x: f64, dim: usize) -> Result<f64> {
    Ok(RatioEval::new(x, dim)?.ratio_over_x_prime)
}

/// `f` and its derived quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEval {
    pub x: f64,
    pub dim: usize,
    pub f: f64,
    pub f_prime: f64,
    /// `(x f)''`
    pub g_second: f64,
    /// `(f/x)'`
    pub ratio_over_x_prime: f64,
}

impl RatioEval {
    pub fn new(x: f64, dim: usize) -> Result<Self> {
        let f = bessel_ratio(x, dim)?;
        let m = dim as f64 - 1.0;
        let f_prime = deriv_from_ratio(x, dim, f);
        let f_second = -f_prime * (m / x + 2.0 * f) + m * f / (x * x);
        Ok(Self {
            x,
            dim,
            f,
            f_prime,
            g_second: 2.0 * f_prime + x * f_second,
            ratio_over_x_prime: (f_prime - f / x) / x,
        })
    }
}

/// Slack tolerance used by [`verify_lemma_bounds`]: an inequality counts as
/// satisfied when its slack exceeds `-LEMMA_SLACK_TOLERANCE`.
pub const LEMMA_SLACK_TOLERANCE: f64 = 1.0e-12;

/// Worst slack observed for one inequality over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub min_slack: f64,
    /// Grid point where the minimum slack occurred.
    pub argmin: f64,
    pub pass: bool,
}

/// Outcome of checking all five inequalities for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub grid_points: usize,
    pub checks: Vec<BoundCheck>,
    pub pass: bool,
}

const BOUND_NAMES: [(&str, &str); 5] = [
    ("derivative_range", "0 < f'(x) < 1/(N-1)"),
    ("second_derivative", "|(x f(x))''| < 6"),
    ("ratio_slope", "-5/(N-1) < (f(x)/x)' < 0"),
    ("amos", "0 < f'(x) < f(x)/x"),
    ("nasell", "(1/x)(1 - N f(x)/x) > -4/(N-1)"),
];

fn slacks(e: &RatioEval) -> [f64; 5] {
    let m = e.dim as f64 - 1.0;
    let x = e.x;
    let f_over_x = e.f / x;
    [
        e.f_prime.min(1.0 / m - e.f_prime),
        6.0 - e.g_second.abs(),
        (-e.ratio_over_x_prime).min(e.ratio_over_x_prime + 5.0 / m),
        e.f_prime.min(f_over_x - e.f_prime),
        (1.0 - e.dim as f64 * f_over_x) / x + 4.0 / m,
    ]
}

/// Evaluates every inequality on `grid` and reports the minimum slack of each.
pub fn verify_lemma_bounds(dim: usize, grid: &[f64]) -> Result<BoundReport> {
    if grid.is_empty() {
        return Err(Error::domain("verify_lemma_bounds", "grid is empty"));
    }
    let mut worst = [(f64::INFINITY, f64::NAN); 5];
    for &x in grid {
        let eval = RatioEval::new(x, dim)?;
        for (w, s) in worst.iter_mut().zip(slacks(&eval)) {
            if s < w.0 || s.is_nan() {
                *w = (s, x);
            }
        }
    }
    let checks: Vec<BoundCheck> = BOUND_NAMES
        .iter()
        .zip(worst)
        .map(|(&(name, statement), (min_slack, argmin))| BoundCheck {
            name,
            statement,
            min_slack,
            argmin,
            pass: min_slack > -LEMMA_SLACK_TOLERANCE,
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(BoundReport {
        dim,
        grid_points: grid.len(),
        checks,
        pass,
    })
}

/// `count` log-spaced points covering `[lo, hi]` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| match i {
                    0 => lo,
                    _ if i + 1 == count => hi,
                    _ => (a + step * i as f64).exp(),
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(bessel_ratio(0.0, 3), Err(Error::Domain { .. })));
        assert!(matches!(bessel_ratio(-1.0, 3), Err(Error::Domain { .. })));
        assert!(matches!(bessel_ratio(f64::NAN, 3), Err(Error::Domain { .. })));
        assert!(matches!(bessel_ratio(1.0, 1), Err(Error::Domain { .. })));
        assert!(matches!(bessel_ratio(2.0e5, 3), Err(Error::Overflow { .. })));
    }

    #[test]
    fn small_argument_limit() {
        let f = bessel_ratio(1e-8, 5).unwrap();
        assert!((f / (1e-8 / 5.0) - 1.0).abs() < 1e-12);
        let fp = bessel_ratio_deriv(1e-7, 4).unwrap();
        assert!((fp - 0.25).abs() < 1e-10);
    }

    #[test]
    fn series_and_fraction_meet() {
        for dim in 2..=10 {
            let nu = dim as f64 / 2.0 - 1.0;
            let x = SERIES_CUTOFF;
            let s = ratio_series(x, nu);
            let c = ratio_continued_fraction(x, nu).unwrap();
            assert!((s / c - 1.0).abs() < 1e-14, "N={dim}: {s} vs {c}");
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_ratio(2.0, 3).unwrap() - 0.537_314_720_727_548).abs() < 1e-14);
        assert!((bessel_ratio(1.0, 2).unwrap() - 0.446_389_965_896_534_5).abs() < 1e-14);
        assert!((bessel_ratio(50.0, 3).unwrap() - 0.98).abs() < 1e-14);
        assert!((bessel_ratio_deriv(2.0, 3).unwrap() - 0.173_978_170_161_928_9).abs() < 1e-13);
        assert!((ratio_over_x_deriv(2.0, 3).unwrap() + 0.047_339_595_100_922_57).abs() < 1e-13);
    }

    #[test]
    fn g_second_near_zero() {
        let g = g_second_deriv(1e-6, 3).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-6);
        assert!(g_second_deriv(2.0, 3).unwrap().abs() < 6.0);
        assert!(g_second_deriv(100.0, 2).unwrap().abs() < 6.0);
    }

    #[test]
    fn lemma_report_single_point() {
        let r = verify_lemma_bounds(10, &[1.0]).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks.len(), 5);
        assert!(r.checks.iter().all(|c| c.min_slack > 0.0 && c.argmin == 1.0));
        assert!(verify_lemma_bounds(3, &[]).is_err());
        assert!(verify_lemma_bounds(3, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-6, 200.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[6], 200.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
