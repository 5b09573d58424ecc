//! Bessel functions of the first kind `J_ν(x)` for the orders that occur as
//! `N/2 - 1`: non-negative integers and half-integers.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const ASYMPTOTIC_CUTOFF: f64 = 25.0;

/// `J_ν(x)` for `x >= 0` and `ν` a non-negative multiple of `1/2`.
///
/// Small arguments use the power series; half-integer orders start from the
/// closed forms for `J_{±1/2}`; integer orders use Miller's backward
/// recurrence up to `x = 25` and the Hankel asymptotic expansion beyond.
/// Upward recurrence is only applied where `x > ν`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(
        nu >= 0.0 && (2.0 * nu).fract() == 0.0,
        "bessel_j: order {nu} must be a non-negative multiple of 1/2"
    );
    assert!(x >= 0.0, "bessel_j: argument {x} must be >= 0");
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= nu.max(2.0) {
        return series(nu, x);
    }
    let half = nu.fract() != 0.0;
    let base = if half { 0.5 } else { 0.0 };
    if x > ASYMPTOTIC_CUTOFF {
        return upward(base, asymptotic(base, x), asymptotic(base + 1.0, x), nu, x);
    }
    if half {
        let s = (2.0 / (PI * x)).sqrt();
        let j_minus = s * x.cos();
        let j_half = s * x.sin();
        upward(-0.5, j_minus, j_half, nu, x)
    } else {
        miller(nu as usize, x)
    }
}

// Given J_{lo}, J_{lo+1}, recur upward to J_nu.
fn upward(lo: f64, j_lo: f64, j_next: f64, nu: f64, x: f64) -> f64 {
    if nu == lo {
        return j_lo;
    }
    let (mut prev, mut cur, mut order) = (j_lo, j_next, lo + 1.0);
    while order < nu {
        let next = 2.0 * order / x * cur - prev;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    cur
}

fn series(nu: f64, x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term = (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= y / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(order: usize, x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let (mut above, mut cur) = (0.0_f64, 1.0e-30_f64);
    let mut norm = 0.0;
    let mut result = if order == start { cur } else { 0.0 };
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        let m = k - 1;
        if m == order {
            result = cur;
        }
        if m > 0 && m % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    norm += cur;
    result / norm
}

fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term == 0.0 || term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spherical(x: f64) -> [f64; 3] {
        // J_{1/2}, J_{3/2}, J_{5/2}
        let s = (2.0 / (PI * x)).sqrt();
        let (sn, cs) = x.sin_cos();
        [
            s * sn,
            s * (sn / x - cs),
            s * ((3.0 / (x * x) - 1.0) * sn - 3.0 * cs / x),
        ]
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 19.0, 31.0, 120.0, 800.0] {
            let e = spherical(x);
            for (i, &want) in e.iter().enumerate() {
                let got = bessel_j(0.5 + i as f64, x);
                assert!((got - want).abs() < 1e-13, "nu={} x={x}: {got} vs {want}", 0.5 + i as f64);
            }
        }
    }

    #[test]
    fn integer_reference_values() {
        // Abramowitz & Stegun table values
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_6),
            (1.0, 1.0, 0.440_050_585_744_933_5),
            (0.0, 10.0, -0.245_935_764_451_348_3),
            (1.0, 10.0, 0.043_472_746_168_861_44),
            (2.0, 5.0, 0.046_565_116_277_752_22),
            (0.0, 30.0, -0.086_367_983_581_040_22),
            (1.0, 30.0, -0.118_751_062_616_623_7),
            (3.0, 2.0, 0.128_943_249_474_402_1),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(nu, x);
            assert!((got - want).abs() < 1e-13, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0.0, 2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn miller_and_asymptotic_agree_at_cutoff() {
        for nu in 0..4 {
            let a = miller(nu, ASYMPTOTIC_CUTOFF);
            let b = upward(0.0, asymptotic(0.0, 25.0), asymptotic(1.0, 25.0), nu as f64, 25.0);
            assert!((a - b).abs() < 1e-14, "nu={nu}: {a} vs {b}");
        }
    }
}
