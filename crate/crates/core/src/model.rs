//! Model parameters and the constants derived from them: the fixed point `b`
//! of `x = β f(x)`, the limiting variance `B²`, the pair contraction rate `λ`
//! and the cap on `|W - W'|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::SpinConfiguration;
use crate::special::{bessel_ratio, deriv_from_ratio};

/// Width of the band above `β = N` in which results are flagged as near-critical.
pub const NEAR_CRITICAL_BAND: f64 = 0.1;

const SOLVE_MAX_ITER: usize = 200;

/// One model instance: spin dimension `N`, inverse temperature `β`, sites `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub beta: f64,
    pub n: usize,
}

impl ModelParams {
    /// Validates `N >= 2`, `n >= 1` and the supercritical condition `β > N`.
    pub fn new(dim: usize, beta: f64, n: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter(format!("spin dimension N = {dim} must be >= 2")));
        }
        if n == 0 {
            return Err(Error::Parameter("system size n must be >= 1".into()));
        }
        if !(beta > dim as f64) || !beta.is_finite() {
            return Err(Error::Parameter(format!(
                "beta = {beta} must exceed N = {dim}: no positive fixed point"
            )));
        }
        Ok(Self { dim, beta, n })
    }

    pub fn near_critical(&self) -> bool {
        self.beta <= self.dim as f64 + NEAR_CRITICAL_BAND
    }
}

/// Quantities solved once per `(N, β, n)`. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub params: ModelParams,
    /// Positive root of `x - β f(x)`.
    pub b: f64,
    /// `f(b)`, equal to `b/β` up to the solver residual.
    pub f_b: f64,
    pub f_prime_b: f64,
    /// Variance of the normal limit of `W_n`.
    pub b2: f64,
    /// `(1 - β f'(b)) / n`.
    pub lambda: f64,
    /// `4β² / (b² √n)`, the almost-sure bound on `|W - W'|`.
    pub delta_cap: f64,
}

impl DerivedConstants {
    pub fn new(params: ModelParams) -> Result<Self> {
        let ModelParams { dim, beta, n } = params;
        let b = solve_b(dim, beta)?;
        let f_b = bessel_ratio(b, dim)?;
        let f_prime_b = deriv_from_ratio(b, dim, f_b);
        let b2 = variance_b2(dim, beta, b)?;
        let lambda = lambda_from(beta, f_prime_b, n)?;
        Ok(Self {
            params,
            b,
            f_b,
            f_prime_b,
            b2,
            lambda,
            delta_cap: delta_cap(beta, b, n),
        })
    }

    /// `B = √B²`.
    pub fn b_std(&self) -> f64 {
        self.b2.sqrt()
    }

    /// `W_n` from a squared total-spin length.
    pub fn w_from_norm2(&self, norm2: f64) -> f64 {
        let n = self.params.n as f64;
        let beta = self.params.beta;
        n.sqrt() * (beta * beta * norm2 / (n * n * self.b * self.b) - 1.0)
    }

    /// `|S_n|` at which `W_n = 0`, i.e. `n b / β`.
    pub fn typical_radius(&self) -> f64 {
        self.params.n as f64 * self.b / self.params.beta
    }
}

/// Unique positive solution of `x = β f(x)` for `β > N`.
///
/// Brackets the root by doubling (or halving) from `x = 1` on the sign of
/// `x - β f(x)`, then refines with Newton steps that fall back to bisection
/// whenever they would leave the bracket.
pub fn solve_b(dim: usize, beta: f64) -> Result<f64> {
    if dim < 2 || !(beta > dim as f64) || !beta.is_finite() {
        return Err(Error::Parameter(format!(
            "beta = {beta} must exceed N = {dim}: no positive fixed point"
        )));
    }
    let g = |x: f64| -> Result<f64> { Ok(x - beta * bessel_ratio(x, dim)?) };

    let (mut lo, mut hi);
    if g(1.0)? < 0.0 {
        hi = 2.0;
        while g(hi)? < 0.0 {
            hi *= 2.0;
        }
        lo = 0.5 * hi;
    } else {
        lo = 0.5;
        let mut halvings = 0;
        while g(lo)? >= 0.0 {
            lo *= 0.5;
            halvings += 1;
            if halvings > 1000 {
                return Err(Error::numerical("model_constants", "could not bracket fixed point"));
            }
        }
        hi = 2.0 * lo;
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..SOLVE_MAX_ITER {
        let f = bessel_ratio(x, dim)?;
        let gx = x - beta * f;
        if gx.abs() <= 1e-15 * x.max(1.0) {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = 1.0 - beta * deriv_from_ratio(x, dim, f);
        let newton = x - gx / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numerical(
        "model_constants",
        format!("fixed point for N = {dim}, beta = {beta} did not converge in {SOLVE_MAX_ITER} iterations"),
    ))
}

/// Limiting variance
/// `B² = 4β² / ((1 - β f'(b)) b²) · [1 - (N-1) f(b)/b - f(b)²]`.
///
/// The bracket is evaluated with `f(b) = b/β` and cross-checked against
/// `f'(b)` computed from the Bessel ratio; the two must agree to `1e-10`.
pub fn variance_b2(dim: usize, beta: f64, b: f64) -> Result<f64> {
    let f_b = bessel_ratio(b, dim)?;
    let f_prime = deriv_from_ratio(b, dim, f_b);
    let m = dim as f64 - 1.0;
    let on_fixed_point = b / beta;
    let bracket = 1.0 - m * on_fixed_point / b - on_fixed_point * on_fixed_point;
    let contraction = 1.0 - beta * f_prime;
    let prefactor = 4.0 * beta * beta / (contraction * b * b);
    let b2 = prefactor * bracket;
    let b2_identity = prefactor * f_prime;
    if !(b2 > 0.0) || !b2.is_finite() || !(contraction > 0.0) {
        return Err(Error::consistency(
            "model_constants",
            format!("B^2 = {b2} with 1 - beta f'(b) = {contraction}: b = {b} is not a valid fixed point"),
        ));
    }
    if ((b2 - b2_identity) / b2).abs() > 1e-10 {
        return Err(Error::consistency(
            "model_constants",
            format!("B^2 bracket form {b2} disagrees with f'(b) form {b2_identity}"),
        ));
    }
    Ok(b2)
}

fn lambda_from(beta: f64, f_prime_b: f64, n: usize) -> Result<f64> {
    let lambda = (1.0 - beta * f_prime_b) / n as f64;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::consistency(
            "model_constants",
            format!("lambda = {lambda} outside (0, 1)"),
        ));
    }
    Ok(lambda)
}

/// `λ = (1 - β f'(b)) / n`, checked to lie in `(0, 1)`.
pub fn pair_lambda(params: &ModelParams, derived: &DerivedConstants) -> Result<f64> {
    lambda_from(params.beta, derived.f_prime_b, params.n)
}

pub fn delta_cap(beta: f64, b: f64, n: usize) -> f64 {
    4.0 * beta * beta / (b * b * (n as f64).sqrt())
}

/// `H_n(σ) = -|S_n|² / (2n)` from the cached total spin.
pub fn hamiltonian(config: &SpinConfiguration) -> f64 {
    -config.total_norm2() / (2.0 * config.n() as f64)
}

/// `W_n = √n (β² |S_n|² / (n² b²) - 1)`.
pub fn w_statistic(config: &SpinConfiguration, derived: &DerivedConstants) -> f64 {
    derived.w_from_norm2(config.total_norm2())
}
