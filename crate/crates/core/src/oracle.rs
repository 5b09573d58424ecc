//! Exact law of `|S_n|` under the product measure and under the Gibbs tilt,
//! and the resulting Kolmogorov distance of `W_n/B` to the standard normal.
//!
//! The production route is a positive recursion on cell masses: adding one
//! uniform spin to a sum of length `ρ` gives length `s` with
//! `P(|S_{k+1}| <= s) = H_N((s² - ρ² - 1) / (2ρ))`, where `H_N` is the CDF of
//! the cosine between a fixed axis and a uniform point on `S^{N-1}`. Every
//! term is non-negative, so relative accuracy survives into the far tails
//! that the tilt `exp(βr²/(2n))` brings forward. The recursion carries a
//! linear pre-tilt `e^{αr}` (with `α = b` for Gibbs laws) so that the region
//! around `r = n b/β` never underflows.
//!
//! [`radial_density_hankel`] evaluates the same density by Hankel inversion
//! of `ψ_N(t)^n` and is kept as an independent check.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::DerivedConstants;
use crate::quadrature::integrate;
use crate::special::{bessel_j, normal_cdf};
use crate::sphere::{fill_uniform_sphere, sphere_area, VmfSampler};
use crate::stats::mean;

/// Default cells per unit length of `r`.
pub const DEFAULT_CELLS_PER_UNIT: usize = 100;

/// Largest `n` accepted by the oracle unless the caller raises it.
pub const DEFAULT_MAX_N: usize = 512;

/// Stop refining the Kolmogorov sup once it moves by less than this.
pub const SUP_REFINE_TOL: f64 = 1.0e-6;

// Masses below this fraction of the current maximum are dropped.
const MASS_FLOOR: f64 = 1.0e-250;

const SMALL_T: f64 = 1.0e-4;

/// `ψ_N(t) = Γ(N/2) (2/t)^{N/2-1} J_{N/2-1}(t)`, the characteristic function
/// of the uniform law on `S^{N-1}` as a function of the frequency length.
pub fn uniform_char_fn(t: f64, dim: usize) -> f64 {
    assert!(dim >= 2, "uniform_char_fn: N = {dim} must be >= 2");
    let t = t.abs();
    let nu = dim as f64 / 2.0 - 1.0;
    if t < SMALL_T {
        // 1 - t²/(2N) + t⁴/(8N(N+2))
        let n = dim as f64;
        let t2 = t * t;
        return 1.0 - t2 / (2.0 * n) + t2 * t2 / (8.0 * n * (n + 2.0));
    }
    if nu == 0.0 {
        return bessel_j(0.0, t);
    }
    gamma(nu + 1.0) * (2.0 / t).powf(nu) * bessel_j(nu, t)
}

/// CDF of `cos θ` for `θ` the angle to a fixed axis of a uniform point on
/// `S^{N-1}`, returned as `(P(cos θ <= u), P(cos θ > u))` so that both tails
/// keep full relative precision.
fn cosine_cdf(u: f64, dim: usize) -> (f64, f64) {
    let u = u.clamp(-1.0, 1.0);
    let upper = |v: f64| -> f64 {
        match dim {
            2 => v.clamp(-1.0, 1.0).acos() / PI,
            3 => 0.5 * (1.0 - v),
            _ => {
                let a = 0.5 * (dim as f64 - 1.0);
                beta_reg(a, a, (0.5 * (1.0 - v)).clamp(0.0, 1.0))
            }
        }
    };
    (upper(-u), upper(u))
}

// P(u_lo < cos θ <= u_hi)
fn cosine_mass(u_lo: f64, u_hi: f64, dim: usize) -> f64 {
    if u_hi <= u_lo {
        return 0.0;
    }
    if u_hi <= 0.0 {
        cosine_cdf(u_hi, dim).0 - cosine_cdf(u_lo, dim).0
    } else if u_lo >= 0.0 {
        cosine_cdf(u_lo, dim).1 - cosine_cdf(u_hi, dim).1
    } else {
        (1.0 - cosine_cdf(u_lo, dim).0 - cosine_cdf(u_hi, dim).1).max(0.0)
    }
}

/// Uniform cell partition of `[0, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub n: usize,
    pub cells_per_unit: usize,
}

impl RadialGrid {
    pub fn new(n: usize, cells_per_unit: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("oracle needs n >= 2, got {n}")));
        }
        if cells_per_unit < 2 {
            return Err(Error::Parameter(format!(
                "cells_per_unit = {cells_per_unit} must be >= 2"
            )));
        }
        Ok(Self { n, cells_per_unit })
    }

    pub fn with_default(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_CELLS_PER_UNIT)
    }

    pub fn width(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    pub fn cells(&self) -> usize {
        self.n * self.cells_per_unit
    }

    pub fn edge(&self, i: usize) -> f64 {
        i as f64 / self.cells_per_unit as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.cells_per_unit as f64
    }
}

/// Law of `|S_n|` on a cell grid.
///
/// `density` is the mean density over each cell, so `Σ density · h = 1`.
/// `log_density` is kept separately because the product-measure density
/// spans hundreds of orders of magnitude; cells that underflowed hold `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialLaw {
    pub n: usize,
    pub dim: usize,
    /// Inverse temperature of the tilt; `0` for the product measure.
    pub beta: f64,
    pub grid: RadialGrid,
    /// Cell midpoints.
    pub r: Vec<f64>,
    pub density: Vec<f64>,
    pub log_density: Vec<f64>,
    /// CDF at the cell edges, `cdf[0] = 0`, `cdf[cells] = 1`.
    pub cdf: Vec<f64>,
}

impl RadialLaw {
    fn from_log_density(n: usize, dim: usize, beta: f64, grid: RadialGrid, log_density: Vec<f64>) -> Self {
        let h = grid.width();
        let top = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = log_density.iter().map(|l| (l - top).exp()).sum::<f64>() * h;
        let shift = top + total.ln();
        let log_density: Vec<f64> = log_density.iter().map(|l| l - shift).collect();
        let density: Vec<f64> = log_density.iter().map(|l| l.exp()).collect();
        let mut cdf = Vec::with_capacity(density.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for d in &density {
            acc += d * h;
            cdf.push(acc);
        }
        // remove the last-bit drift of the running sum
        let last = acc;
        for c in cdf.iter_mut() {
            *c = (*c / last).min(1.0);
        }
        let r = (0..grid.cells()).map(|i| grid.midpoint(i)).collect();
        Self {
            n,
            dim,
            beta,
            grid,
            r,
            density,
            log_density,
            cdf,
        }
    }

    /// Midpoint-rule total mass; `1` up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.width()
    }

    /// `P(|S_n| <= r)`, linear within each cell.
    pub fn cdf_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let cells = self.grid.cells();
        let pos = r * self.grid.cells_per_unit as f64;
        if pos >= cells as f64 {
            return 1.0;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])
    }

    /// `E g(|S_n|)` by the midpoint rule.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.width();
        self.r.iter().zip(&self.density).map(|(&r, &d)| g(r) * d * h).sum()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "r,density,cdf")?;
        for (i, (&r, &d)) in self.r.iter().zip(&self.density).enumerate() {
            // cdf at the right edge of the cell
            writeln!(out, "{r:e},{d:e},{:e}", self.cdf[i + 1])?;
        }
        Ok(())
    }
}

/// Runs the cell recursion up to `n` spins with linear pre-tilt `alpha` and
/// returns `log p_n(r)` of the product measure on the grid.
fn product_log_density(n: usize, dim: usize, grid: &RadialGrid, alpha: f64) -> Vec<f64> {
    let cpu = grid.cells_per_unit;
    let h = grid.width();
    let reach = cpu + 1;
    // e^{α(s - ρ)} for midpoint offsets in cells
    let tilt: Vec<f64> = (0..=2 * reach).map(|d| (alpha * (d as f64 - reach as f64) * h).exp()).collect();

    // |S_1| = 1 exactly: the first step is done from a point mass.
    let mut mass = vec![0.0; 2 * cpu];
    let mut log_scale = 0.0;
    for (t, m) in mass.iter_mut().enumerate() {
        let (lo, hi) = (grid.edge(t), grid.edge(t + 1));
        *m = cosine_mass(0.5 * lo * lo - 1.0, 0.5 * hi * hi - 1.0, dim) * (alpha * (grid.midpoint(t) - 1.0)).exp();
    }
    let mut edges_u = Vec::with_capacity(2 * reach + 2);
    for k in 2..n {
        let mut next = vec![0.0; (k + 1) * cpu];
        let top = mass.iter().cloned().fold(0.0, f64::max);
        let floor = top * MASS_FLOOR;
        for (j, &m) in mass.iter().enumerate() {
            if m <= floor {
                continue;
            }
            let rho = grid.midpoint(j);
            let lo_cell = ((rho - 1.0).abs() * cpu as f64).floor() as usize;
            let hi_cell = (((rho + 1.0) * cpu as f64).ceil() as usize).min(next.len());
            edges_u.clear();
            for e in lo_cell..=hi_cell {
                let s = grid.edge(e);
                edges_u.push(((s * s - rho * rho - 1.0) / (2.0 * rho)).clamp(-1.0, 1.0));
            }
            for t in lo_cell..hi_cell {
                let p = cosine_mass(edges_u[t - lo_cell], edges_u[t + 1 - lo_cell], dim);
                if p > 0.0 {
                    next[t] += m * p * tilt[t + reach - j];
                }
            }
        }
        let top = next.iter().cloned().fold(0.0, f64::max);
        for v in next.iter_mut() {
            *v /= top;
        }
        log_scale += top.ln();
        mass = next;
    }
    debug_assert_eq!(mass.len(), grid.cells());
    mass.iter()
        .enumerate()
        .map(|(t, &m)| (m / h).ln() + log_scale - alpha * grid.midpoint(t))
        .collect()
}

fn check_n(n: usize, max_n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!("oracle needs n >= 2, got {n}")));
    }
    if n > max_n {
        return Err(Error::Parameter(format!("oracle n = {n} exceeds the limit {max_n}")));
    }
    Ok(())
}

/// Radial law of `|S_n|` under the product of uniform measures.
pub fn radial_density_product(n: usize, dim: usize, grid: RadialGrid) -> Result<RadialLaw> {
    check_n(n, usize::MAX)?;
    if dim < 2 {
        return Err(Error::Parameter(format!("N = {dim} must be >= 2")));
    }
    if grid.n != n {
        return Err(Error::Parameter(format!("grid spans [0, {}] but n = {n}", grid.n)));
    }
    let log_density = product_log_density(n, dim, &grid, 0.0);
    Ok(RadialLaw::from_log_density(n, dim, 0.0, grid, log_density))
}

/// Multiplies a product-measure law by `exp(βr²/(2n))` and renormalizes.
pub fn tilt_gibbs(law: &RadialLaw, beta: f64) -> Result<RadialLaw> {
    if law.beta != 0.0 {
        return Err(Error::Parameter("tilt_gibbs expects a product-measure law".into()));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta = {beta} must be finite and >= 0")));
    }
    let c = beta / (2.0 * law.n as f64);
    let log_density = law.log_density.iter().zip(&law.r).map(|(l, r)| l + c * r * r).collect();
    Ok(RadialLaw::from_log_density(law.n, law.dim, beta, law.grid, log_density))
}

/// Gibbs law of `|S_n|` computed with the recursion pre-tilted by `e^{br}`,
/// which keeps the bulk of the tilted law representable for `n` up to several
/// hundred.
pub fn gibbs_radial_law(derived: &DerivedConstants, grid: RadialGrid) -> Result<RadialLaw> {
    let p = derived.params;
    check_n(p.n, usize::MAX)?;
    if grid.n != p.n {
        return Err(Error::Parameter(format!("grid spans [0, {}] but n = {}", grid.n, p.n)));
    }
    let product = product_log_density(p.n, p.dim, &grid, derived.b);
    let law = RadialLaw::from_log_density(p.n, p.dim, 0.0, grid, product);
    tilt_gibbs(&law, p.beta)
}

/// `r ↦ W/B = √n (β² r² / (n² b²) - 1) / B`.
pub fn z_of_r(r: f64, derived: &DerivedConstants) -> f64 {
    derived.w_from_norm2(r * r) / derived.b_std()
}

/// Inverse of [`z_of_r`] on `r >= 0`; `None` below `z(0)`.
pub fn r_of_z(z: f64, derived: &DerivedConstants) -> Option<f64> {
    let n = derived.params.n as f64;
    let inner = 1.0 + z * derived.b_std() / n.sqrt();
    (inner >= 0.0).then(|| derived.typical_radius() * inner.sqrt())
}

/// `P(W/B <= z)` under a tilted law.
pub fn cdf_at_z(law: &RadialLaw, derived: &DerivedConstants, z: f64) -> f64 {
    r_of_z(z, derived).map_or(0.0, |r| law.cdf_at(r))
}

fn gap_at_r(law: &RadialLaw, derived: &DerivedConstants, r: f64) -> f64 {
    (law.cdf_at(r) - normal_cdf(z_of_r(r, derived))).abs()
}

/// `sup_z |P(W/B <= z) - Φ(z)|` evaluated at cell edges and `k` equally
/// spaced interior points per cell, doubling `k` until the sup moves by less
/// than [`SUP_REFINE_TOL`].
pub fn kolmogorov_from_law(law: &RadialLaw, derived: &DerivedConstants) -> Result<f64> {
    let grid = law.grid;
    let cells = grid.cells();
    let h = grid.width();
    // left of r = 0 the law has no mass while Φ(z(0)) may be positive
    let mut sup = normal_cdf(z_of_r(0.0, derived));
    for i in 0..=cells {
        sup = sup.max(gap_at_r(law, derived, grid.edge(i)));
    }
    let mut k = 2;
    loop {
        let mut refined = sup;
        for i in 0..cells {
            let left = grid.edge(i);
            for j in 1..k {
                refined = refined.max(gap_at_r(law, derived, left + h * j as f64 / k as f64));
            }
        }
        let change = refined - sup;
        sup = refined;
        if change < SUP_REFINE_TOL {
            break;
        }
        k *= 2;
        if k > 1 << 12 {
            return Err(Error::numerical("exact_oracle", "Kolmogorov sup refinement did not settle"));
        }
    }
    Ok(sup)
}

/// The same sup as [`kolmogorov_from_law`] taken over a list of `z` values.
pub fn kolmogorov_on_z_grid(law: &RadialLaw, derived: &DerivedConstants, zs: &[f64]) -> f64 {
    zs.iter()
        .map(|&z| (cdf_at_z(law, derived, z) - normal_cdf(z)).abs())
        .fold(0.0, f64::max)
}

/// Exact `d_K(W_n/B, Z)` for the model in `derived` on the default grid.
pub fn exact_kolmogorov_to_normal(derived: &DerivedConstants) -> Result<f64> {
    check_n(derived.params.n, DEFAULT_MAX_N)?;
    let law = gibbs_radial_law(derived, RadialGrid::with_default(derived.params.n)?)?;
    kolmogorov_from_law(&law, derived)
}

/// Radial density of `|S_n|` at `r` by Hankel inversion:
/// `p(r) = A_N (2π)^{-N/2} r^{N/2} ∫_0^∞ t^{N/2} J_{N/2-1}(rt) ψ_N(t)^n dt`.
///
/// The integral is split into half-periods of `J(rt)` and cut at the point
/// where an envelope bound on the remaining tail drops below `1e-10`.
/// Requires `(n-1)(N-1) >= 3` so that the integrand is absolutely integrable.
pub fn radial_density_hankel(n: usize, dim: usize, r: f64) -> Result<f64> {
    if dim < 2 || n < 2 || (n - 1) * (dim - 1) < 3 {
        return Err(Error::Parameter(format!(
            "Hankel inversion needs (n-1)(N-1) >= 3, got n = {n}, N = {dim}"
        )));
    }
    if !(r > 0.0 && r < n as f64) {
        return Err(Error::domain("radial_density_hankel", format!("r = {r} outside (0, {n})")));
    }
    let half = dim as f64 / 2.0;
    let nu = half - 1.0;
    let nf = n as f64;
    // |J_ν(x)| <= c x^{-q}: √(2/π) x^{-1/2} for ν <= 1/2, Landau's bound otherwise
    let (c, q) = if nu <= 0.5 { ((2.0 / PI).sqrt(), 0.5) } else { (0.7858, 1.0 / 3.0) };
    let psi_c = gamma(nu + 1.0) * 2f64.powf(nu) * c;
    let decay = nf * (nu + q) + q - half;
    if decay <= 1.0 {
        return Err(Error::numerical("exact_oracle", "Hankel integrand envelope is not integrable"));
    }
    // envelope: c r^{-q} psi_c^n t^{-decay}
    let log_k = c.ln() - q * r.ln() + nf * psi_c.ln();
    let tail_tol: f64 = 1e-10;
    let log_t = (log_k - (decay - 1.0).ln() - tail_tol.ln()) / (decay - 1.0);
    let t_max = log_t.exp().max(10.0);
    if t_max > 5.0e3 {
        return Err(Error::numerical(
            "exact_oracle",
            format!("Hankel tail bound needs t up to {t_max:.3e}; use the cell recursion"),
        ));
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        t.powf(half) * bessel_j(nu, r * t) * uniform_char_fn(t, dim).powi(n as i32)
    };
    let step = PI / r.max(1.0);
    let pieces = (t_max / step).ceil() as usize;
    let total: f64 = (0..pieces)
        .map(|k| integrate(integrand, k as f64 * step, (k + 1) as f64 * step, 1e-14))
        .sum();
    let a_n = sphere_area(dim);
    let value = a_n * (2.0 * PI).powf(-half) * r.powf(half) * total;
    Ok(value.max(0.0))
}

/// Hankel-inverted density on many radii.
pub fn radial_density_hankel_grid(n: usize, dim: usize, radii: &[f64]) -> Result<Vec<f64>> {
    radii.par_iter().map(|&r| radial_density_hankel(n, dim, r)).collect()
}

/// Proposal laws for [`importance_sampling`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Proposal {
    /// Independent uniform spins, weight `exp(β|S|²/(2n))`.
    Product,
    /// Pick a uniform direction `u`, then draw every spin from vMF(`u`, `b`).
    /// The marginal density is `M(b|S|) / M(b)^n` with
    /// `ln M(x) = ∫_0^x f(t) dt`, so the weight is
    /// `exp(β|S|²/(2n) - ln M(b|S|))`.
    MeanField,
}

/// `ln E exp(x ⟨σ, e⟩)` for `σ` uniform on `S^{N-1}`, i.e. `∫_0^x f(t) dt`.
///
/// The table holds the integral at unit spacing; a query adds one
/// Gauss–Kronrod panel from the nearest node below.
#[derive(Debug, Clone)]
pub struct LogRadialMgf {
    dim: usize,
    nodes: Vec<f64>,
}

impl LogRadialMgf {
    pub fn new(dim: usize, x_max: f64) -> Result<Self> {
        let f = |t: f64| if t > 0.0 { crate::special::bessel_ratio(t, dim).unwrap_or(0.0) } else { 0.0 };
        crate::special::bessel_ratio(1.0, dim)?;
        let count = x_max.max(1.0).ceil() as usize + 1;
        let mut nodes = Vec::with_capacity(count + 1);
        nodes.push(0.0);
        for k in 0..count {
            let last = nodes[k];
            nodes.push(last + integrate(f, k as f64, k as f64 + 1.0, 1e-15));
        }
        Ok(Self { dim, nodes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = (x.floor() as usize).min(self.nodes.len() - 1);
        let rest = x - k as f64;
        if rest == 0.0 {
            return self.nodes[k];
        }
        let dim = self.dim;
        let f = |t: f64| if t > 0.0 { crate::special::bessel_ratio(t, dim).unwrap_or(0.0) } else { 0.0 };
        self.nodes[k] + crate::quadrature::gauss_kronrod_15(&f, k as f64, x).0
    }
}

/// Self-normalized importance-sampling estimates under the Gibbs law with
/// delta-method standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImportanceEstimate {
    pub proposal: Proposal,
    pub draws: usize,
    pub effective_sample_size: f64,
    pub mean_z: f64,
    pub mean_z_se: f64,
    pub p_nonpositive: f64,
    pub p_nonpositive_se: f64,
}

fn weighted(weights: &[f64], values: &[f64]) -> (f64, f64) {
    let sw: f64 = weights.iter().sum();
    let est = weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / sw;
    let var = weights
        .iter()
        .zip(values)
        .map(|(w, v)| (w * (v - est)).powi(2))
        .sum::<f64>()
        / (sw * sw);
    (est, var.sqrt())
}

/// Estimates `E[W/B]` and `P(W/B <= 0)` under the Gibbs law from `draws`
/// configurations of the chosen proposal.
///
/// With [`Proposal::Product`] the weights degenerate quickly with `n`; the
/// mean-field proposal keeps a usable effective sample size well beyond that.
pub fn importance_sampling<R: Rng + ?Sized>(
    derived: &DerivedConstants,
    proposal: Proposal,
    draws: usize,
    rng: &mut R,
) -> Result<ImportanceEstimate> {
    let p = derived.params;
    if draws < 2 {
        return Err(Error::Estimation {
            msg: "importance sampling needs draws".into(),
            required: 2,
            got: draws,
        });
    }
    let mgf = match proposal {
        Proposal::Product => None,
        Proposal::MeanField => Some(LogRadialMgf::new(p.dim, derived.b * p.n as f64)?),
    };
    let sampler = VmfSampler::new(p.dim);
    let mut axis = vec![0.0; p.dim];
    let mut spin = vec![0.0; p.dim];
    let mut total = vec![0.0; p.dim];
    let mut log_w = Vec::with_capacity(draws);
    let mut zs = Vec::with_capacity(draws);
    let c = p.beta / (2.0 * p.n as f64);
    for _ in 0..draws {
        total.iter_mut().for_each(|x| *x = 0.0);
        if mgf.is_some() {
            fill_uniform_sphere(&mut axis, rng);
        }
        for _ in 0..p.n {
            match proposal {
                Proposal::Product => fill_uniform_sphere(&mut spin, rng),
                Proposal::MeanField => sampler.sample_into(&axis, derived.b, &mut spin, rng),
            }
            total.iter_mut().zip(&spin).for_each(|(t, s)| *t += s);
        }
        let norm2: f64 = total.iter().map(|x| x * x).sum();
        let correction = mgf.as_ref().map_or(0.0, |m| m.eval(derived.b * norm2.sqrt()));
        log_w.push(c * norm2 - correction);
        zs.push(derived.w_from_norm2(norm2) / derived.b_std());
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let (mean_z, mean_z_se) = weighted(&w, &zs);
    let below: Vec<f64> = zs.iter().map(|&z| if z <= 0.0 { 1.0 } else { 0.0 }).collect();
    let (p_nonpositive, p_nonpositive_se) = weighted(&w, &below);
    Ok(ImportanceEstimate {
        proposal,
        draws,
        effective_sample_size: sw * sw / sw2,
        mean_z,
        mean_z_se,
        p_nonpositive,
        p_nonpositive_se,
    })
}

/// Mean of `|S_n|²` over `draws` product-measure samples, with its standard error.
pub fn product_norm2_monte_carlo<R: Rng + ?Sized>(n: usize, dim: usize, draws: usize, rng: &mut R) -> (f64, f64, f64, f64) {
    let mut spin = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    let mut s2 = Vec::with_capacity(draws);
    for _ in 0..draws {
        total.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..n {
            fill_uniform_sphere(&mut spin, rng);
            total.iter_mut().zip(&spin).for_each(|(t, s)| *t += s);
        }
        s2.push(total.iter().map(|x| x * x).sum::<f64>());
    }
    let s4: Vec<f64> = s2.iter().map(|x| x * x).collect();
    let se = |v: &[f64]| crate::stats::standard_error(v);
    (mean(&s2), se(&s2), mean(&s4), se(&s4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn char_fn_closed_forms() {
        assert_eq!(uniform_char_fn(0.0, 5), 1.0);
        for t in [0.5, 1.0, 3.1] {
            assert!((uniform_char_fn(t, 3) - t.sin() / t).abs() < 1e-12);
        }
        assert!(uniform_char_fn(2.404_825_557_695_773, 2).abs() < 1e-12);
        // series and Bessel branches meet
        let t = SMALL_T;
        assert!((uniform_char_fn(t * 0.999_999, 4) - uniform_char_fn(t * 1.000_001, 4)).abs() < 1e-12);
    }

    #[test]
    fn cosine_cdf_symmetry() {
        for dim in 2..8 {
            for u in [-0.9, -0.3, 0.0, 0.4, 0.99] {
                let (lo, hi) = cosine_cdf(u, dim);
                assert!((lo + hi - 1.0).abs() < 1e-14, "N={dim} u={u}");
                assert!((lo - cosine_cdf(-u, dim).1).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_spins_triangle_density() {
        let law = radial_density_product(2, 3, RadialGrid::with_default(2).unwrap()).unwrap();
        let err = law.r.iter().zip(&law.density).map(|(r, d)| (d - r / 2.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilt_zero_is_identity() {
        let law = radial_density_product(5, 3, RadialGrid::new(5, 40).unwrap()).unwrap();
        let same = tilt_gibbs(&law, 0.0).unwrap();
        for (a, b) in law.density.iter().zip(&same.density) {
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn log_mgf_closed_form() {
        // N = 3: E e^{x cos θ} = sinh(x) / x
        let m = LogRadialMgf::new(3, 60.0).unwrap();
        for x in [0.0f64, 0.3, 1.0, 7.25, 59.9] {
            let want = if x == 0.0 { 0.0 } else { (x.sinh() / x).ln() };
            assert!((m.eval(x) - want).abs() < 1e-12 * want.max(1.0), "x={x}");
        }
        // N = 2: E e^{x cos θ} = I_0(x); I_0(1) = 1.2660658777520082
        let m2 = LogRadialMgf::new(2, 2.0).unwrap();
        assert!((m2.eval(1.0) - 1.266_065_877_752_008_2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn z_roundtrip() {
        let d = DerivedConstants::new(ModelParams::new(3, 5.0, 30).unwrap()).unwrap();
        for r in [1.0, 10.0, 21.7, 29.0] {
            assert!((r_of_z(z_of_r(r, &d), &d).unwrap() - r).abs() < 1e-12);
        }
    }
}
