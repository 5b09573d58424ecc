//! Uniform and von Mises–Fisher laws on the unit sphere `S^{N-1}`.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::special::bessel_ratio;

/// Below this concentration the vMF law is sampled as uniform.
pub const UNIFORM_KAPPA: f64 = 1.0e-8;

/// Tolerance on `|x| = 1` accepted by [`UnitVector::new`].
pub const UNIT_TOLERANCE: f64 = 1.0e-12;

/// A point on `S^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = dot(&coords, &coords).sqrt();
        if coords.len() < 2 || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::domain(
                "UnitVector::new",
                format!("need >= 2 coordinates with unit norm, got norm {norm}"),
            ));
        }
        Ok(Self(coords))
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let norm = dot(&coords, &coords).sqrt();
        if !(norm > 0.0) || coords.len() < 2 {
            return Err(Error::domain("UnitVector::normalized", "zero vector"));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self(coords))
    }

    /// The basis vector `e_axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Density `∝ exp(κ ⟨x, r⟩)` on `S^{N-1}`; `κ = 0` is the uniform law.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfLaw {
    pub direction: UnitVector,
    pub kappa: f64,
}

impl VmfLaw {
    pub fn new(direction: UnitVector, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain("VmfLaw::new", format!("kappa = {kappa} must be >= 0")));
        }
        Ok(Self { direction, kappa })
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }
}

/// Fills `out` with a uniform point of `S^{out.len()-1}` by normalizing
/// independent standard Gaussians.
pub fn fill_uniform_sphere<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    loop {
        let mut norm2 = 0.0;
        for c in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *c = g;
            norm2 += g * g;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            out.iter_mut().for_each(|c| *c *= inv);
            return;
        }
    }
}

pub fn sample_uniform_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVector {
    let mut v = vec![0.0; dim];
    fill_uniform_sphere(&mut v, rng);
    UnitVector(v)
}

/// Law of the auxiliary `Beta((N-1)/2, (N-1)/2)` variable in Wood's sampler.
#[derive(Debug, Clone)]
enum RadialBeta {
    /// `N = 2`: arcsine law, `sin²(πU/2)`.
    Arcsine,
    /// `N = 3`: `Beta(1, 1)` is uniform.
    Uniform,
    General(Beta<f64>),
}

/// Ulrich–Wood rejection sampler for vMF laws of a fixed dimension.
///
/// The component along the mean direction is drawn by rejection from a
/// Beta-based envelope; the tangent part is a uniform direction orthogonal to
/// the mean direction.
#[derive(Debug, Clone)]
pub struct VmfSampler {
    dim: usize,
    beta: RadialBeta,
}

impl VmfSampler {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "sphere dimension N = {dim} must be >= 2");
        let half = 0.5 * (dim as f64 - 1.0);
        let beta = match dim {
            2 => RadialBeta::Arcsine,
            3 => RadialBeta::Uniform,
            _ => RadialBeta::General(Beta::new(half, half).expect("valid beta shape")),
        };
        Self { dim, beta }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Component `⟨x, r⟩` of a vMF(κ) draw.
    pub fn sample_cosine<R: Rng + ?Sized>(&self, kappa: f64, rng: &mut R) -> f64 {
        let m1 = self.dim as f64 - 1.0;
        let b = m1 / (2.0 * kappa + (4.0 * kappa * kappa + m1 * m1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + m1 * (1.0 - x0 * x0).ln();
        loop {
            let z = match &self.beta {
                RadialBeta::Arcsine => {
                    let s = (0.5 * PI * rng.random::<f64>()).sin();
                    s * s
                }
                RadialBeta::Uniform => rng.random::<f64>(),
                RadialBeta::General(beta) => beta.sample(rng),
            };
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let u: f64 = rng.random();
            if kappa * w + m1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                return w;
            }
        }
    }

    /// Writes a vMF(`direction`, `kappa`) draw into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, direction: &[f64], kappa: f64, out: &mut [f64], rng: &mut R) {
        debug_assert_eq!(direction.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        if kappa < UNIFORM_KAPPA {
            fill_uniform_sphere(out, rng);
            return;
        }
        let w = self.sample_cosine(kappa, rng);
        // uniform tangent direction: project a Gaussian off `direction`
        loop {
            for c in out.iter_mut() {
                *c = StandardNormal.sample(rng);
            }
            let along = dot(out, direction);
            let mut norm2 = 0.0;
            for (c, r) in out.iter_mut().zip(direction) {
                *c -= along * r;
                norm2 += *c * *c;
            }
            if norm2 > 1e-20 {
                let scale = (1.0 - w * w).max(0.0).sqrt() / norm2.sqrt();
                for (c, r) in out.iter_mut().zip(direction) {
                    *c = w * r + scale * *c;
                }
                return;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, law: &VmfLaw, rng: &mut R) -> UnitVector {
        let mut out = vec![0.0; self.dim];
        self.sample_into(law.direction.as_slice(), law.kappa, &mut out, rng);
        UnitVector(out)
    }
}

/// One draw from `law`. Builds a sampler per call; use [`VmfSampler`] in loops.
pub fn sample_vmf<R: Rng + ?Sized>(law: &VmfLaw, rng: &mut R) -> UnitVector {
    VmfSampler::new(law.dim()).sample(law, rng)
}

/// Exact first and second moments of a vMF law.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfMoments {
    pub mean: Vec<f64>,
    /// Row-major `N x N` matrix `E[x xᵀ]`.
    pub second: Vec<f64>,
    /// `E⟨x, r⟩²`
    pub radial: f64,
    /// `E⟨x, u⟩²` for a unit `u ⊥ r`
    pub perpendicular: f64,
}

/// Mean `f(κ) r` and second moment `(f(κ)/κ)(I - r rᵀ) + (1 - (N-1) f(κ)/κ) r rᵀ`.
pub fn vmf_moments(law: &VmfLaw) -> Result<VmfMoments> {
    let dim = law.dim();
    let r = law.direction.as_slice();
    let (mean_len, perpendicular, radial) = if law.kappa == 0.0 {
        let third = 1.0 / dim as f64;
        (0.0, third, third)
    } else {
        let f = bessel_ratio(law.kappa, dim)?;
        let perp = f / law.kappa;
        (f, perp, 1.0 - (dim as f64 - 1.0) * perp)
    };
    let mean = r.iter().map(|c| mean_len * c).collect();
    let mut second = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let identity = if i == j { perpendicular } else { 0.0 };
            second[i * dim + j] = identity + (radial - perpendicular) * r[i] * r[j];
        }
    }
    Ok(VmfMoments {
        mean,
        second,
        radial,
        perpendicular,
    })
}

/// Surface measure of `S^{N-1}`: `A_N = 2 π^{N/2} / Γ(N/2)`.
///
/// `dim = 1` gives the two-point "sphere" `S^0` with counting measure 2.
pub fn sphere_area(dim: usize) -> f64 {
    let half = 0.5 * dim as f64;
    2.0 * PI.powf(half) / gamma(half)
}

/// `E⟨x, r⟩²` under vMF(κ) by one-dimensional quadrature over the polar angle:
///
/// `(A_{N-1}/A_N) ∫ cos²φ sin^{N-2}φ e^{κ cos φ} dφ / (A_{N-1}/A_N) ∫ sin^{N-2}φ e^{κ cos φ} dφ`.
///
/// Used to confirm the closed form `1 - (N-1) f(κ)/κ` independently of `f`.
pub fn radial_second_moment_quadrature(kappa: f64, dim: usize) -> f64 {
    let shell = sphere_area(dim - 1) / sphere_area(dim);
    let power = dim as i32 - 2;
    let weight = move |phi: f64| phi.sin().powi(power) * (kappa * (phi.cos() - 1.0)).exp();
    let num = shell * integrate(|phi| phi.cos().powi(2) * weight(phi), 0.0, PI, 1e-13);
    let den = shell * integrate(weight, 0.0, PI, 1e-13);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector::new(vec![1.0, 0.0, 0.0]).is_ok());
        assert!(UnitVector::new(vec![1.0, 1.0]).is_err());
        assert!(UnitVector::new(vec![1.0]).is_err());
        assert!(UnitVector::normalized(vec![0.0, 0.0]).is_err());
        let u = UnitVector::normalized(vec![3.0, 4.0]).unwrap();
        assert!((u.as_slice()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn samples_are_unit() {
        let mut rng = seed_stream(1, 0);
        for dim in 2..=6 {
            let sampler = VmfSampler::new(dim);
            let law = VmfLaw::new(UnitVector::basis(dim, 0), 3.0).unwrap();
            for _ in 0..1000 {
                let x = sampler.sample(&law, &mut rng);
                assert!((x.dot(x.as_slice()) - 1.0).abs() < 1e-12);
                let u = sample_uniform_sphere(dim, &mut rng);
                assert!((u.dot(u.as_slice()) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn moments_trace_is_one() {
        for dim in 2..=6 {
            for &kappa in &[0.0, 0.5, 2.0, 10.0, 300.0] {
                let law = VmfLaw::new(UnitVector::normalized(vec![1.0; dim]).unwrap(), kappa).unwrap();
                let m = vmf_moments(&law).unwrap();
                let trace: f64 = (0..dim).map(|i| m.second[i * dim + i]).sum();
                assert!((trace - 1.0).abs() < 1e-13, "dim={dim} kappa={kappa}");
            }
        }
        let law = VmfLaw::new(UnitVector::basis(3, 2), 2.0).unwrap();
        let m = vmf_moments(&law).unwrap();
        assert!((m.perpendicular - 0.268_657_360_363_774).abs() < 1e-12);
        assert!((m.radial - 0.462_685_279_272_452).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
