//! Stein-pair diagnostics: exact conditional moments of `Δ = W - W'` given
//! the configuration, the Wasserstein and Kolmogorov bound terms, empirical
//! distances to the standard normal and the log-log rate fit.
//!
//! With `u = σ^{(I)}` the cavity field at the resampled site,
//! `|S|² - |S'|² = 2 ⟨σ_I - σ_I', u⟩`, so
//! `Δ = 2β² / (b² n^{3/2}) · ⟨σ_I - σ_I', u⟩`. Averaging over the uniform index
//! and the vMF law of `σ_I'` (mean `f(b_i) r_i`, radial second moment
//! `1 - (N-1) f(b_i)/b_i`) gives both conditional moments in closed form.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{ChainRecord, SpinConfiguration};
use crate::model::DerivedConstants;
use crate::special::{bessel_ratio, normal_cdf, normal_cdf_integral, normal_quantile};
use crate::sphere::dot;
use crate::stats::{least_squares, mean};

/// Minimum number of records accepted by [`stein_terms`].
pub const MIN_STEIN_SAMPLES: usize = 1000;

/// Minimum number of distinct system sizes for [`rate_fit`].
pub const MIN_RATE_POINTS: usize = 4;

/// `(E(Δ | σ), E(Δ² | σ))` in one `O(nN)` pass.
pub fn conditional_moments(config: &SpinConfiguration, derived: &DerivedConstants) -> Result<(f64, f64)> {
    let n = config.n();
    let nf = n as f64;
    let dim = config.dim();
    let m = dim as f64 - 1.0;
    let beta = derived.params.beta;
    let b = derived.b;
    let total = config.total_spin();
    let norm2 = config.total_norm2();

    let mut first = 0.0;
    let mut second = 0.0;
    for s in config.spins() {
        let along_total = dot(s, total);
        // ⟨σ_i, σ^{(i)}⟩ and |σ^{(i)}|² without forming the cavity vector
        let a = along_total - 1.0;
        let u2 = (norm2 - 2.0 * along_total + 1.0).max(0.0);
        let u = u2.sqrt();
        if u == 0.0 {
            continue;
        }
        let kappa = beta * u / nf;
        let f = bessel_ratio(kappa, dim)?;
        first += a - f * u;
        second += a * a - 2.0 * f * u * a + u2 * (1.0 - m * f / kappa);
    }
    let n32 = nf * nf.sqrt();
    let c1 = 2.0 * beta * beta / (b * b * n32);
    let c2 = c1 * c1;
    Ok((c1 * first / nf, c2 * second / nf))
}

/// `E(Δ | σ) = 2β²/(b² n^{3/2}) · (1/n) Σ_i [⟨σ_i, σ^{(i)}⟩ - f(b_i) |σ^{(i)}|]`.
pub fn cond_mean_delta(config: &SpinConfiguration, derived: &DerivedConstants) -> Result<f64> {
    Ok(conditional_moments(config, derived)?.0)
}

/// `E(Δ² | σ) = 4β⁴/(b⁴ n³) · (1/n) Σ_i [a_i² - 2 f(b_i)|σ^{(i)}| a_i + |σ^{(i)}|² (1 - (N-1) f(b_i)/b_i)]`
/// with `a_i = ⟨σ_i, σ^{(i)}⟩`.
pub fn cond_second_moment_delta(config: &SpinConfiguration, derived: &DerivedConstants) -> Result<f64> {
    Ok(conditional_moments(config, derived)?.1)
}

/// Bound terms for the normalized pair `(W/B, W'/B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinTerms {
    pub n: usize,
    pub samples_used: usize,
    /// mean of `|1 - E(Δ²|σ) / (2λB²)|`
    pub ratio_term: f64,
    /// `(1/2λ) · mean |Δ/B|³` over realized pairs
    pub third_moment_term: f64,
    /// mean of `|E(Δ|σ)/(λB) - W/B|`
    pub remainder_term: f64,
    pub wasserstein_bound: f64,
    pub kolmogorov_bound: f64,
    /// mean of `|W/B|`
    pub mean_abs_w: f64,
    /// mean of `E(Δ²|σ) / (2λ)`, the pair estimate of `B²`
    pub variance_estimate: f64,
}

impl SteinTerms {
    pub const CSV_HEADER: &'static str = "n,samples,ratio_term,third_moment_term,remainder_term,wasserstein_bound,kolmogorov_bound,mean_abs_w,variance_estimate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.n,
            self.samples_used,
            self.ratio_term,
            self.third_moment_term,
            self.remainder_term,
            self.wasserstein_bound,
            self.kolmogorov_bound,
            self.mean_abs_w,
            self.variance_estimate
        )
    }
}

fn require_samples(got: usize) -> Result<()> {
    if got < MIN_STEIN_SAMPLES {
        return Err(Error::Estimation {
            msg: "too few pair records for Stein terms".into(),
            required: MIN_STEIN_SAMPLES,
            got,
        });
    }
    Ok(())
}

/// Sample-mean estimates of the Wasserstein and Kolmogorov bound terms from
/// (approximately) stationary records.
pub fn stein_terms(records: &[ChainRecord], derived: &DerivedConstants) -> Result<SteinTerms> {
    require_samples(records.len())?;
    let lambda = derived.lambda;
    let b2 = derived.b2;
    let bs = derived.b_std();
    let count = records.len() as f64;

    let (mut ratio, mut third, mut remainder, mut abs_w, mut var) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in records {
        let p = &r.pair;
        let scaled_second = p.cond_second / (2.0 * lambda);
        ratio += (1.0 - scaled_second / b2).abs();
        third += (p.delta / bs).abs().powi(3);
        remainder += (p.cond_mean / (lambda * bs) - p.w / bs).abs();
        abs_w += (p.w / bs).abs();
        var += scaled_second;
    }
    let ratio_term = ratio / count;
    let third_moment_term = third / count / (2.0 * lambda);
    let remainder_term = remainder / count;
    let mean_abs_w = abs_w / count;
    Ok(SteinTerms {
        n: derived.params.n,
        samples_used: records.len(),
        ratio_term,
        third_moment_term,
        remainder_term,
        wasserstein_bound: (2.0 / std::f64::consts::PI).sqrt() * ratio_term
            + third_moment_term
            + 2.0 * remainder_term,
        kolmogorov_bound: ratio_term + (mean_abs_w + 1.0) * derived.delta_cap / bs + remainder_term,
        mean_abs_w,
        variance_estimate: var / count,
    })
}

/// The ratio term with `E(Δ²|·)` conditioned on `W` instead of `σ`,
/// approximated by averaging `E(Δ²|σ)` within `bins` equal-count bins of `W`.
/// By Jensen it never exceeds the σ-conditioned [`SteinTerms::ratio_term`].
pub fn binned_ratio_term(records: &[ChainRecord], derived: &DerivedConstants, bins: usize) -> Result<f64> {
    require_samples(records.len())?;
    let mut pairs: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.pair.w, r.pair.cond_second / (2.0 * derived.lambda * derived.b2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = pairs.len();
    let bins = bins.clamp(1, total);
    let mut acc = 0.0;
    for k in 0..bins {
        let bin = &pairs[k * total / bins..(k + 1) * total / bins];
        let avg = bin.iter().map(|p| p.1).sum::<f64>() / bin.len() as f64;
        acc += bin.len() as f64 * (1.0 - avg).abs();
    }
    Ok(acc / total as f64)
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `sup_z |F_m(z) - Φ(z)|` for the empirical CDF `F_m` of `sample`.
pub fn empirical_kolmogorov(sample: &[f64]) -> f64 {
    assert!(!sample.is_empty(), "empirical_kolmogorov: empty sample");
    let s = sorted(sample);
    let m = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal_cdf(x);
            ((i + 1) as f64 / m - phi).max(phi - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

// ∫_a^b |c - Φ(x)| dx with a ≤ b finite.
fn gap_integral(a: f64, b: f64, c: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let g = normal_cdf_integral;
    let (pa, pb) = (normal_cdf(a), normal_cdf(b));
    if pa >= c {
        g(b) - g(a) - c * (b - a)
    } else if pb <= c {
        c * (b - a) - (g(b) - g(a))
    } else {
        let z = normal_quantile(c).clamp(a, b);
        (c * (z - a) - (g(z) - g(a))) + ((g(b) - g(z)) - c * (b - z))
    }
}

/// `∫ |F_m(x) - Φ(x)| dx`, the one-dimensional Wasserstein distance between the
/// empirical law of `sample` and the standard normal, integrated exactly
/// between order statistics.
pub fn empirical_wasserstein(sample: &[f64]) -> f64 {
    assert!(!sample.is_empty(), "empirical_wasserstein: empty sample");
    let s = sorted(sample);
    let m = s.len() as f64;
    let first = s[0];
    let last = s[s.len() - 1];
    // tails: ∫_{-∞}^{x_(1)} Φ = G(x_(1)),  ∫_{x_(m)}^{∞} (1 - Φ) = G(-x_(m))
    let mut total = normal_cdf_integral(first) + normal_cdf_integral(-last);
    for (i, w) in s.windows(2).enumerate() {
        total += gap_integral(w[0], w[1], (i + 1) as f64 / m);
    }
    total
}

/// Result of a log-log least-squares fit of distance against system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
    pub points_used: usize,
}

/// One line of a rate table. Absent estimates are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RateRow {
    pub n: usize,
    pub d_k_empirical: Option<f64>,
    pub d_w_empirical: Option<f64>,
    pub d_k_oracle: Option<f64>,
    pub stein: Option<SteinTerms>,
    pub b: f64,
    pub b2: f64,
    pub lambda: f64,
    pub seed: Option<u64>,
}

impl RateRow {
    pub const CSV_HEADER: &'static str = "n,d_k_empirical,d_w_empirical,d_k_oracle,ratio_term,third_moment_term,remainder_term,wasserstein_bound,kolmogorov_bound,b,B2,lambda,seed";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let st = self.stein;
        format!(
            "{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{}",
            self.n,
            opt(self.d_k_empirical),
            opt(self.d_w_empirical),
            opt(self.d_k_oracle),
            opt(st.map(|s| s.ratio_term)),
            opt(st.map(|s| s.third_moment_term)),
            opt(st.map(|s| s.remainder_term)),
            opt(st.map(|s| s.wasserstein_bound)),
            opt(st.map(|s| s.kolmogorov_bound)),
            self.b,
            self.b2,
            self.lambda,
            self.seed.map(|s| s.to_string()).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub fit: Option<RateFit>,
}

/// Least-squares fit of `log d` against `log n`. Points with `d <= 0` are
/// dropped with a warning; fewer than [`MIN_RATE_POINTS`] usable distinct
/// sizes is an error.
pub fn rate_fit(points: &[(usize, f64)]) -> Result<RateFit> {
    let mut usable: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(n, d) in points {
        if !(d > 0.0) || !d.is_finite() {
            warn!("rate_fit: dropping n = {n} with non-positive distance {d}");
            continue;
        }
        if usable.iter().any(|&(x, _)| x == (n as f64).ln()) {
            return Err(Error::Estimation {
                msg: format!("duplicate system size n = {n} in rate fit"),
                required: MIN_RATE_POINTS,
                got: usable.len(),
            });
        }
        usable.push(((n as f64).ln(), d.ln()));
    }
    if usable.len() < MIN_RATE_POINTS {
        return Err(Error::Estimation {
            msg: "too few usable points for a rate fit".into(),
            required: MIN_RATE_POINTS,
            got: usable.len(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let fit = least_squares(&x, &y);
    Ok(RateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        points_used: x.len(),
    })
}

/// Fits against the chosen column of a table.
pub fn rate_fit_table(table: &RateTable, column: impl Fn(&RateRow) -> Option<f64>) -> Result<RateFit> {
    let points: Vec<(usize, f64)> = table
        .rows
        .iter()
        .filter_map(|r| column(r).map(|d| (r.n, d)))
        .collect();
    rate_fit(&points)
}

/// `W/B` for every record.
pub fn normalized_w(records: &[ChainRecord], derived: &DerivedConstants) -> Vec<f64> {
    let bs = derived.b_std();
    records.iter().map(|r| r.pair.w / bs).collect()
}

/// Mean of `|1 - E(Δ²|σ)/(2λB²)|`, exposed for quick checks.
pub fn mean_ratio_deviation(records: &[ChainRecord], derived: &DerivedConstants) -> f64 {
    let v: Vec<f64> = records
        .iter()
        .map(|r| (1.0 - r.pair.cond_second / (2.0 * derived.lambda * derived.b2)).abs())
        .collect();
    mean(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::sphere::UnitVector;

    #[test]
    fn kolmogorov_of_quantile_sample() {
        let m = 1000;
        let s: Vec<f64> = (0..m).map(|i| normal_quantile((i as f64 + 0.5) / m as f64)).collect();
        assert!((empirical_kolmogorov(&s) - 0.5 / m as f64).abs() < 1e-12);
        assert!((empirical_kolmogorov(&[0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_of_point_mass() {
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((empirical_wasserstein(&[0.0]) - want).abs() < 1e-9);
        // a point mass at c has distance E|Z - c|
        let c: f64 = 1.3;
        let e = 2.0 * crate::special::normal_pdf(c) + c * (2.0 * normal_cdf(c) - 1.0);
        assert!((empirical_wasserstein(&[c]) - e).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_exact_power_law() {
        let pts: Vec<(usize, f64)> = [16, 32, 64, 128, 256].iter().map(|&n| (n, 3.0 / (n as f64).sqrt())).collect();
        let fit = rate_fit(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.residual <= 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        let flat: Vec<(usize, f64)> = [16, 32, 64, 128].iter().map(|&n| (n, 0.2)).collect();
        assert!(rate_fit(&flat).unwrap().slope.abs() < 1e-14);
    }

    #[test]
    fn rate_fit_drops_and_errors() {
        let pts = vec![(16, 0.1), (32, 0.0), (64, 0.05), (128, -1.0), (256, 0.02)];
        assert!(matches!(rate_fit(&pts), Err(Error::Estimation { got: 3, .. })));
        let pts = vec![(16, 0.1), (32, 0.07), (64, 0.05), (128, 0.03), (256, 0.02), (512, 0.0)];
        assert_eq!(rate_fit(&pts).unwrap().points_used, 5);
        let dup = vec![(16, 0.1), (16, 0.07), (64, 0.05), (128, 0.03)];
        assert!(rate_fit(&dup).is_err());
    }

    #[test]
    fn aligned_pair_conditional_mean() {
        let d = DerivedConstants::new(ModelParams::new(3, 5.0, 2).unwrap()).unwrap();
        let c = SpinConfiguration::from_spins(&[UnitVector::basis(3, 0), UnitVector::basis(3, 0)]).unwrap();
        let (m1, m2) = conditional_moments(&c, &d).unwrap();
        assert!((m1 - 0.518_593_204_417_332_3).abs() < 1e-12, "{m1}");
        assert!(m2 >= 0.0 && m2 <= d.delta_cap * d.delta_cap);
    }

    #[test]
    fn too_few_samples() {
        let d = DerivedConstants::new(ModelParams::new(3, 5.0, 10).unwrap()).unwrap();
        assert!(matches!(stein_terms(&[], &d), Err(Error::Estimation { required: 1000, .. })));
    }
}
