//! Heat-bath (Glauber) dynamics for the Gibbs measure and the one-spin
//! exchangeable-pair construction.
//!
//! Given the other spins, site `i` has conditional density
//! `∝ exp((β/n) ⟨x, σ^{(i)}⟩)` with `σ^{(i)} = S - σ_i`, i.e. a vMF law with
//! direction `σ^{(i)}/|σ^{(i)}|` and concentration `β |σ^{(i)}| / n`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DerivedConstants;
use crate::rng::{seed_stream, ChainRng};
use crate::sphere::{dot, fill_uniform_sphere, UnitVector, VmfLaw, VmfSampler};
use crate::stein::conditional_moments;

/// Number of single-site updates between full recomputations of the cached
/// total spin.
pub const REFRESH_INTERVAL: usize = 10_000;

/// Spins stored row-major (`n x N`) with the total spin `S` and `|S|²` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    dim: usize,
    spins: Vec<f64>,
    total: Vec<f64>,
    norm2: f64,
    since_refresh: usize,
}

impl SpinConfiguration {
    /// All spins equal to `e_1`.
    pub fn ordered(dim: usize, n: usize) -> Self {
        let mut spins = vec![0.0; dim * n];
        spins.iter_mut().step_by(dim).for_each(|c| *c = 1.0);
        Self::from_flat(dim, spins)
    }

    /// Independent uniform spins.
    pub fn uniform<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Self {
        let mut spins = vec![0.0; dim * n];
        spins.chunks_exact_mut(dim).for_each(|s| fill_uniform_sphere(s, rng));
        Self::from_flat(dim, spins)
    }

    pub fn from_spins(spins: &[UnitVector]) -> Result<Self> {
        let dim = spins.first().map(UnitVector::dim).ok_or_else(|| {
            Error::domain("SpinConfiguration::from_spins", "need at least one spin")
        })?;
        if spins.iter().any(|s| s.dim() != dim) {
            return Err(Error::domain("SpinConfiguration::from_spins", "mixed spin dimensions"));
        }
        Ok(Self::from_flat(dim, spins.iter().flat_map(|s| s.as_slice().iter().copied()).collect()))
    }

    fn from_flat(dim: usize, spins: Vec<f64>) -> Self {
        let mut config = Self {
            dim,
            spins,
            total: vec![0.0; dim],
            norm2: 0.0,
            since_refresh: 0,
        };
        config.refresh();
        config
    }

    /// Recomputes `S` and `|S|²` from the spins.
    pub fn refresh(&mut self) {
        self.total.iter_mut().for_each(|c| *c = 0.0);
        for s in self.spins.chunks_exact(self.dim) {
            self.total.iter_mut().zip(s).for_each(|(t, c)| *t += c);
        }
        self.norm2 = dot(&self.total, &self.total);
        self.since_refresh = 0;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.spins.len() / self.dim
    }

    pub fn spin(&self, i: usize) -> &[f64] {
        &self.spins[i * self.dim..(i + 1) * self.dim]
    }

    pub fn spins(&self) -> impl Iterator<Item = &[f64]> {
        self.spins.chunks_exact(self.dim)
    }

    pub fn total_spin(&self) -> &[f64] {
        &self.total
    }

    pub fn total_norm2(&self) -> f64 {
        self.norm2
    }

    pub fn total_norm(&self) -> f64 {
        self.norm2.sqrt()
    }

    /// Replaces spin `i`, updating the cached total in `O(N)`.
    pub fn set_spin(&mut self, i: usize, new: &[f64]) {
        let d = self.dim;
        let old = &mut self.spins[i * d..(i + 1) * d];
        for ((t, o), v) in self.total.iter_mut().zip(old.iter_mut()).zip(new) {
            *t += v - *o;
            *o = *v;
        }
        self.norm2 = dot(&self.total, &self.total);
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh();
        }
    }

    /// Writes the cavity field `σ^{(i)} = S - σ_i` into `out`.
    pub fn cavity_into(&self, i: usize, out: &mut [f64]) {
        for ((o, t), s) in out.iter_mut().zip(&self.total).zip(self.spin(i)) {
            *o = t - s;
        }
    }

    /// Largest coordinate gap between the cached and recomputed total spin.
    pub fn cache_drift(&self) -> f64 {
        let mut fresh = vec![0.0; self.dim];
        for s in self.spins() {
            fresh.iter_mut().zip(s).for_each(|(t, c)| *t += c);
        }
        fresh.iter().zip(&self.total).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// The exact conditional law of spin `i` given the others.
pub fn site_conditional(config: &SpinConfiguration, i: usize, beta: f64) -> VmfLaw {
    let mut cavity = vec![0.0; config.dim()];
    config.cavity_into(i, &mut cavity);
    let norm = dot(&cavity, &cavity).sqrt();
    let n = config.n() as f64;
    if norm > 0.0 {
        let direction = UnitVector::normalized(cavity).expect("non-zero cavity");
        VmfLaw {
            direction,
            kappa: beta * norm / n,
        }
    } else {
        VmfLaw {
            direction: UnitVector::basis(config.dim(), 0),
            kappa: 0.0,
        }
    }
}

/// One exchangeable-pair draw together with the exact conditional moments of
/// `Δ` given the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub w: f64,
    pub w_prime: f64,
    /// `W - W'`
    pub delta: f64,
    /// Resampled site (0-based).
    pub index: usize,
    /// `E(Δ | σ)`
    pub cond_mean: f64,
    /// `E(Δ² | σ)`
    pub cond_second: f64,
}

/// Sampler state shared by heat-bath updates and pair draws for one chain.
#[derive(Debug, Clone)]
pub struct HeatBath {
    sampler: VmfSampler,
    beta: f64,
    cavity: Vec<f64>,
    fresh: Vec<f64>,
}

impl HeatBath {
    pub fn new(dim: usize, beta: f64) -> Self {
        Self {
            sampler: VmfSampler::new(dim),
            beta,
            cavity: vec![0.0; dim],
            fresh: vec![0.0; dim],
        }
    }

    // Draws from the site-i conditional into self.fresh.
    fn resample<R: Rng + ?Sized>(&mut self, config: &SpinConfiguration, i: usize, rng: &mut R) {
        config.cavity_into(i, &mut self.cavity);
        let norm = dot(&self.cavity, &self.cavity).sqrt();
        if norm > 0.0 {
            self.cavity.iter_mut().for_each(|c| *c /= norm);
            let kappa = self.beta * norm / config.n() as f64;
            self.sampler.sample_into(&self.cavity, kappa, &mut self.fresh, rng);
        } else {
            fill_uniform_sphere(&mut self.fresh, rng);
        }
    }

    /// Replaces `σ_i` by a draw from its conditional law.
    pub fn step<R: Rng + ?Sized>(&mut self, config: &mut SpinConfiguration, i: usize, rng: &mut R) {
        self.resample(config, i, rng);
        config.set_spin(i, &self.fresh);
    }

    /// One systematic-scan sweep over all sites.
    pub fn sweep<R: Rng + ?Sized>(&mut self, config: &mut SpinConfiguration, rng: &mut R) {
        for i in 0..config.n() {
            self.step(config, i, rng);
        }
    }

    /// `(W, W', Δ, I)` for a uniform index and a fresh conditional draw, without
    /// touching `config`. Fails if `|Δ|` exceeds the cap.
    pub fn draw_pair<R: Rng + ?Sized>(
        &mut self,
        config: &SpinConfiguration,
        derived: &DerivedConstants,
        rng: &mut R,
    ) -> Result<(f64, f64, f64, usize)> {
        let index = rng.random_range(0..config.n());
        self.resample(config, index, rng);
        let fresh = std::mem::take(&mut self.fresh);
        let out = pair_from_resample(config, index, &fresh, derived);
        self.fresh = fresh;
        let (w, w_prime, delta) = out?;
        Ok((w, w_prime, delta, index))
    }

    /// A full [`PairSample`], including the closed-form conditional moments.
    pub fn exchangeable_pair_step<R: Rng + ?Sized>(
        &mut self,
        config: &SpinConfiguration,
        derived: &DerivedConstants,
        rng: &mut R,
    ) -> Result<PairSample> {
        let (w, w_prime, delta, index) = self.draw_pair(config, derived, rng)?;
        let (cond_mean, cond_second) = conditional_moments(config, derived)?;
        Ok(PairSample {
            w,
            w_prime,
            delta,
            index,
            cond_mean,
            cond_second,
        })
    }
}

/// `(W, W', Δ)` when spin `index` is replaced by `new_spin`, with
/// `S' = S + (σ_I' - σ_I)`; `config` is left unchanged.
pub fn pair_from_resample(
    config: &SpinConfiguration,
    index: usize,
    new_spin: &[f64],
    derived: &DerivedConstants,
) -> Result<(f64, f64, f64)> {
    let old = config.spin(index);
    let norm2_prime: f64 = config
        .total_spin()
        .iter()
        .zip(old.iter().zip(new_spin))
        .map(|(t, (o, v))| {
            let c = t + (v - o);
            c * c
        })
        .sum();
    let w = derived.w_from_norm2(config.total_norm2());
    let w_prime = derived.w_from_norm2(norm2_prime);
    let delta = w - w_prime;
    if delta.abs() > derived.delta_cap * (1.0 + 1e-12) {
        return Err(Error::consistency(
            "gibbs_dynamics",
            format!("|W - W'| = {} exceeds cap {}", delta.abs(), derived.delta_cap),
        ));
    }
    Ok((w, w_prime, delta))
}

/// Convenience wrapper around [`HeatBath::step`].
pub fn heat_bath_step<R: Rng + ?Sized>(
    config: &mut SpinConfiguration,
    i: usize,
    beta: f64,
    rng: &mut R,
) {
    HeatBath::new(config.dim(), beta).step(config, i, rng);
}

/// Convenience wrapper around [`HeatBath::exchangeable_pair_step`].
pub fn exchangeable_pair_step<R: Rng + ?Sized>(
    config: &SpinConfiguration,
    derived: &DerivedConstants,
    rng: &mut R,
) -> Result<PairSample> {
    HeatBath::new(config.dim(), derived.params.beta).exchangeable_pair_step(config, derived, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Ordered,
    Uniform,
}

impl std::str::FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" => Ok(Self::Ordered),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::Config(format!("unknown init '{other}' (expected ordered|uniform)"))),
        }
    }
}

/// Schedule for one chain: `burn_in` sweeps, then `sweeps` more with a record
/// every `thin` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: InitialState,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            burn_in: 200,
            thin: 5,
            init: InitialState::Ordered,
        }
    }
}

/// One thinned observation of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub chain_id: u64,
    /// Sweep count after burn-in at which the record was taken.
    pub sweep: usize,
    pub abs_s: f64,
    pub pair: PairSample,
}

impl ChainRecord {
    pub const CSV_HEADER: &'static str = "chain_id,sweep,abs_S,W,W_prime,delta,cond_mean,cond_second";

    pub fn csv_row(&self) -> String {
        let p = &self.pair;
        format!(
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.chain_id, self.sweep, self.abs_s, p.w, p.w_prime, p.delta, p.cond_mean, p.cond_second
        )
    }
}

/// A running Markov chain: configuration, update state and random stream.
#[derive(Debug, Clone)]
pub struct Chain {
    pub config: SpinConfiguration,
    pub derived: DerivedConstants,
    heat_bath: HeatBath,
    rng: ChainRng,
    chain_id: u64,
}

impl Chain {
    pub fn new(derived: DerivedConstants, init: InitialState, chain_id: u64, mut rng: ChainRng) -> Self {
        let p = derived.params;
        let config = match init {
            InitialState::Ordered => SpinConfiguration::ordered(p.dim, p.n),
            InitialState::Uniform => SpinConfiguration::uniform(p.dim, p.n, &mut rng),
        };
        Self {
            config,
            derived,
            heat_bath: HeatBath::new(p.dim, p.beta),
            rng,
            chain_id,
        }
    }

    pub fn sweep(&mut self) {
        self.heat_bath.sweep(&mut self.config, &mut self.rng);
    }

    pub fn sweeps(&mut self, count: usize) {
        (0..count).for_each(|_| self.sweep());
    }

    /// Pair draw without conditional moments.
    pub fn draw_pair(&mut self) -> Result<(f64, f64, f64, usize)> {
        self.heat_bath.draw_pair(&self.config, &self.derived, &mut self.rng)
    }

    pub fn pair_sample(&mut self) -> Result<PairSample> {
        self.heat_bath
            .exchangeable_pair_step(&self.config, &self.derived, &mut self.rng)
    }

    pub fn record(&mut self, sweep: usize) -> Result<ChainRecord> {
        Ok(ChainRecord {
            chain_id: self.chain_id,
            sweep,
            abs_s: self.config.total_norm(),
            pair: self.pair_sample()?,
        })
    }

    pub fn rng(&mut self) -> &mut ChainRng {
        &mut self.rng
    }
}

/// Runs one chain and returns its `sweeps / thin` records.
pub fn run_chain(
    derived: &DerivedConstants,
    settings: &ChainSettings,
    chain_id: u64,
    rng: ChainRng,
) -> Result<Vec<ChainRecord>> {
    if settings.thin == 0 {
        return Err(Error::Config("thin must be >= 1".into()));
    }
    let mut chain = Chain::new(*derived, settings.init, chain_id, rng);
    chain.sweeps(settings.burn_in);
    let mut records = Vec::with_capacity(settings.sweeps / settings.thin);
    for sweep in 1..=settings.sweeps {
        chain.sweep();
        if sweep % settings.thin == 0 {
            records.push(chain.record(sweep)?);
        }
    }
    Ok(records)
}

/// Runs `chains` independent chains in parallel, seeded by
/// [`seed_stream`]`(master_seed, chain_id)`, and concatenates their records in
/// chain order.
pub fn run_chains(
    derived: &DerivedConstants,
    settings: &ChainSettings,
    chains: usize,
    master_seed: u64,
) -> Result<Vec<ChainRecord>> {
    let per_chain: Vec<Result<Vec<ChainRecord>>> = (0..chains as u64)
        .into_par_iter()
        .map(|id| run_chain(derived, settings, id, seed_stream(master_seed, id)))
        .collect();
    let mut all = Vec::new();
    for records in per_chain {
        all.extend(records?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamiltonian, w_statistic, ModelParams};

    fn derived(n: usize) -> DerivedConstants {
        DerivedConstants::new(ModelParams::new(3, 5.0, n).unwrap()).unwrap()
    }

    #[test]
    fn ordered_configuration_functionals() {
        let c = SpinConfiguration::ordered(3, 100);
        assert_eq!(c.total_norm2(), 10_000.0);
        assert_eq!(hamiltonian(&c), -50.0);
        let w = w_statistic(&c, &derived(100));
        assert!((w - 8.978_765_556_450_938).abs() < 1e-9);
    }

    #[test]
    fn antipodal_and_orthogonal() {
        let e = |i| UnitVector::basis(3, i);
        let anti = SpinConfiguration::from_spins(&[e(0), UnitVector::new(vec![-1.0, 0.0, 0.0]).unwrap()]).unwrap();
        assert_eq!(hamiltonian(&anti), 0.0);
        let d = derived(2);
        assert!((w_statistic(&anti, &d) + 2f64.sqrt()).abs() < 1e-15);
        let orth = SpinConfiguration::from_spins(&[e(0), e(1), e(2)]).unwrap();
        assert!((hamiltonian(&orth) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn incremental_total_matches_recomputed() {
        let d = derived(50);
        let mut chain = Chain::new(d, InitialState::Uniform, 0, seed_stream(3, 0));
        for _ in 0..(REFRESH_INTERVAL / 50 - 1) {
            chain.sweep();
        }
        assert!(chain.config.cache_drift() <= 1e-8);
        assert!(chain.config.total_norm() <= 50.0);
    }

    #[test]
    fn identical_resample_gives_zero_delta() {
        let d = derived(10);
        let mut rng = seed_stream(5, 0);
        let c = SpinConfiguration::uniform(3, 10, &mut rng);
        let same = c.spin(4).to_vec();
        let (w, wp, delta) = pair_from_resample(&c, 4, &same, &d).unwrap();
        assert_eq!(delta, 0.0);
        assert_eq!(w, wp);
    }

    #[test]
    fn single_site_is_uniform() {
        let c = SpinConfiguration::ordered(3, 1);
        let law = site_conditional(&c, 0, 5.0);
        assert_eq!(law.kappa, 0.0);
    }

    #[test]
    fn record_accounting() {
        let d = derived(8);
        let s = ChainSettings {
            sweeps: 17,
            burn_in: 0,
            thin: 1,
            init: InitialState::Ordered,
        };
        assert_eq!(run_chain(&d, &s, 0, seed_stream(1, 0)).unwrap().len(), 17);
        let s = ChainSettings { thin: 5, ..s };
        let r = run_chain(&d, &s, 0, seed_stream(1, 0)).unwrap();
        assert_eq!(r.iter().map(|r| r.sweep).collect::<Vec<_>>(), vec![5, 10, 15]);
        let s = ChainSettings { thin: 0, ..s };
        assert!(run_chain(&d, &s, 0, seed_stream(1, 0)).is_err());
    }

    #[test]
    fn init_parses() {
        assert_eq!("uniform".parse::<InitialState>().unwrap(), InitialState::Uniform);
        assert!("hot".parse::<InitialState>().is_err());
    }
}
