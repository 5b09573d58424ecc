//! Stein bound terms from stationary chains at a few system sizes.

use mfon::stein::{binned_ratio_term, stein_terms};
use mfon::{run_chains, ChainSettings, DerivedConstants, ModelParams};

fn main() -> mfon::Result<()> {
    let settings = ChainSettings {
        sweeps: 5000,
        burn_in: 500,
        thin: 2,
        ..ChainSettings::default()
    };
    println!("     n   ratio    third  remainder   W bound   K bound  binned   2lambda-scaled E(D^2)");
    for n in [64, 256, 1024] {
        let derived = DerivedConstants::new(ModelParams::new(3, 5.0, n)?)?;
        let records = run_chains(&derived, &settings, 2, 11)?;
        let t = stein_terms(&records, &derived)?;
        println!(
            "{n:>6} {:>7.4} {:>8.4} {:>10.4} {:>9.4} {:>9.4} {:>7.4}   {:.4} (B^2 = {:.4})",
            t.ratio_term,
            t.third_moment_term,
            t.remainder_term,
            t.wasserstein_bound,
            t.kolmogorov_bound,
            binned_ratio_term(&records, &derived, 100)?,
            t.variance_estimate,
            derived.b2
        );
    }
    Ok(())
}
