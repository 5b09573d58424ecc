//! Exact law of |S_n| and the Kolmogorov distance of W_n/B to the normal.

use mfon::oracle::{
    cdf_at_z, gibbs_radial_law, importance_sampling, kolmogorov_from_law, radial_density_hankel, radial_density_product,
    z_of_r, Proposal,
};
use mfon::{seed_stream, DerivedConstants, ModelParams, RadialGrid};

fn main() -> mfon::Result<()> {
    let two = radial_density_product(2, 3, RadialGrid::with_default(2)?)?;
    println!("n = 2, N = 3: density at r = {:.3} is {:.6} (r/2 = {:.6})", two.r[150], two.density[150], two.r[150] / 2.0);

    let eight = radial_density_product(8, 3, RadialGrid::with_default(8)?)?;
    let i = 300;
    println!(
        "n = 8, N = 3 at r = {:.3}: recursion {:.8}, Hankel {:.8}",
        eight.r[i],
        eight.density[i],
        radial_density_hankel(8, 3, eight.r[i])?
    );

    for n in [16, 64, 256] {
        let d = DerivedConstants::new(ModelParams::new(3, 5.0, n)?)?;
        let law = gibbs_radial_law(&d, RadialGrid::with_default(n)?)?;
        println!(
            "n = {n:>3}: d_K = {:.5}  P(W/B <= 0) = {:.5}",
            kolmogorov_from_law(&law, &d)?,
            cdf_at_z(&law, &d, 0.0)
        );
    }

    // small-n check of the tilted law against weighted sampling
    let d = DerivedConstants::new(ModelParams::new(3, 5.0, 12)?)?;
    let law = gibbs_radial_law(&d, RadialGrid::with_default(12)?)?;
    println!(
        "n = 12 oracle: E[W/B] = {:.4}  P(W/B <= 0) = {:.4}",
        law.expect(|r| z_of_r(r, &d)),
        cdf_at_z(&law, &d, 0.0)
    );
    for proposal in [Proposal::Product, Proposal::MeanField] {
        let est = importance_sampling(&d, proposal, 200_000, &mut seed_stream(3, 0))?;
        println!(
            "{proposal:?}: E[W/B] = {:.4} +- {:.4}  P(W/B <= 0) = {:.4} +- {:.4}  ess {:.0}",
            est.mean_z, est.mean_z_se, est.p_nonpositive, est.p_nonpositive_se, est.effective_sample_size
        );
    }
    Ok(())
}
