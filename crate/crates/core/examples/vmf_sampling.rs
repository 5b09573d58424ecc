//! Draws von Mises-Fisher samples and compares their moments with the closed forms.

use mfon::sphere::{radial_second_moment_quadrature, vmf_moments, VmfSampler};
use mfon::{seed_stream, UnitVector, VmfLaw};

fn main() -> mfon::Result<()> {
    let mut rng = seed_stream(42, 0);
    let m = 100_000;
    for dim in [2, 3, 4] {
        for kappa in [0.5, 2.0, 10.0] {
            let law = VmfLaw::new(UnitVector::basis(dim, 0), kappa)?;
            let exact = vmf_moments(&law)?;
            let sampler = VmfSampler::new(dim);
            let (mut c1, mut c2) = (0.0, 0.0);
            for _ in 0..m {
                let c = sampler.sample_cosine(kappa, &mut rng);
                c1 += c;
                c2 += c * c;
            }
            println!(
                "N = {dim} kappa = {kappa:>4}: mean cos {:.4} (exact {:.4})  E cos^2 {:.4} (exact {:.4}, quadrature {:.4})",
                c1 / m as f64,
                exact.mean[0],
                c2 / m as f64,
                exact.radial,
                radial_second_moment_quadrature(kappa, dim)
            );
        }
    }
    Ok(())
}
