//! Runs one heat-bath chain and watches |S|/n settle near b/beta.

use mfon::gibbs::Chain;
use mfon::stein::empirical_kolmogorov;
use mfon::{seed_stream, DerivedConstants, InitialState, ModelParams};

fn main() -> mfon::Result<()> {
    let n = 200;
    let derived = DerivedConstants::new(ModelParams::new(3, 5.0, n)?)?;
    let mut chain = Chain::new(derived, InitialState::Uniform, 0, seed_stream(7, 0));
    println!("target |S|/n = b/beta = {:.4}", derived.b / 5.0);
    for block in 0..6 {
        chain.sweeps(50);
        println!("after {:>3} sweeps: |S|/n = {:.4}", 50 * (block + 1), chain.config.total_norm() / n as f64);
    }

    let mut z = Vec::new();
    for _ in 0..5000 {
        chain.sweep();
        z.push(chain.config.total_norm2());
    }
    let z: Vec<f64> = z.iter().map(|&s2| derived.w_from_norm2(s2) / derived.b_std()).collect();
    println!("d_K(W/B, Z) over 5000 sweeps: {:.4}", empirical_kolmogorov(&z));

    let (w, w_prime, delta, i) = chain.draw_pair()?;
    println!("pair at site {i}: W = {w:.5}, W' = {w_prime:.5}, Delta = {delta:.2e} (cap {:.3})", derived.delta_cap);
    Ok(())
}
