//! Solves x = β f(x) and prints the derived constants for a few models.

use mfon::model::{solve_b, variance_b2};
use mfon::special::bessel_ratio;
use mfon::{DerivedConstants, ModelParams};

fn main() -> mfon::Result<()> {
    for (dim, beta) in [(2, 2.5), (3, 5.0), (3, 3.05), (4, 8.0), (10, 12.0)] {
        let b = solve_b(dim, beta)?;
        let residual = b - beta * bessel_ratio(b, dim)?;
        println!(
            "N = {dim:>2} beta = {beta:>5}: b = {b:.12}  residual = {residual:+.1e}  B^2 = {:.10}",
            variance_b2(dim, beta, b)?
        );
    }

    let c = DerivedConstants::new(ModelParams::new(3, 5.0, 100)?)?;
    println!("\nN = 3, beta = 5, n = 100");
    println!("  f'(b)       = {:.12}", c.f_prime_b);
    println!("  lambda      = {:.12}", c.lambda);
    println!("  |Delta| cap = {:.12}", c.delta_cap);
    println!("  W at |S| = n: {:.12}", c.w_from_norm2(100.0 * 100.0));

    match ModelParams::new(3, 2.0, 100) {
        Err(e) => println!("\nbeta <= N is rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
