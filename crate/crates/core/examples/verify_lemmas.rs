//! Checks the Bessel-ratio inequalities on a log grid for N = 2..10.

use mfon::special::{log_grid, verify_lemma_bounds};

fn main() -> mfon::Result<()> {
    let grid = log_grid(1e-6, 200.0, 100_000);
    for dim in 2..=10 {
        let report = verify_lemma_bounds(dim, &grid)?;
        println!("N = {dim}: {}", if report.pass { "all hold" } else { "VIOLATED" });
        for c in &report.checks {
            println!("  {:<18} {:<34} min slack {:>12.4e} at x = {:.3e}", c.name, c.statement, c.min_slack, c.argmin);
        }
    }
    Ok(())
}
