//! Scale diagnostics and fixed-point iteration on a random well-separated
//! instance.

use adelim::embedding::{fixed_point, iterate, FixedPointOptions};
use adelim::models::random_separated;

fn main() -> adelim::Result<()> {
    let h = random_separated(3, 5, 0.05, 0.2, 7)?;
    let d = h.diagnostics();
    println!(
        "eps = {:.4}, eps' = {:.4}, convergent = {}",
        d.eps, d.eps_prime, d.convergent
    );
    if let (Some(r_min), Some(r_max)) = (d.ball_radius_min, d.ball_radius) {
        println!("invariant balls: r in [{r_min:.4}, {r_max:.4}]");
    }

    for k in 0..6 {
        let b = iterate(&h, k)?;
        println!(
            "k = {k}: residual / |Delta| = {:.3e}",
            b.residual() / h.delta_norm()
        );
    }

    let b = fixed_point(&h, FixedPointOptions::default())?;
    println!(
        "converged after {} iterations, residual {:.3e}",
        b.order(),
        b.residual()
    );
    Ok(())
}
