//! Perturbative and Sylvester expansions of B on the Λ system, residual of
//! each partial sum.

use adelim::embedding::{perturbative_series, sylvester_series};
use adelim::models::{lambda_hamiltonian, LambdaParams};

fn main() -> adelim::Result<()> {
    let h = lambda_hamiltonian(&LambdaParams::reference(1.0))?;
    let perturbative = perturbative_series(&h, 6)?.partial_residuals(&h)?;
    let sylvester = sylvester_series(&h, 5)?.partial_residuals(&h)?;

    println!("{:>5} {:>16} {:>16}", "terms", "perturbative", "sylvester");
    for (n, (p, s)) in perturbative.iter().zip(&sylvester).enumerate() {
        println!("{:>5} {p:>16.3e} {s:>16.3e}", n + 1);
    }
    Ok(())
}
