//! Λ-system invariant-manifold coefficients h_k against the perturbative
//! terms B_(k): the two expansions agree term by term once h_k is scaled by
//! ε^k with ε = δ/Δ̄.

use adelim::embedding::perturbative_series;
use adelim::linalg::{spectral_norm, CMatrix};
use adelim::models::{lambda_hamiltonian, lambda_manifold_coefficients, LambdaParams};

fn main() -> adelim::Result<()> {
    let params = LambdaParams::reference(1.0);
    let h = lambda_hamiltonian(&params)?;
    let order = 6;
    let rows = lambda_manifold_coefficients(&params, order)?;
    let series = perturbative_series(&h, order)?;
    let eps = params.epsilon();

    for (k, (row, term)) in rows.iter().zip(&series.terms).enumerate() {
        let scale = eps.powi(k as i32 + 1);
        let scaled = CMatrix::from_row_slice(1, 2, &[row[0] * scale, row[1] * scale]);
        println!(
            "k = {}: B_(k) = ({:+.6e}, {:+.6e}), relative gap {:.1e}",
            k + 1,
            term[(0, 0)].re,
            term[(0, 1)].re,
            spectral_norm(&(scaled - term)) / spectral_norm(term)
        );
    }
    Ok(())
}
