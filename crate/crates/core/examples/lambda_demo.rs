//! Λ system at the reference parameters: exact three-level dynamics against
//! the order-0 reduction, the Bloch Hamiltonian from B⁽⁴⁾ and the hermitized
//! Hamiltonian from B⁽¹⁰⁾.

use adelim::dynamics::{
    compare, default_envelope_window, propagate_effective, propagate_exact, time_grid,
};
use adelim::effective::{bloch_hamiltonian, hermitized_hamiltonian};
use adelim::embedding::iterate;
use adelim::linalg::{real, CVector};
use adelim::models::{lambda_hamiltonian, LambdaParams};

fn main() -> adelim::Result<()> {
    let params = LambdaParams::reference(1.0);
    let h = lambda_hamiltonian(&params)?;
    let d = h.diagnostics();
    println!(
        "eps = {:.5}, eps' = {:.5}, convergent = {}",
        d.eps, d.eps_prime, d.convergent
    );

    let times = time_grid(300.0 / params.big_delta, 3000);
    let psi0 = CVector::from_vec(vec![real(1.0), real(0.0), real(0.0)]);
    let alpha0 = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let exact = propagate_exact(&h.assemble(), &psi0, &times)?;
    let window = default_envelope_window(h.delta_norm());

    let runs = [
        ("order 0", bloch_hamiltonian(iterate(&h, 0)?.matrix(), &h)?),
        (
            "Bloch, B(4)",
            bloch_hamiltonian(iterate(&h, 4)?.matrix(), &h)?,
        ),
        (
            "hermitized, B(10)",
            hermitized_hamiltonian(iterate(&h, 10)?.matrix(), &h)?.into_matrix(),
        ),
    ];
    println!(
        "{:<20} {:>12} {:>14}",
        "reduction", "leakage", "envelope rms"
    );
    for (name, h_eff) in runs {
        let traj = propagate_effective(&h_eff, &alpha0, &times)?;
        let r = compare(&exact, &traj, &[0, 1], window)?;
        println!(
            "{name:<20} {:>12.3e} {:>14.3e}",
            r.norm_leakage, r.envelope_rms_error
        );
    }
    Ok(())
}
