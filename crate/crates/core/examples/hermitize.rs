//! Hermitized effective Hamiltonian: norm-conserving slow dynamics from an
//! approximate wave operator, compared with the non-hermitian Bloch form.

use adelim::dynamics::{propagate_effective, time_grid};
use adelim::effective::{bloch_hamiltonian, hermitized_hamiltonian, normalizers};
use adelim::embedding::iterate;
use adelim::linalg::{hermiticity_defect, inverse, real, spectral_norm, CVector};
use adelim::models::{lambda_hamiltonian, LambdaParams};

fn main() -> adelim::Result<()> {
    let h = lambda_hamiltonian(&LambdaParams::reference(1.0))?;
    let alpha0 = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let times = time_grid(300.0, 3000);

    for k in [2, 4, 10] {
        let b = iterate(&h, k)?;
        let bloch = bloch_hamiltonian(b.matrix(), &h)?;
        let herm = hermitized_hamiltonian(b.matrix(), &h)?;
        // S h_bloch S⁻¹ approaches h_V as B approaches a solution.
        let (s, _) = normalizers(b.matrix())?;
        let similar = s.matrix() * &bloch * inverse(s.matrix())?;
        let max_norm = |m| {
            let traj = propagate_effective(m, &alpha0, &times)?;
            Ok::<_, adelim::Error>(
                traj.norms()
                    .iter()
                    .map(|n| (1.0 - n).abs())
                    .fold(0.0, f64::max),
            )
        };
        println!(
            "B({k:>2}): defect(h_bloch) = {:.1e}, |S h S^-1 - h_V| = {:.1e}, leakage bloch {:.3e}, hermitized {:.1e}",
            hermiticity_defect(&bloch),
            spectral_norm(&(similar - herm.matrix())),
            max_norm(&bloch)?,
            max_norm(herm.matrix())?,
        );
    }
    Ok(())
}
