//! Effective density matrix of a mixed slow state, evolved exactly and read
//! back through the dressed slow sector.

use adelim::effective::{density_correction, effective_density, EffectiveModel};
use adelim::embedding::{fixed_point, FixedPointOptions};
use adelim::linalg::{mat_exp, real, spectral_norm, CMatrix, C64};
use adelim::models::{lambda_hamiltonian, LambdaParams};

fn main() -> adelim::Result<()> {
    let h = lambda_hamiltonian(&LambdaParams::reference(1.0))?;
    let full = h.assemble();
    let model = EffectiveModel::build(fixed_point(&h, FixedPointOptions::default())?, &h)?;
    let x = &model.x;
    let p = model.p();

    // 70/30 mixture of the two dressed slow states.
    let mut weights = CMatrix::zeros(3, 3);
    weights[(0, 0)] = real(0.7);
    weights[(1, 1)] = real(0.3);
    let rho0 = x * weights * x.adjoint();

    for t in [0.0, 50.0, 150.0, 300.0] {
        let u = mat_exp(full.matrix(), C64::new(0.0, -t))?;
        let rho = &u * &rho0 * u.adjoint();
        let rho_eff = effective_density(&rho, &rho0, x, p)?;
        let correction = density_correction(&full, &rho, &rho0, x, p)?;
        println!(
            "t = {t:>5}: tr rho_eff = {:.12}, populations ({:.4}, {:.4}), |correction| = {:.1e}",
            rho_eff.trace().re,
            rho_eff[(0, 0)].re,
            rho_eff[(1, 1)].re,
            spectral_norm(&correction)
        );
    }
    Ok(())
}
