//! Unitary block diagonalization from a converged wave operator, the
//! triangular intermediate form and the Sylvester decoupler.

use adelim::effective::{
    dressed_projector, sylvester_decouple, sylvester_diagonalizer, triangularize, EffectiveModel,
};
use adelim::embedding::{fixed_point, FixedPointOptions};
use adelim::linalg::{herm_eigenvalues, inverse, spectral_norm, split_blocks, unitarity_defect};
use adelim::models::{lambda_hamiltonian, random_separated, LambdaParams};

fn main() -> adelim::Result<()> {
    let h = random_separated(2, 4, 0.1, 0.3, 11)?;
    let full = h.assemble();
    let wave = fixed_point(&h, FixedPointOptions::default())?;
    let model = EffectiveModel::build(wave, &h)?;
    let p = model.p();

    let rotated = model.x.adjoint() * full.matrix() * &model.x;
    let (_, upper, lower, _) = split_blocks(&rotated, p);
    println!(
        "|X^-1 H X| off-diagonal: {:.2e}, {:.2e}",
        spectral_norm(&upper),
        spectral_norm(&lower)
    );
    println!("X unitarity defect: {:.2e}", unitarity_defect(&model.x));

    let tri = triangularize(model.source.matrix(), &h, 1e-10)?;
    println!(
        "triangular form, lower-left block: {:.2e}",
        tri.lower_left_norm(p)
    );

    // With q > 1 the fast block of the triangular form is S̃² h_γ S̃⁻², not
    // h_γ, so X_Y leaves an upper-right remainder. For q = 1 it is exact.
    for (name, inst) in [
        ("random, q = 4", h.clone()),
        (
            "lambda, q = 1",
            lambda_hamiltonian(&LambdaParams::reference(1.0))?,
        ),
    ] {
        let m = EffectiveModel::build(fixed_point(&inst, FixedPointOptions::default())?, &inst)?;
        let y = sylvester_decouple(&m)?;
        let x_y = sylvester_diagonalizer(m.source.matrix(), &y)?;
        let decoupled = inverse(&x_y)? * inst.assemble().matrix() * &x_y;
        let (_, upper, lower, _) = split_blocks(&decoupled, m.p());
        println!(
            "Sylvester route ({name}) off-diagonal: {:.2e}, {:.2e}",
            spectral_norm(&upper),
            spectral_norm(&lower)
        );
    }

    let proj = dressed_projector(&model.x, p)?;
    println!(
        "|P_X^2 - P_X| = {:.2e}",
        spectral_norm(&(&proj * &proj - &proj))
    );

    println!("sigma(H)     = {:?}", herm_eigenvalues(&full)?);
    println!("sigma(h_alpha) = {:?}", herm_eigenvalues(&model.h_alpha)?);
    println!("sigma(h_gamma) = {:?}", herm_eigenvalues(&model.h_gamma)?);
    Ok(())
}
