//! Benchmark instances: the three-level Λ system and randomized
//! well-separated Hamiltonians.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, real, spectral_norm, CMatrix, HermMatrix, C64};
use crate::partition::PartitionedHamiltonian;

/// Λ-system parameters in angular-frequency units.
///
/// Two slow levels `|a⟩, |b⟩` at `∓δ/2` couple to one excited level at
/// `Δ̄` through the fields `Ω_a`, `Ω_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaParams {
    /// Two-photon detuning δ.
    pub delta: f64,
    pub omega_a: C64,
    pub omega_b: C64,
    /// One-photon detuning Δ̄.
    pub big_delta: f64,
}

impl LambdaParams {
    pub fn new(delta: f64, omega_a: C64, omega_b: C64, big_delta: f64) -> Result<Self> {
        if big_delta == 0.0 || !big_delta.is_finite() {
            return Err(Error::BigDeltaZero);
        }
        Ok(Self {
            delta,
            omega_a,
            omega_b,
            big_delta,
        })
    }

    /// δ = −0.0175 Δ̄, Ω_a = 0.4 Δ̄, Ω_b = 0.3 Δ̄.
    pub fn reference(big_delta: f64) -> Self {
        Self {
            delta: -0.0175 * big_delta,
            omega_a: real(0.4 * big_delta),
            omega_b: real(0.3 * big_delta),
            big_delta,
        }
    }

    /// `ε = δ/Δ̄`.
    pub fn epsilon(&self) -> f64 {
        self.delta / self.big_delta
    }

    /// The 1×2 coupling row `Ω = ½(Ω_a, Ω_b)`.
    pub fn coupling_row(&self) -> CMatrix {
        CMatrix::from_row_slice(1, 2, &[self.omega_a * 0.5, self.omega_b * 0.5])
    }
}

/// `ω = −(δ/2)σ₃`, `Ω = ½(Ω_a, Ω_b)`, `Δ = (Δ̄)`.
pub fn lambda_hamiltonian(params: &LambdaParams) -> Result<PartitionedHamiltonian> {
    let half = params.delta / 2.0;
    PartitionedHamiltonian::new(
        HermMatrix::from_real_diagonal(&[-half, half]),
        params.coupling_row(),
        HermMatrix::from_real_diagonal(&[params.big_delta]),
    )
}

/// Coefficients `(c_α, c_β)` of a linear functional `h(α, β) = c_α α + c_β β`.
pub type LinearRow = [C64; 2];

/// Rows `h_1 … h_order` of the linear invariant-manifold expansion
/// `γ = Σ εᵏ hₖ(α, β)` with `ε = δ/Δ̄`.
///
/// Starting from `h_1 = −(Ω_a α + Ω_b β)/(2δ)`,
///
/// ```text
///     h_{k+1} = ½(β∂_β − α∂_α)h_k + (1/2δ) Σ_{l=1}^{k−1} h_{k−l} (Ω_a*∂_α + Ω_b*∂_β) h_l
/// ```
///
/// On linear functionals `β∂_β − α∂_α` flips the sign of `c_α`, and
/// `Ω_a*∂_α + Ω_b*∂_β` contracts a row to the scalar `Ω_a* c_α + Ω_b* c_β`.
pub fn lambda_manifold_coefficients(params: &LambdaParams, order: usize) -> Result<Vec<LinearRow>> {
    let delta = params.delta;
    if delta == 0.0 {
        return Err(Error::DeltaZero);
    }
    let mut rows: Vec<LinearRow> = Vec::with_capacity(order);
    if order == 0 {
        return Ok(rows);
    }
    let first = -1.0 / (2.0 * delta);
    rows.push([params.omega_a * first, params.omega_b * first]);
    let contract = |r: &LinearRow| params.omega_a.conj() * r[0] + params.omega_b.conj() * r[1];
    for k in 1..order {
        // rows[i] holds h_{i+1}
        let hk = rows[k - 1];
        let mut next = [-hk[0] * 0.5, hk[1] * 0.5];
        for l in 1..k {
            let s = contract(&rows[l - 1]) / (2.0 * delta);
            let outer = rows[k - l - 1];
            next[0] += outer[0] * s;
            next[1] += outer[1] * s;
        }
        rows.push(next);
    }
    Ok(rows)
}

fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // Fix column phases so the distribution is Haar.
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn herm_with_spectrum(rng: &mut impl Rng, eigenvalues: &[f64]) -> HermMatrix {
    let n = eigenvalues.len();
    let u = random_unitary(rng, n);
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eigenvalues.iter().map(|&l| real(l)),
    ));
    HermMatrix::hermitian_part(&(&u * d * u.adjoint())).expect("finite square")
}

/// A random `p`-slow/`q`-fast instance with `‖ω‖ = 1` and the requested
/// `ε = ‖Δ⁻¹‖‖ω‖`, `ε′ = ‖Δ⁻¹‖‖Ω‖`.
///
/// The spectrum of ω is drawn from `[−1, 1]` and that of Δ from
/// `±[1/ε, 2/ε]`, so for `ε < 1` the two never overlap. Deterministic in
/// `seed`.
pub fn random_separated(
    p: usize,
    q: usize,
    eps: f64,
    eps_prime: f64,
    seed: u64,
) -> Result<PartitionedHamiltonian> {
    if p == 0 || q == 0 {
        return Err(Error::BadTargets(format!(
            "block dimensions must be positive (p = {p}, q = {q})"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::BadTargets(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if !(eps_prime.is_finite() && eps_prime >= 0.0) {
        return Err(Error::BadTargets(format!(
            "eps_prime must be nonnegative and finite, got {eps_prime}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut slow: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let pin = rng.random_range(0..p);
    slow[pin] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };

    let mut fast: Vec<f64> = (0..q)
        .map(|_| {
            let mag = rng.random_range(1.0..2.0) / eps;
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let pin = rng.random_range(0..q);
    fast[pin] = fast[pin].signum() / eps;

    let omega = herm_with_spectrum(&mut rng, &slow);
    let delta = herm_with_spectrum(&mut rng, &fast);

    let g = CMatrix::from_fn(q, p, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let target = eps_prime / eps;
    let coupling = if target == 0.0 {
        CMatrix::zeros(q, p)
    } else {
        let n = spectral_norm(&g);
        g * real(target / n)
    };
    PartitionedHamiltonian::new(omega, coupling, delta)
}

/// A random `q×p` matrix with spectral norm `norm`.
pub fn random_matrix_with_norm(rows: usize, cols: usize, norm: f64, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = spectral_norm(&g);
    if n == 0.0 {
        g
    } else {
        g * real(norm / n)
    }
}

/// A Haar-random `n×n` unitary.
pub fn random_unitary_seeded(n: usize, seed: u64) -> CMatrix {
    random_unitary(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::perturbative_series;
    use crate::linalg::unitarity_defect;

    #[test]
    fn lambda_blocks() {
        let params = LambdaParams::reference(1.0);
        let h = lambda_hamiltonian(&params).unwrap();
        let m = h.assemble();
        let m = m.matrix();
        assert_eq!(m[(0, 0)], real(0.00875));
        assert_eq!(m[(1, 1)], real(-0.00875));
        assert_eq!(m[(2, 2)], real(1.0));
        assert_eq!(m[(2, 0)], real(0.2));
        assert_eq!(m[(2, 1)], real(0.15));
        assert_eq!(m[(0, 2)], real(0.2));
        assert_eq!(m[(0, 1)], real(0.0));
    }

    #[test]
    fn lambda_sign_conventions_with_complex_fields() {
        let params = LambdaParams::new(0.3, c(0.1, 0.2), c(-0.4, 0.05), 5.0).unwrap();
        let m = lambda_hamiltonian(&params)
            .unwrap()
            .assemble()
            .into_matrix();
        assert_eq!(m[(0, 0)], real(-0.15));
        assert_eq!(m[(1, 1)], real(0.15));
        assert_eq!(m[(2, 0)], c(0.05, 0.1));
        assert_eq!(m[(0, 2)], c(0.05, -0.1));
        assert_eq!(m[(1, 2)], c(-0.2, -0.025));
    }

    #[test]
    fn lambda_edge_cases() {
        assert_eq!(
            LambdaParams::new(0.1, real(1.0), real(1.0), 0.0),
            Err(Error::BigDeltaZero)
        );
        let h = lambda_hamiltonian(&LambdaParams::new(0.1, real(0.0), real(0.0), 1.0).unwrap())
            .unwrap();
        assert_eq!(h.diagnostics().eps_prime, 0.0);
        let h = lambda_hamiltonian(&LambdaParams::new(0.0, real(0.3), real(0.2), 1.0).unwrap())
            .unwrap();
        assert!(h.omega().iter().all(|z| z.norm() == 0.0));
        let s = perturbative_series(&h, 2).unwrap();
        assert!(s.terms[1].iter().all(|z| z.norm() == 0.0));
        let p = LambdaParams::new(0.0, real(0.3), real(0.2), 1.0).unwrap();
        assert_eq!(lambda_manifold_coefficients(&p, 3), Err(Error::DeltaZero));
    }

    #[test]
    fn manifold_closed_forms() {
        let p = LambdaParams::new(-0.02, c(0.4, 0.1), c(0.3, -0.2), 1.0).unwrap();
        let rows = lambda_manifold_coefficients(&p, 2).unwrap();
        let d = p.delta;
        let h1 = [-p.omega_a / (2.0 * d), -p.omega_b / (2.0 * d)];
        let h2 = [p.omega_a / (4.0 * d), -p.omega_b / (4.0 * d)];
        for i in 0..2 {
            assert!((rows[0][i] - h1[i]).norm() < 1e-12 * h1[i].norm());
            assert!((rows[1][i] - h2[i]).norm() < 1e-12 * h2[i].norm());
        }
    }

    #[test]
    fn random_separated_hits_targets() {
        let h = random_separated(3, 5, 0.05, 0.2, 7).unwrap();
        let d = h.diagnostics();
        assert!((d.eps - 0.05).abs() < 1e-10);
        assert!((d.eps_prime - 0.2).abs() < 1e-10);
        assert!(d.convergent);
        assert_eq!(h.p(), 3);
        assert_eq!(h.q(), 5);
    }

    #[test]
    fn random_separated_is_deterministic() {
        let a = random_separated(2, 3, 0.1, 0.3, 11).unwrap();
        let b = random_separated(2, 3, 0.1, 0.3, 11).unwrap();
        assert_eq!(a, b);
        let c = random_separated(2, 3, 0.1, 0.3, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_separated_zero_coupling() {
        let h = random_separated(2, 2, 0.1, 0.0, 3).unwrap();
        assert!(h.coupling().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn random_separated_bad_targets() {
        assert!(matches!(
            random_separated(0, 2, 0.1, 0.1, 1),
            Err(Error::BadTargets(_))
        ));
        assert!(matches!(
            random_separated(2, 2, 0.0, 0.1, 1),
            Err(Error::BadTargets(_))
        ));
        assert!(matches!(
            random_separated(2, 2, 0.1, -1.0, 1),
            Err(Error::BadTargets(_))
        ));
        assert!(matches!(
            random_separated(2, 2, f64::NAN, 0.1, 1),
            Err(Error::BadTargets(_))
        ));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        for n in [1, 2, 7] {
            assert!(unitarity_defect(&random_unitary_seeded(n, n as u64)) < 1e-13);
        }
    }
}
