//! Effective Hamiltonians and the explicit block diagonalization built from a
//! wave operator `B`.
//!
//! The Bloch Hamiltonian `ω + Ω†B` is generally non-hermitian. With the
//! normalizers `S = √(1 + B†B)` and `S̃ = √(1 + BB†)`,
//!
//! ```text
//!     h_α = S⁻¹ (ω + Ω†B + B†Ω + B†ΔB) S⁻¹
//!     h_γ = S̃⁻¹ (Δ − ΩB† − BΩ† + BωB†) S̃⁻¹
//!     X   = ((1, −B†), (B, 1)) · diag(S⁻¹, S̃⁻¹)
//! ```
//!
//! are hermitian resp. unitary for every `B`, and `X⁻¹HX = diag(h_α, h_γ)`
//! once `B` solves the embedding equation.

use crate::embedding::{residual, WaveOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    block2x2, block_diag, herm_inv_sqrt, herm_sqrt, identity, inverse, spectral_norm,
    sylvester_solve, unitarity_defect, CMatrix, HermMatrix,
};
use crate::partition::PartitionedHamiltonian;

/// Unitarity defect above which [`dressed_projector`] refuses its input.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Normalization traces at or below this count as an empty slow sector.
pub const SLOW_TRACE_TOL: f64 = 1e-12;

fn check_b(op: &'static str, b: &CMatrix, h: &PartitionedHamiltonian) -> Result<()> {
    if b.shape() != (h.q(), h.p()) {
        return Err(Error::DimensionMismatch {
            op,
            expected: (h.q(), h.p()),
            found: b.shape(),
        });
    }
    Ok(())
}

/// `S = √(1 + B†B)`, `S̃ = √(1 + BB†)` and their inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizers {
    pub s: HermMatrix,
    pub s_inv: HermMatrix,
    pub s_tilde: HermMatrix,
    pub s_tilde_inv: HermMatrix,
}

impl Normalizers {
    pub fn new(b: &CMatrix) -> Result<Self> {
        let (q, p) = b.shape();
        let gram = HermMatrix::hermitian_part(&(identity(p) + b.adjoint() * b))?;
        let gram_tilde = HermMatrix::hermitian_part(&(identity(q) + b * b.adjoint()))?;
        Ok(Self {
            s: herm_sqrt(&gram)?,
            s_inv: herm_inv_sqrt(&gram)?,
            s_tilde: herm_sqrt(&gram_tilde)?,
            s_tilde_inv: herm_inv_sqrt(&gram_tilde)?,
        })
    }
}

/// `(S_B, S̃_B)`.
pub fn normalizers(b: &CMatrix) -> Result<(HermMatrix, HermMatrix)> {
    let n = Normalizers::new(b)?;
    Ok((n.s, n.s_tilde))
}

/// `ω + Ω†B`.
pub fn bloch_hamiltonian(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<CMatrix> {
    check_b("bloch_hamiltonian", b, h)?;
    Ok(h.omega() + h.coupling().adjoint() * b)
}

/// `Δ − BΩ†`, the fast block of `X_B⁻¹ H X_B` with `X_B = 1 + B`.
pub fn fast_bloch_hamiltonian(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<CMatrix> {
    check_b("fast_bloch_hamiltonian", b, h)?;
    Ok(h.delta() - b * h.coupling().adjoint())
}

fn slow_middle(b: &CMatrix, h: &PartitionedHamiltonian) -> CMatrix {
    let ob = h.coupling().adjoint() * b;
    h.omega() + &ob + ob.adjoint() + b.adjoint() * h.delta() * b
}

fn fast_middle(b: &CMatrix, h: &PartitionedHamiltonian) -> CMatrix {
    let bo = b * h.coupling().adjoint();
    h.delta() - &bo - bo.adjoint() + b * h.omega() * b.adjoint()
}

/// `h_V[B]` with `V = 1`: hermitian for any `B`, exact or approximate.
pub fn hermitized_hamiltonian(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<HermMatrix> {
    check_b("hermitized_hamiltonian", b, h)?;
    let n = Normalizers::new(b)?;
    HermMatrix::new(n.s_inv.matrix() * slow_middle(b, h) * n.s_inv.matrix())
}

/// `V h_V[B] V†` for a constant unitary `V` on the slow block.
pub fn hermitized_hamiltonian_with_gauge(
    b: &CMatrix,
    h: &PartitionedHamiltonian,
    v: &CMatrix,
) -> Result<HermMatrix> {
    if v.shape() != (h.p(), h.p()) {
        return Err(Error::DimensionMismatch {
            op: "hermitized_hamiltonian_with_gauge",
            expected: (h.p(), h.p()),
            found: v.shape(),
        });
    }
    let defect = unitarity_defect(v);
    if defect > UNITARITY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let hv = hermitized_hamiltonian(b, h)?;
    HermMatrix::new(v * hv.matrix() * v.adjoint())
}

/// Hermitian fast-sector companion `h_γ`.
pub fn fast_companion(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<HermMatrix> {
    check_b("fast_companion", b, h)?;
    let n = Normalizers::new(b)?;
    HermMatrix::new(n.s_tilde_inv.matrix() * fast_middle(b, h) * n.s_tilde_inv.matrix())
}

/// The unitary `X = ((1, −B†), (B, 1)) · diag(S⁻¹, S̃⁻¹)`.
pub fn diagonalizer(b: &CMatrix) -> Result<CMatrix> {
    let n = Normalizers::new(b)?;
    Ok(diagonalizer_from(b, &n))
}

fn diagonalizer_from(b: &CMatrix, n: &Normalizers) -> CMatrix {
    let (q, p) = b.shape();
    let rotation = block2x2(&identity(p), &-b.adjoint(), b, &identity(q));
    rotation * block_diag(n.s_inv.matrix(), n.s_tilde_inv.matrix())
}

/// `X⁻¹ = diag(S⁻¹, S̃⁻¹) · ((1, B†), (−B, 1))`.
pub fn diagonalizer_inverse(b: &CMatrix) -> Result<CMatrix> {
    let (q, p) = b.shape();
    let n = Normalizers::new(b)?;
    let rotation = block2x2(&identity(p), &b.adjoint(), &-b, &identity(q));
    Ok(block_diag(n.s_inv.matrix(), n.s_tilde_inv.matrix()) * rotation)
}

/// Block upper-triangular similarity transform of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangular {
    /// `L H L⁻¹` with `L = ((S, 0), (−S̃B, S̃))`.
    pub upper: CMatrix,
    /// Upper-right block `S Ω† S̃⁻¹`.
    pub offdiag: CMatrix,
}

impl Triangular {
    /// Norm of the lower-left block, zero for an exact solution.
    pub fn lower_left_norm(&self, p: usize) -> f64 {
        let n = self.upper.nrows();
        spectral_norm(&self.upper.view((p, 0), (n - p, p)).into_owned())
    }
}

/// Triangularizes `H` with a wave operator whose residual is at most
/// `tol·‖Δ‖`.
///
/// The lower-right block is `S̃(Δ − BΩ†)S̃⁻¹ = S̃² h_γ S̃⁻²`. It coincides
/// with the hermitian `h_γ` only when `S̃` commutes with `h_γ`, e.g. for
/// `q = 1`.
pub fn triangularize(b: &CMatrix, h: &PartitionedHamiltonian, tol: f64) -> Result<Triangular> {
    check_b("triangularize", b, h)?;
    let res = residual(b, h)?;
    let threshold = tol * h.delta_norm();
    if res > threshold {
        return Err(Error::NotASolution {
            residual: res,
            threshold,
        });
    }
    let (p, q) = (h.p(), h.q());
    let n = Normalizers::new(b)?;
    let left = block2x2(
        n.s.matrix(),
        &CMatrix::zeros(p, q),
        &-(n.s_tilde.matrix() * b),
        n.s_tilde.matrix(),
    );
    let right = block2x2(
        n.s_inv.matrix(),
        &CMatrix::zeros(p, q),
        &(b * n.s_inv.matrix()),
        n.s_tilde_inv.matrix(),
    );
    let upper = left * h.assemble().matrix() * right;
    let offdiag = n.s.matrix() * h.coupling().adjoint() * n.s_tilde_inv.matrix();
    Ok(Triangular { upper, offdiag })
}

/// Everything derived from one wave operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    /// `ω + Ω†B`.
    pub h_bloch: CMatrix,
    pub h_alpha: HermMatrix,
    pub h_gamma: HermMatrix,
    pub s_b: HermMatrix,
    pub s_b_tilde: HermMatrix,
    /// Unitary block diagonalizer.
    pub x: CMatrix,
    /// `S Ω† S̃⁻¹`, the off-diagonal block left by the triangular form.
    pub coupling_block: CMatrix,
    pub source: WaveOperator,
}

impl EffectiveModel {
    pub fn build(source: WaveOperator, h: &PartitionedHamiltonian) -> Result<Self> {
        let b = source.matrix();
        check_b("EffectiveModel::build", b, h)?;
        let n = Normalizers::new(b)?;
        let h_alpha = HermMatrix::new(n.s_inv.matrix() * slow_middle(b, h) * n.s_inv.matrix())?;
        let h_gamma =
            HermMatrix::new(n.s_tilde_inv.matrix() * fast_middle(b, h) * n.s_tilde_inv.matrix())?;
        Ok(Self {
            h_bloch: bloch_hamiltonian(b, h)?,
            h_alpha,
            h_gamma,
            x: diagonalizer_from(b, &n),
            coupling_block: n.s.matrix() * h.coupling().adjoint() * n.s_tilde_inv.matrix(),
            s_b: n.s,
            s_b_tilde: n.s_tilde,
            source,
        })
    }

    pub fn p(&self) -> usize {
        self.h_alpha.dim()
    }

    pub fn q(&self) -> usize {
        self.h_gamma.dim()
    }

    /// `((h_α, S Ω† S̃⁻¹), (0, h_γ))`.
    pub fn upper_triangular(&self) -> CMatrix {
        block2x2(
            self.h_alpha.matrix(),
            &self.coupling_block,
            &CMatrix::zeros(self.q(), self.p()),
            self.h_gamma.matrix(),
        )
    }
}

/// Solves `h_α Y − Y h_γ = S Ω† S̃⁻¹`, which removes the off-diagonal block
/// of [`EffectiveModel::upper_triangular`].
///
/// That matrix is similar to `H` when `S̃` commutes with `h_γ` (always for
/// `q = 1`); otherwise see [`triangularize`] for the actual fast block.
pub fn sylvester_decouple(model: &EffectiveModel) -> Result<CMatrix> {
    sylvester_solve(
        model.h_alpha.matrix(),
        model.h_gamma.matrix(),
        &model.coupling_block,
    )
}

/// `X_Y = ((1, 0), (B, 1)) · diag(S⁻¹, S̃⁻¹) · ((1, −Y), (0, 1))`.
pub fn sylvester_diagonalizer(b: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    let (q, p) = b.shape();
    if y.shape() != (p, q) {
        return Err(Error::DimensionMismatch {
            op: "sylvester_diagonalizer",
            expected: (p, q),
            found: y.shape(),
        });
    }
    let n = Normalizers::new(b)?;
    let lower = block2x2(&identity(p), &CMatrix::zeros(p, q), b, &identity(q));
    let shear = block2x2(&identity(p), &-y, &CMatrix::zeros(q, p), &identity(q));
    Ok(lower * block_diag(n.s_inv.matrix(), n.s_tilde_inv.matrix()) * shear)
}

fn slow_projector(n: usize, p: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j && i < p {
            crate::linalg::real(1.0)
        } else {
            crate::linalg::real(0.0)
        }
    })
}

/// `P_X = X P X⁻¹`, the projector onto the dressed slow sector.
pub fn dressed_projector(x: &CMatrix, p: usize) -> Result<CMatrix> {
    let defect = unitarity_defect(x);
    if x.nrows() != x.ncols() || defect > UNITARITY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let proj = slow_projector(x.nrows(), p);
    Ok(x * proj * x.adjoint())
}

fn check_full(op: &'static str, a: &CMatrix, x: &CMatrix, p: usize) -> Result<()> {
    let n = x.nrows();
    if a.shape() != (n, n) || x.ncols() != n || p > n {
        return Err(Error::DimensionMismatch {
            op,
            expected: (n, n),
            found: a.shape(),
        });
    }
    Ok(())
}

/// `A_eff = P X⁻¹ A X P`, returned as the `p×p` slow block.
pub fn effective_observable(a: &CMatrix, x: &CMatrix, p: usize) -> Result<CMatrix> {
    check_full("effective_observable", a, x, p)?;
    let transformed = inverse(x)? * a * x;
    Ok(transformed.view((0, 0), (p, p)).into_owned())
}

fn slow_population(rho0: &CMatrix, x: &CMatrix, x_inv: &CMatrix, p: usize) -> Result<f64> {
    let proj = slow_projector(x.nrows(), p);
    let trace = (x * proj * x_inv * rho0).trace().re;
    if trace.abs() <= SLOW_TRACE_TOL {
        return Err(Error::SlowSectorEmpty { trace });
    }
    Ok(trace)
}

/// `ρ_eff = P X⁻¹ ρ X P / Tr[X P X⁻¹ ρ₀]`.
pub fn effective_density(rho: &CMatrix, rho0: &CMatrix, x: &CMatrix, p: usize) -> Result<CMatrix> {
    check_full("effective_density", rho, x, p)?;
    check_full("effective_density", rho0, x, p)?;
    let x_inv = inverse(x)?;
    let norm = slow_population(rho0, x, &x_inv, p)?;
    let transformed = &x_inv * rho * x;
    Ok(transformed.view((0, 0), (p, p)).into_owned() / crate::linalg::real(norm))
}

/// The inhomogeneous term `P X⁻¹ H X Q X⁻¹ ρ X P / Tr[X P X⁻¹ ρ₀]` in the
/// equation of motion of `ρ_eff`; it vanishes for an exact `B` and unitary
/// `X`.
pub fn density_correction(
    h: &HermMatrix,
    rho: &CMatrix,
    rho0: &CMatrix,
    x: &CMatrix,
    p: usize,
) -> Result<CMatrix> {
    check_full("density_correction", h.matrix(), x, p)?;
    check_full("density_correction", rho, x, p)?;
    let n = x.nrows();
    let x_inv = inverse(x)?;
    let norm = slow_population(rho0, x, &x_inv, p)?;
    let fast_proj = identity(n) - slow_projector(n, p);
    let full = &x_inv * h.matrix() * x * fast_proj * &x_inv * rho * x;
    Ok(full.view((0, 0), (p, p)).into_owned() / crate::linalg::real(norm))
}
