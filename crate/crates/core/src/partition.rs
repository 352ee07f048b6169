//! Two-block partition of a hermitian Hamiltonian and the scale diagnostics
//! that decide whether the slow/fast separation holds.
//!
//! The full matrix is
//!
//! ```text
//!     H = | ω   Ω† |   ω: p×p slow block
//!         | Ω   Δ  |   Ω: q×p coupling (slow → fast), Δ: q×q fast block
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    block2x2, herm_eig, identity, inverse, real, spectral_norm, split_blocks, CMatrix, HermMatrix,
};

/// Default relative threshold below which Δ counts as singular.
pub const DEFAULT_DELTA_INVERTIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedHamiltonian {
    omega: HermMatrix,
    coupling: CMatrix,
    delta: HermMatrix,
    delta_inv: CMatrix,
}

impl PartitionedHamiltonian {
    pub fn new(omega: HermMatrix, coupling: CMatrix, delta: HermMatrix) -> Result<Self> {
        Self::with_invertibility_tolerance(omega, coupling, delta, DEFAULT_DELTA_INVERTIBILITY_TOL)
    }

    /// Like [`new`](Self::new), with Δ rejected when its smallest
    /// |eigenvalue| is at or below `tol·‖Δ‖`.
    pub fn with_invertibility_tolerance(
        omega: HermMatrix,
        coupling: CMatrix,
        delta: HermMatrix,
        tol: f64,
    ) -> Result<Self> {
        let (p, q) = (omega.dim(), delta.dim());
        if coupling.shape() != (q, p) {
            return Err(Error::DimensionMismatch {
                op: "PartitionedHamiltonian::new",
                expected: (q, p),
                found: coupling.shape(),
            });
        }
        if !crate::linalg::is_finite(&coupling) {
            return Err(Error::NonFinite);
        }
        let min_abs = herm_eig(&delta)?
            .values
            .iter()
            .map(|l| l.abs())
            .fold(f64::INFINITY, f64::min);
        if min_abs <= tol * delta.norm() {
            return Err(Error::DeltaSingular {
                min_abs_eigenvalue: min_abs,
            });
        }
        let delta_inv = inverse(delta.matrix())?;
        Ok(Self {
            omega,
            coupling,
            delta,
            delta_inv,
        })
    }

    /// Splits a hermitian matrix at index `p` (slow block first).
    pub fn from_hermitian(h: &HermMatrix, p: usize) -> Result<Self> {
        let n = h.dim();
        if p > n {
            return Err(Error::DimensionMismatch {
                op: "PartitionedHamiltonian::from_hermitian",
                expected: (n, n),
                found: (p, p),
            });
        }
        let (omega, _, coupling, delta) = split_blocks(h.matrix(), p);
        Self::new(HermMatrix::new(omega)?, coupling, HermMatrix::new(delta)?)
    }

    pub fn p(&self) -> usize {
        self.omega.dim()
    }

    pub fn q(&self) -> usize {
        self.delta.dim()
    }

    pub fn dim(&self) -> usize {
        self.p() + self.q()
    }

    pub fn omega(&self) -> &CMatrix {
        self.omega.matrix()
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn delta(&self) -> &CMatrix {
        self.delta.matrix()
    }

    pub fn omega_herm(&self) -> &HermMatrix {
        &self.omega
    }

    pub fn delta_herm(&self) -> &HermMatrix {
        &self.delta
    }

    pub fn delta_inv(&self) -> &CMatrix {
        &self.delta_inv
    }

    /// `‖Δ‖`, the scale against which residuals are measured.
    pub fn delta_norm(&self) -> f64 {
        self.delta.norm()
    }

    /// The assembled `(p+q)×(p+q)` matrix `((ω, Ω†), (Ω, Δ))`.
    pub fn assemble(&self) -> HermMatrix {
        let m = block2x2(
            self.omega(),
            &self.coupling.adjoint(),
            &self.coupling,
            self.delta(),
        );
        // Hermitian because the diagonal blocks are.
        HermMatrix::new_unchecked(m)
    }

    pub fn diagnostics(&self) -> ScaleDiagnostics {
        ScaleDiagnostics::from_norms(
            spectral_norm(self.omega()),
            spectral_norm(&self.coupling),
            spectral_norm(&self.delta_inv),
        )
    }

    /// Conjugation by the block-diagonal unitary `diag(v_alpha, v_gamma)`.
    pub fn conjugated(&self, v_alpha: &CMatrix, v_gamma: &CMatrix) -> Result<Self> {
        let omega = v_alpha * self.omega() * v_alpha.adjoint();
        let coupling = v_gamma * &self.coupling * v_alpha.adjoint();
        let delta = v_gamma * self.delta() * v_gamma.adjoint();
        Self::new(
            HermMatrix::hermitian_part(&omega)?,
            coupling,
            HermMatrix::hermitian_part(&delta)?,
        )
    }

    /// Adds `shift·I` to both diagonal blocks.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let omega = self.omega() + identity(self.p()) * real(shift);
        let delta = self.delta() + identity(self.q()) * real(shift);
        Self::new(
            HermMatrix::new(omega)?,
            self.coupling.clone(),
            HermMatrix::new(delta)?,
        )
    }

    /// Same ω and Ω with the fast block replaced.
    pub fn with_delta(&self, delta: HermMatrix) -> Result<Self> {
        Self::new(self.omega.clone(), self.coupling.clone(), delta)
    }
}

/// Scale parameters of the slow/fast split.
///
/// `eps = ‖Δ⁻¹‖‖ω‖` and `eps_prime = ‖Δ⁻¹‖‖Ω‖`. When
/// `eps_prime ≤ (1 − eps)/2` the map `g(x) = ε′(1+x²) + εx` has two fixed
/// points; the closed balls with those radii are invariant under the
/// fixed-point map of the embedding equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleDiagnostics {
    pub eps: f64,
    pub eps_prime: f64,
    /// `‖Ω‖/‖ω‖`; `None` when ω vanishes.
    pub a_ratio: Option<f64>,
    /// Larger invariant-ball radius (the `+` root).
    pub ball_radius: Option<f64>,
    /// Smaller invariant-ball radius (the `−` root).
    pub ball_radius_min: Option<f64>,
    pub convergent: bool,
}

impl ScaleDiagnostics {
    pub fn from_norms(omega_norm: f64, coupling_norm: f64, delta_inv_norm: f64) -> Self {
        let eps = delta_inv_norm * omega_norm;
        let eps_prime = delta_inv_norm * coupling_norm;
        let a_ratio = (omega_norm > 0.0).then(|| coupling_norm / omega_norm);
        let convergent = eps < 1.0 && eps_prime <= (1.0 - eps) / 2.0;
        let (ball_radius, ball_radius_min) = if convergent && eps_prime > 0.0 {
            let center = (1.0 - eps) / (2.0 * eps_prime);
            let root = (center * center - 1.0).max(0.0).sqrt();
            (Some(center + root), Some(center - root))
        } else {
            (None, None)
        };
        Self {
            eps,
            eps_prime,
            a_ratio,
            ball_radius,
            ball_radius_min,
            convergent,
        }
    }

    /// The norm bound `g(x) = ε′(1 + x²) + εx` on `‖T(A)‖` for `‖A‖ = x`.
    pub fn t_map_bound(&self, x: f64) -> f64 {
        self.eps_prime * (1.0 + x * x) + self.eps * x
    }
}
