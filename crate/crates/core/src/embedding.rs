//! The reduced Bloch wave operator `B: slow → fast`.
//!
//! `B` solves the embedding equation
//!
//! ```text
//!     Ω + ΔB = Bω + BΩ†B
//! ```
//!
//! whose solutions make `γ = Bα` an invariant manifold of the Schrödinger
//! flow. Three constructions are provided: the fixed-point recurrence
//! `B⁽ᵏ⁺¹⁾ = T(B⁽ᵏ⁾)`, the perturbative expansion in powers of `Δ⁻¹`, and the
//! expansion in odd powers of the coupling in which every term solves a
//! Sylvester equation. [`WaveOperator::from_invariant_subspace`] gives an
//! independent reference from the dense eigendecomposition of `H`.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, inverse, spectral_norm, sylvester_solve, CMatrix};
use crate::partition::PartitionedHamiltonian;

/// Default residual tolerance, relative to `‖Δ‖`.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FixedPoint,
    #[serde(rename = "perturbative-ae")]
    PerturbativeAE,
    SylvesterExpansion,
    Exact,
}

/// A candidate `B` together with how it was obtained and its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveOperator {
    b: CMatrix,
    method: Method,
    order: usize,
    residual: f64,
}

impl WaveOperator {
    pub fn new(
        b: CMatrix,
        method: Method,
        order: usize,
        h: &PartitionedHamiltonian,
    ) -> Result<Self> {
        let residual = residual(&b, h)?;
        Ok(Self {
            b,
            method,
            order,
            residual,
        })
    }

    /// `B = Γ A⁻¹` from the `p` eigenvectors `(A; Γ)` of `H` carrying the
    /// largest weight on the slow block.
    pub fn from_invariant_subspace(h: &PartitionedHamiltonian) -> Result<Self> {
        let (p, q) = (h.p(), h.q());
        let eig = herm_eig(&h.assemble())?;
        let mut by_weight: Vec<(usize, f64)> = (0..p + q)
            .map(|j| (j, eig.vectors.view((0, j), (p, 1)).norm_squared()))
            .collect();
        by_weight.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut slow = CMatrix::zeros(p, p);
        let mut fast = CMatrix::zeros(q, p);
        for (col, &(j, _)) in by_weight.iter().take(p).enumerate() {
            slow.set_column(col, &eig.vectors.view((0, j), (p, 1)).column(0));
            fast.set_column(col, &eig.vectors.view((p, j), (q, 1)).column(0));
        }
        let b = fast * inverse(&slow)?;
        Self::new(b, Method::Exact, 0, h)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.b
    }

    pub fn into_matrix(self) -> CMatrix {
        self.b
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `‖Ω + ΔB − Bω − BΩ†B‖`.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

impl AsRef<CMatrix> for WaveOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[serde(rename = "perturbative-ae")]
    PerturbativeAE,
    SylvesterExpansion,
}

/// Ordered expansion terms of `B`; partial sums are the approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSeries {
    pub terms: Vec<CMatrix>,
    pub scheme: Scheme,
}

impl ExpansionSeries {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of the first `n` terms.
    pub fn partial_sum(&self, n: usize) -> CMatrix {
        let (rows, cols) = self.terms.first().map_or((0, 0), |t| t.shape());
        self.terms
            .iter()
            .take(n)
            .fold(CMatrix::zeros(rows, cols), |acc, t| acc + t)
    }

    /// Partial sum of the first `n` terms wrapped as a [`WaveOperator`].
    pub fn wave_operator(&self, n: usize, h: &PartitionedHamiltonian) -> Result<WaveOperator> {
        let method = match self.scheme {
            Scheme::PerturbativeAE => Method::PerturbativeAE,
            Scheme::SylvesterExpansion => Method::SylvesterExpansion,
        };
        WaveOperator::new(self.partial_sum(n), method, n, h)
    }

    /// Residual of every partial sum, `n = 1..=len`.
    pub fn partial_residuals(&self, h: &PartitionedHamiltonian) -> Result<Vec<f64>> {
        let mut sum = CMatrix::zeros(h.q(), h.p());
        self.terms
            .iter()
            .map(|t| {
                sum += t;
                residual(&sum, h)
            })
            .collect()
    }
}

fn check_shape(op: &'static str, b: &CMatrix, h: &PartitionedHamiltonian) -> Result<()> {
    if b.shape() != (h.q(), h.p()) {
        return Err(Error::DimensionMismatch {
            op,
            expected: (h.q(), h.p()),
            found: b.shape(),
        });
    }
    Ok(())
}

/// `Ω + ΔB − Bω − BΩ†B`.
pub fn residual_matrix(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<CMatrix> {
    check_shape("residual", b, h)?;
    Ok(h.coupling() + h.delta() * b - b * h.omega() - b * h.coupling().adjoint() * b)
}

pub fn residual(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<f64> {
    Ok(spectral_norm(&residual_matrix(b, h)?))
}

/// `T(A) = −Δ⁻¹Ω + Δ⁻¹Aω + Δ⁻¹AΩ†A`; fixed points of `T` solve the
/// embedding equation.
pub fn t_map(b: &CMatrix, h: &PartitionedHamiltonian) -> Result<CMatrix> {
    check_shape("t_map", b, h)?;
    let di = h.delta_inv();
    Ok(di * (b * h.omega() + b * h.coupling().adjoint() * b - h.coupling()))
}

/// `B⁽⁰⁾ = −Δ⁻¹Ω`, the adiabatic-elimination solution.
pub fn leading_order(h: &PartitionedHamiltonian) -> CMatrix {
    -(h.delta_inv() * h.coupling())
}

/// The `k`-th iterate `B⁽ᵏ⁾ = Tᵏ(B⁽⁰⁾)`, without any stopping test.
pub fn iterate(h: &PartitionedHamiltonian, k: usize) -> Result<WaveOperator> {
    let mut b = leading_order(h);
    for _ in 0..k {
        b = t_map(&b, h)?;
    }
    WaveOperator::new(b, Method::FixedPoint, k, h)
}

/// Stopping rule for [`fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    /// Residual tolerance relative to `‖Δ‖`.
    pub tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

/// Iterates `T` from `B⁽⁰⁾` until the residual drops to `tol·‖Δ‖`.
///
/// Outside the guaranteed-convergence region this logs a warning and keeps
/// going; the condition is sufficient, not necessary. The returned order is
/// the index `k` of the accepted iterate `B⁽ᵏ⁾`.
pub fn fixed_point(h: &PartitionedHamiltonian, opts: FixedPointOptions) -> Result<WaveOperator> {
    let diag = h.diagnostics();
    if !diag.convergent {
        warn!(
            "fixed point outside the convergence region (eps = {:.3e}, eps' = {:.3e}); iterating anyway",
            diag.eps, diag.eps_prime
        );
    }
    let threshold = opts.tol * h.delta_norm();
    let mut b = leading_order(h);
    let mut res = residual(&b, h)?;
    let mut k = 0;
    while res > threshold {
        if k >= opts.max_iter {
            return Err(Error::NotConverged {
                iterations: k,
                residual: res,
            });
        }
        b = t_map(&b, h)?;
        k += 1;
        res = residual(&b, h)?;
        if !res.is_finite() {
            return Err(Error::NotConverged {
                iterations: k,
                residual: res,
            });
        }
    }
    Ok(WaveOperator {
        b,
        method: Method::FixedPoint,
        order: k,
        residual: res,
    })
}

/// Terms `B₍₁₎ … B₍order₎` of the expansion in which `Δ⁻¹` carries one power
/// of the small parameter:
///
/// ```text
///     B₍₁₎   = −Δ⁻¹Ω
///     B₍ₖ₊₁₎ = Δ⁻¹B₍ₖ₎ω + Δ⁻¹ Σ_{l=1}^{k−1} B₍ₖ₋ₗ₎Ω†B₍ₗ₎
/// ```
pub fn perturbative_series(h: &PartitionedHamiltonian, order: usize) -> Result<ExpansionSeries> {
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let di = h.delta_inv();
    let coupling_adj = h.coupling().adjoint();
    let mut terms: Vec<CMatrix> = Vec::with_capacity(order);
    terms.push(leading_order(h));
    for k in 1..order {
        // terms[i] holds B₍ᵢ₊₁₎
        let mut next = &terms[k - 1] * h.omega();
        for l in 1..k {
            next += &terms[k - l - 1] * &coupling_adj * &terms[l - 1];
        }
        terms.push(di * next);
    }
    Ok(ExpansionSeries {
        terms,
        scheme: Scheme::PerturbativeAE,
    })
}

/// Terms `b₀ … b_order` of the expansion in odd powers of the coupling:
///
/// ```text
///     Δb₀ − b₀ω         = −Ω
///     Δbₖ₊₁ − bₖ₊₁ω     = Σ_{l=0}^{k} bₖ₋ₗΩ†bₗ
/// ```
pub fn sylvester_series(h: &PartitionedHamiltonian, order: usize) -> Result<ExpansionSeries> {
    let coupling_adj = h.coupling().adjoint();
    let mut terms: Vec<CMatrix> = Vec::with_capacity(order + 1);
    terms.push(sylvester_solve(h.delta(), h.omega(), &-h.coupling())?);
    for k in 0..order {
        let mut rhs = CMatrix::zeros(h.q(), h.p());
        for l in 0..=k {
            rhs += &terms[k - l] * &coupling_adj * &terms[l];
        }
        terms.push(sylvester_solve(h.delta(), h.omega(), &rhs)?);
    }
    Ok(ExpansionSeries {
        terms,
        scheme: Scheme::SylvesterExpansion,
    })
}

/// `‖B⁽ᵏ⁾ − Σ_{l=1}^{k+1} B₍ₗ₎‖`, which is formally `O(Δ^{−(k+2)})`.
pub fn order_consistency(h: &PartitionedHamiltonian, k: usize) -> Result<f64> {
    let iterate = iterate(h, k)?;
    let series = perturbative_series(h, k + 1)?;
    Ok(spectral_norm(
        &(iterate.matrix() - series.partial_sum(k + 1)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoCycleReport {
    pub cycle_detected: bool,
    /// Smallest `‖B⁽ᵏ⁺¹⁾ − B⁽ᵏ⁾‖` seen.
    pub min_step: f64,
    pub iterations: usize,
}

const CYCLE_RETURN_TOL: f64 = 1e-12;
const CYCLE_STEP_TOL: f64 = 1e-8;

/// Looks for an iterate with `B⁽ᵏ⁺²⁾ ≈ B⁽ᵏ⁾` while `B⁽ᵏ⁺¹⁾` is still far
/// from `B⁽ᵏ⁾`, i.e. a period-two orbit of `T`.
pub fn two_cycle_probe(h: &PartitionedHamiltonian, max_iter: usize) -> Result<TwoCycleReport> {
    let mut prev = leading_order(h);
    let mut curr = t_map(&prev, h)?;
    let mut min_step = spectral_norm(&(&curr - &prev));
    let mut cycle_detected = false;
    let mut k = 0;
    while k < max_iter && min_step > 0.0 {
        let next = t_map(&curr, h)?;
        let step = spectral_norm(&(&curr - &prev));
        let two_step = spectral_norm(&(&next - &prev));
        if two_step <= CYCLE_RETURN_TOL && step > CYCLE_STEP_TOL {
            cycle_detected = true;
        }
        min_step = min_step.min(spectral_norm(&(&next - &curr)));
        if !min_step.is_finite() {
            break;
        }
        prev = curr;
        curr = next;
        k += 1;
    }
    Ok(TwoCycleReport {
        cycle_detected,
        min_step,
        iterations: k,
    })
}
