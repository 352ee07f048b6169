use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the reduction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{op}: matrix is not square ({rows}x{cols})")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not hermitian (defect {defect:.3e}, allowed {allowed:.3e})")]
    NotHermitian { defect: f64, allowed: f64 },
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("matrix is not positive definite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveDefinite { eigenvalue: f64 },
    #[error("spectra overlap: eigenvalues {left} and {right} are {gap:.3e} apart")]
    SpectraOverlap {
        left: Complex64,
        right: Complex64,
        gap: f64,
    },
    #[error("fast block is singular (smallest |eigenvalue| {min_abs_eigenvalue:.3e})")]
    DeltaSingular { min_abs_eigenvalue: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("wave operator is not a solution (residual {residual:.3e} > {threshold:.3e})")]
    NotASolution { residual: f64, threshold: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("slow-sector normalization vanishes (trace {trace:.3e})")]
    SlowSectorEmpty { trace: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("time grid must be ascending and finite")]
    BadTimeGrid,
    #[error("trajectories are sampled on different time grids")]
    GridMismatch,
    #[error("state index {index} out of range for {n_states} states")]
    StateIndex { index: usize, n_states: usize },
    #[error("two-photon detuning must be nonzero")]
    DeltaZero,
    #[error("one-photon detuning must be nonzero")]
    BigDeltaZero,
    #[error("invalid random-instance targets: {0}")]
    BadTargets(String),
    #[error("invalid expansion order {0}")]
    InvalidOrder(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
