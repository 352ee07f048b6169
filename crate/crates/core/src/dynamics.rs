//! Exact and effective Schrödinger evolution on a time grid.
//!
//! Hamiltonians are time independent, so every grid point is propagated
//! directly with a matrix exponential; there is no integrator error.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, herm_eig, identity, mat_exp, real, CMatrix, CVector, HermMatrix};

/// Tolerance on `‖ψ₀‖ = 1` for the propagators.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Sampled amplitudes, one column per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `n_states × n_times`.
    pub amplitudes: CMatrix,
}

impl Trajectory {
    pub fn n_states(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `|amplitude|²`, `n_states × n_times`.
    pub fn populations(&self) -> DMatrix<f64> {
        self.amplitudes.map(|z| z.norm_sqr())
    }

    /// Total population at each time.
    pub fn norms(&self) -> Vec<f64> {
        self.amplitudes
            .column_iter()
            .map(|col| col.norm_squared())
            .collect()
    }

    pub fn state(&self, i: usize) -> CVector {
        self.amplitudes.column(i).into_owned()
    }

    /// Applies `f` to every sampled state.
    pub fn map_states(&self, mut f: impl FnMut(&CVector) -> CVector) -> Trajectory {
        let columns: Vec<CVector> = (0..self.len()).map(|i| f(&self.state(i))).collect();
        let rows = columns.first().map_or(0, |v| v.len());
        let mut amplitudes = CMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            amplitudes.set_column(j, col);
        }
        Trajectory {
            times: self.times.clone(),
            amplitudes,
        }
    }
}

/// `n_points` equally spaced times on `[0, t_max]`.
pub fn time_grid(t_max: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let step = t_max / (n_points - 1) as f64;
            (0..n_points).map(|i| i as f64 * step).collect()
        }
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    let finite = times.iter().all(|t| t.is_finite());
    let ascending = times.windows(2).all(|w| w[0] <= w[1]);
    if finite && ascending {
        Ok(())
    } else {
        Err(Error::BadTimeGrid)
    }
}

fn check_normalized(psi: &CVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

fn check_len(op: &'static str, h: &CMatrix, psi: &CVector) -> Result<()> {
    if h.nrows() != psi.len() || h.ncols() != psi.len() {
        return Err(Error::DimensionMismatch {
            op,
            expected: (h.nrows(), h.ncols()),
            found: (psi.len(), psi.len()),
        });
    }
    Ok(())
}

fn hermitian_evolution(h: &HermMatrix, psi0: &CVector, times: &[f64]) -> Result<Trajectory> {
    let eig = herm_eig(h)?;
    let coeffs = eig.vectors.adjoint() * psi0;
    let mut amplitudes = CMatrix::zeros(psi0.len(), times.len());
    for (j, &t) in times.iter().enumerate() {
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&eig.values)
                .map(|(a, &l)| a * c(0.0, -l * t).exp()),
        );
        amplitudes.set_column(j, &(&eig.vectors * phased));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        amplitudes,
    })
}

/// `ψ(t) = exp(−iHt) ψ₀` for hermitian `H`.
pub fn propagate_exact(h: &HermMatrix, psi0: &CVector, times: &[f64]) -> Result<Trajectory> {
    check_len("propagate_exact", h.matrix(), psi0)?;
    check_normalized(psi0)?;
    check_grid(times)?;
    hermitian_evolution(h, psi0, times)
}

/// `α(t) = exp(−i h_eff t) α₀` for a possibly non-hermitian `h_eff`; the
/// norm is then not conserved.
pub fn propagate_effective(h_eff: &CMatrix, alpha0: &CVector, times: &[f64]) -> Result<Trajectory> {
    check_len("propagate_effective", h_eff, alpha0)?;
    check_normalized(alpha0)?;
    check_grid(times)?;
    if let Ok(h) = HermMatrix::new(h_eff.clone()) {
        return hermitian_evolution(&h, alpha0, times);
    }
    let mut amplitudes = CMatrix::zeros(alpha0.len(), times.len());
    for (j, &t) in times.iter().enumerate() {
        let u = mat_exp(h_eff, c(0.0, -t))?;
        amplitudes.set_column(j, &(u * alpha0));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        amplitudes,
    })
}

/// `(α, Bα)`, divided by `√⟨α, (1 + B†B) α⟩` when `normalized`.
pub fn embed_slow_state(alpha: &CVector, b: &CMatrix, normalized: bool) -> Result<CVector> {
    if b.ncols() != alpha.len() {
        return Err(Error::DimensionMismatch {
            op: "embed_slow_state",
            expected: (b.nrows(), b.ncols()),
            found: (b.nrows(), alpha.len()),
        });
    }
    let (p, q) = (alpha.len(), b.nrows());
    let gamma = b * alpha;
    let mut out = CVector::zeros(p + q);
    out.rows_mut(0, p).copy_from(alpha);
    out.rows_mut(p, q).copy_from(&gamma);
    if normalized {
        let weight = (alpha.adjoint() * (identity(p) + b.adjoint() * b) * alpha)[(0, 0)].re;
        if weight > 0.0 {
            out /= real(weight.sqrt());
        }
    }
    Ok(out)
}

/// Embeds every slow state of an effective trajectory.
pub fn embed_trajectory(slow: &Trajectory, b: &CMatrix, normalized: bool) -> Result<Trajectory> {
    let mut err = None;
    let out = slow.map_states(|alpha| match embed_slow_state(alpha, b, normalized) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            alpha.clone()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Accuracy of an effective trajectory against the exact one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max_t |P_exact(t) − P_eff(t)|`, per compared state.
    pub max_population_error: Vec<f64>,
    /// `max_t |1 − ‖ψ_eff(t)‖²|`.
    pub norm_leakage: f64,
    /// RMS difference of the moving-maximum envelopes over all compared
    /// states and times.
    pub envelope_rms_error: f64,
}

/// One fast period `2π/‖Δ‖`, the default envelope window.
pub fn default_envelope_window(delta_norm: f64) -> f64 {
    std::f64::consts::TAU / delta_norm
}

/// Centered moving maximum over windows of width `window`.
pub fn moving_max(times: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    let half = window / 2.0;
    let n = times.len();
    let (mut lo, mut hi) = (0, 0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        while times[lo] < times[i] - half {
            lo += 1;
        }
        while hi + 1 < n && times[hi + 1] <= times[i] + half {
            hi += 1;
        }
        out.push(
            values[lo..=hi]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        );
    }
    out
}

/// Compares populations of `states` (indices valid in both trajectories).
pub fn compare(
    exact: &Trajectory,
    effective: &Trajectory,
    states: &[usize],
    window: f64,
) -> Result<ComparisonReport> {
    if exact.times != effective.times {
        return Err(Error::GridMismatch);
    }
    let n_states = exact.n_states().min(effective.n_states());
    if let Some(&index) = states.iter().find(|&&i| i >= n_states) {
        return Err(Error::StateIndex { index, n_states });
    }
    let pop_exact = exact.populations();
    let pop_eff = effective.populations();
    let times = &exact.times;

    let mut max_population_error = Vec::with_capacity(states.len());
    let mut sq_sum = 0.0;
    for &s in states {
        let row_exact: Vec<f64> = pop_exact.row(s).iter().copied().collect();
        let row_eff: Vec<f64> = pop_eff.row(s).iter().copied().collect();
        max_population_error.push(
            row_exact
                .iter()
                .zip(&row_eff)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        let env_exact = moving_max(times, &row_exact, window);
        let env_eff = moving_max(times, &row_eff, window);
        sq_sum += env_exact
            .iter()
            .zip(&env_eff)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
    }
    let count = states.len() * times.len();
    let envelope_rms_error = if count == 0 {
        0.0
    } else {
        (sq_sum / count as f64).sqrt()
    };
    let norm_leakage = effective
        .norms()
        .iter()
        .map(|n| (1.0 - n).abs())
        .fold(0.0, f64::max);
    Ok(ComparisonReport {
        max_population_error,
        norm_leakage,
        envelope_rms_error,
    })
}
