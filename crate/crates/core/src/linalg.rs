//! Dense complex matrix kernels.
//!
//! Everything downstream works with [`CMatrix`] (a column-major
//! `nalgebra::DMatrix<Complex64>`) and the validated [`HermMatrix`] wrapper.
//! Decompositions are delegated to nalgebra; the Sylvester solver is a
//! Kronecker-vectorized dense solve, which is adequate for the small block
//! dimensions this crate targets.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative hermiticity tolerance used by [`HermMatrix::new`].
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues at or below this (relative to `max(1, ‖m‖)`) fail the
/// positive-definiteness check in [`herm_sqrt`].
pub const POSITIVE_DEFINITE_TOL: f64 = 1e-14;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest singular value; infinite when `m` has non-finite entries.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if !is_finite(m) {
        return f64::INFINITY;
    }
    // Vectors: the singular value is the Euclidean norm.
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `‖m − m†‖`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    spectral_norm(&(m - m.adjoint()))
}

/// `‖m†m − I‖`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    spectral_norm(&(m.adjoint() * m - identity(m.ncols())))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_square(op: &'static str, m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            op,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// A square complex matrix verified hermitian on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    /// Validates hermiticity at the default relative tolerance.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_HERMITICITY_TOL)
    }

    /// Accepts `m` when `‖m − m†‖ ≤ tol·(1 + ‖m‖)`.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        ensure_square("HermMatrix::new", &m)?;
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let defect = hermiticity_defect(&m);
        let allowed = tol * (1.0 + spectral_norm(&m));
        if defect > allowed {
            return Err(Error::NotHermitian { defect, allowed });
        }
        Ok(Self(m))
    }

    /// Hermitian part `(m + m†)/2`; never fails for finite square input.
    pub fn hermitian_part(m: &CMatrix) -> Result<Self> {
        ensure_square("HermMatrix::hermitian_part", m)?;
        if !is_finite(m) {
            return Err(Error::NonFinite);
        }
        Ok(Self((m + m.adjoint()).scale(0.5)))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                real(diag[i])
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.0)
    }
}

impl AsRef<CMatrix> for HermMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigendecomposition `m = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEigen {
    /// `V diag(f(λ)) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn herm_eig(m: &HermMatrix) -> Result<HermEigen> {
    let n = m.dim();
    if n == 0 {
        return Ok(HermEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.matrix().clone(), EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEigen { values, vectors })
}

/// Ascending eigenvalues of a hermitian matrix.
pub fn herm_eigenvalues(m: &HermMatrix) -> Result<Vec<f64>> {
    Ok(herm_eig(m)?.values)
}

fn check_positive(eig: &HermEigen, scale: f64) -> Result<()> {
    let threshold = POSITIVE_DEFINITE_TOL * scale.max(1.0);
    match eig.values.first() {
        Some(&min) if min <= threshold => Err(Error::NotPositiveDefinite { eigenvalue: min }),
        _ => Ok(()),
    }
}

/// Principal square root of a positive-definite hermitian matrix.
pub fn herm_sqrt(m: &HermMatrix) -> Result<HermMatrix> {
    let eig = herm_eig(m)?;
    check_positive(&eig, m.norm())?;
    Ok(HermMatrix(symmetrize(eig.map_values(|l| real(l.sqrt())))))
}

/// Inverse principal square root of a positive-definite hermitian matrix.
pub fn herm_inv_sqrt(m: &HermMatrix) -> Result<HermMatrix> {
    let eig = herm_eig(m)?;
    check_positive(&eig, m.norm())?;
    Ok(HermMatrix(symmetrize(
        eig.map_values(|l| real(1.0 / l.sqrt())),
    )))
}

// Removes the rounding-level antihermitian part left by V f(Λ) V†.
fn symmetrize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()).scale(0.5)
}

/// `exp(scale · m)`.
///
/// Hermitian input goes through the eigendecomposition; anything else uses
/// nalgebra's scaling-and-squaring Padé approximant.
pub fn mat_exp(m: &CMatrix, scale: C64) -> Result<CMatrix> {
    ensure_square("mat_exp", m)?;
    if m.is_empty() {
        return Ok(m.clone());
    }
    if let Ok(h) = HermMatrix::new(m.clone()) {
        if let Ok(eig) = herm_eig(&h) {
            return Ok(eig.map_values(|l| (scale * l).exp()));
        }
    }
    Ok((m * scale).exp())
}

/// Eigenvalues of a general square matrix from its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    ensure_square("eigenvalues", m)?;
    let n = m.nrows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let schur =
        Schur::try_new(m.clone(), EIG_EPS, EIG_MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let (_, t) = schur.unpack();
    let mut values = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        // nalgebra may leave an unsplit 2x2 block on the diagonal.
        if i + 1 < n
            && t[(i + 1, i)].norm()
                > EIG_EPS * (t[(i, i)].norm() + t[(i + 1, i + 1)].norm()).max(1e-300)
        {
            let (l1, l2) = eig_2x2(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            values.push(l1);
            values.push(l2);
            i += 2;
        } else {
            values.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(values)
}

fn eig_2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    (half_tr + root, half_tr - root)
}

/// Solves `a·Y − Y·c = rhs` for `Y` (q×p) with `a` q×q and `c` p×p.
pub fn sylvester_solve(a: &CMatrix, c: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    ensure_square("sylvester_solve", a)?;
    ensure_square("sylvester_solve", c)?;
    let (q, p) = (a.nrows(), c.nrows());
    if rhs.shape() != (q, p) {
        return Err(Error::DimensionMismatch {
            op: "sylvester_solve",
            expected: (q, p),
            found: rhs.shape(),
        });
    }
    if q == 0 || p == 0 {
        return Ok(CMatrix::zeros(q, p));
    }

    let spec_a = eigenvalues(a)?;
    let spec_c = eigenvalues(c)?;
    let scale = spectral_norm(a).max(spectral_norm(c));
    let (mut gap, mut left, mut right) = (f64::INFINITY, spec_a[0], spec_c[0]);
    for &la in &spec_a {
        for &lc in &spec_c {
            let d = (la - lc).norm();
            if d < gap {
                (gap, left, right) = (d, la, lc);
            }
        }
    }
    if gap <= 1e-10 * scale {
        return Err(Error::SpectraOverlap { left, right, gap });
    }

    // Column-major vec: vec(aY − Yc) = (I_p ⊗ a − cᵀ ⊗ I_q) vec(Y).
    let n = p * q;
    let mut kron = CMatrix::zeros(n, n);
    for j in 0..p {
        for i in 0..q {
            let row = j * q + i;
            for k in 0..q {
                kron[(row, j * q + k)] += a[(i, k)];
            }
            for l in 0..p {
                kron[(row, l * q + i)] -= c[(l, j)];
            }
        }
    }
    let vec_rhs = CVector::from_iterator(n, rhs.iter().copied());
    let sol = kron.lu().solve(&vec_rhs).ok_or(Error::Singular)?;
    Ok(CMatrix::from_iterator(q, p, sol.iter().copied()))
}

/// Inverse of a general square matrix.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    ensure_square("inverse", m)?;
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Block matrix `((tl, tr), (bl, br))`.
pub fn block2x2(tl: &CMatrix, tr: &CMatrix, bl: &CMatrix, br: &CMatrix) -> CMatrix {
    let (p, q) = (tl.nrows(), br.nrows());
    let mut out = CMatrix::zeros(p + q, tl.ncols() + br.ncols());
    out.view_mut((0, 0), tl.shape()).copy_from(tl);
    out.view_mut((0, tl.ncols()), tr.shape()).copy_from(tr);
    out.view_mut((p, 0), bl.shape()).copy_from(bl);
    out.view_mut((p, tl.ncols()), br.shape()).copy_from(br);
    out
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    block2x2(
        a,
        &CMatrix::zeros(a.nrows(), b.ncols()),
        &CMatrix::zeros(b.nrows(), a.ncols()),
        b,
    )
}

/// Splits a square matrix at index `p` into its four blocks.
pub fn split_blocks(m: &CMatrix, p: usize) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let n = m.nrows();
    let q = n - p;
    (
        m.view((0, 0), (p, p)).into_owned(),
        m.view((0, p), (p, q)).into_owned(),
        m.view((p, 0), (q, p)).into_owned(),
        m.view((p, p), (q, q)).into_owned(),
    )
}

/// Largest |Δλ| after sorting two real spectra; `None` when lengths differ.
pub fn spectral_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_herm(rng: &mut impl Rng, n: usize) -> HermMatrix {
        HermMatrix::hermitian_part(&random_matrix(rng, n, n)).unwrap()
    }

    fn sigma1() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&identity(2)), 1.0);
        let row = CMatrix::from_row_slice(1, 2, &[real(0.2), real(0.15)]);
        assert!((spectral_norm(&row) - 0.25).abs() < 1e-16);
        assert_eq!(spectral_norm(&CMatrix::zeros(3, 2)), 0.0);
        let m = CMatrix::from_row_slice(2, 2, &[real(3.0), real(0.0), real(4.0), real(5.0)]);
        // singular values of ((3,0),(4,5)) are 3√5 and √5
        assert!((spectral_norm(&m) - 3.0 * 5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn herm_matrix_rejects_nonhermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        assert!(matches!(
            HermMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        let m = CMatrix::from_row_slice(1, 1, &[real(f64::NAN)]);
        assert_eq!(HermMatrix::new(m), Err(Error::NonFinite));
        assert!(matches!(
            HermMatrix::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn herm_eig_examples() {
        let d = HermMatrix::from_real_diagonal(&[3.0, 1.0]);
        let e = herm_eig(&d).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        let s1 = HermMatrix::new(sigma1()).unwrap();
        let e = herm_eig(&s1).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn herm_eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 17, 64] {
            let m = random_herm(&mut rng, n);
            let e = herm_eig(&m).unwrap();
            let rec = e.map_values(real);
            assert!(spectral_norm(&(rec - m.matrix())) <= 1e-12 * (1.0 + m.norm()));
            assert!(unitarity_defect(&e.vectors) <= 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn herm_sqrt_examples() {
        let s = herm_sqrt(&HermMatrix::identity(3)).unwrap();
        assert!(spectral_norm(&(s.matrix() - identity(3))) < 1e-15);
        let s = herm_sqrt(&HermMatrix::from_real_diagonal(&[4.0, 9.0])).unwrap();
        assert!(
            spectral_norm(&(s.matrix() - HermMatrix::from_real_diagonal(&[2.0, 3.0]).matrix()))
                < 1e-15
        );

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_matrix(&mut rng, 4, 3);
        let m = HermMatrix::new(identity(3) + b.adjoint() * &b).unwrap();
        let s = herm_sqrt(&m).unwrap();
        assert!(hermiticity_defect(s.matrix()) < 1e-14);
        assert!(spectral_norm(&(s.matrix() * s.matrix() - m.matrix())) <= 1e-12 * m.norm());
        let si = herm_inv_sqrt(&m).unwrap();
        assert!(spectral_norm(&(si.matrix() * s.matrix() - identity(3))) < 1e-12);
    }

    #[test]
    fn herm_sqrt_rejects_indefinite() {
        let m = HermMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert_eq!(
            herm_sqrt(&m),
            Err(Error::NotPositiveDefinite { eigenvalue: -0.5 })
        );
        let m = HermMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            herm_sqrt(&m),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn mat_exp_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 3, 3);
        let e = mat_exp(&m, real(0.0)).unwrap();
        assert!(spectral_norm(&(e - identity(3))) < 1e-15);

        let e = mat_exp(&sigma1(), c(0.0, -PI / 2.0)).unwrap();
        let expected = sigma1() * c(0.0, -1.0);
        assert!(spectral_norm(&(e - expected)) < 1e-15);

        for n in [2, 6, 12] {
            let h = random_herm(&mut rng, n);
            let u = mat_exp(h.matrix(), c(0.0, -3.7)).unwrap();
            assert!(unitarity_defect(&u) <= 1e-11);
        }
    }

    #[test]
    fn mat_exp_general_matches_eigen_route() {
        // Non-hermitian diagonalizable input: compare Padé with V e^{Λ} V⁻¹.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_matrix(&mut rng, 3, 3);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.3, 0.1),
            c(-0.5, 0.0),
            c(1.1, -0.2),
        ]));
        let m = &v * &d * inverse(&v).unwrap();
        let exp_d = CMatrix::from_diagonal(&d.diagonal().map(|z| (z * 0.7).exp()));
        let expected = &v * exp_d * inverse(&v).unwrap();
        let e = mat_exp(&m, real(0.7)).unwrap();
        let err = spectral_norm(&(e - &expected));
        assert!(err <= 1e-11 * spectral_norm(&expected), "err {err}");
    }

    #[test]
    fn general_eigenvalues_match_trace_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 5, 9, 16] {
            for _ in 0..10 {
                let m = random_matrix(&mut rng, n, n);
                let ev = eigenvalues(&m).unwrap();
                assert_eq!(ev.len(), n);
                let tr: C64 = ev.iter().sum();
                assert!((tr - m.trace()).norm() < 1e-10 * n as f64);
                for &l in &ev {
                    let shifted = &m - identity(n) * l;
                    let smin = shifted.svd(false, false).singular_values.min();
                    assert!(smin < 1e-9 * (1.0 + spectral_norm(&m)), "n={n} smin={smin}");
                }
            }
        }
    }

    #[test]
    fn sylvester_examples() {
        let a = CMatrix::from_element(1, 1, real(2.0));
        let cm = CMatrix::from_element(1, 1, real(0.0));
        let rhs = CMatrix::from_element(1, 1, real(1.0));
        let y = sylvester_solve(&a, &cm, &rhs).unwrap();
        assert!((y[(0, 0)] - real(0.5)).norm() < 1e-16);

        let r = sylvester_solve(&identity(2), &identity(2), &CMatrix::zeros(2, 2));
        assert!(matches!(r, Err(Error::SpectraOverlap { .. })));

        let r = sylvester_solve(&identity(2), &identity(3), &CMatrix::zeros(3, 3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sylvester_residual_random_gapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for case in 0..200 {
            let q = 1 + case % 5;
            let p = 1 + (case / 5) % 4;
            // spectra of a around +4, of c around 0
            let a = random_herm(&mut rng, q).into_matrix() + identity(q) * real(4.0);
            let cm = random_matrix(&mut rng, p, p) * real(0.5);
            let rhs = random_matrix(&mut rng, q, p);
            let y = sylvester_solve(&a, &cm, &rhs).unwrap();
            let res = spectral_norm(&(&a * &y - &y * &cm - &rhs));
            let scale =
                spectral_norm(&rhs) + (spectral_norm(&a) + spectral_norm(&cm)) * spectral_norm(&y);
            assert!(res <= 1e-10 * scale, "case {case}: {res}");
        }
    }

    #[test]
    fn block_helpers_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_matrix(&mut rng, 5, 5);
        let (a, b, cc, d) = split_blocks(&m, 2);
        assert_eq!(block2x2(&a, &b, &cc, &d), m);
    }
}
