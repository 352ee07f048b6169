use adelim::dynamics::{compare, propagate_effective, propagate_exact, time_grid};
use adelim::effective::{
    bloch_hamiltonian, diagonalizer, fast_companion, hermitized_hamiltonian, EffectiveModel,
    Normalizers,
};
use adelim::embedding::{
    fixed_point, iterate, perturbative_series, sylvester_series, t_map, FixedPointOptions,
};
use adelim::linalg::{
    c, eigenvalues, herm_eig, herm_eigenvalues, herm_sqrt, hermiticity_defect, identity, real,
    spectral_distance, spectral_norm, sylvester_solve, unitarity_defect, CMatrix, CVector,
    HermMatrix,
};
use adelim::models::{
    lambda_hamiltonian, lambda_manifold_coefficients, random_matrix_with_norm, random_separated,
    random_unitary_seeded, LambdaParams,
};
use adelim::partition::PartitionedHamiltonian;
use proptest::prelude::*;

fn random_matrix(seed: u64, rows: usize, cols: usize) -> CMatrix {
    random_matrix_with_norm(rows, cols, 1.0, seed)
}

fn hermitian(seed: u64, n: usize, scale: f64) -> HermMatrix {
    HermMatrix::hermitian_part(&(random_matrix(seed, n, n) * real(scale))).unwrap()
}

/// `(p, q, ε, ε′, seed)` inside the convergence region.
fn convergent() -> impl Strategy<Value = PartitionedHamiltonian> {
    (
        1usize..=5,
        1usize..=5,
        0.01f64..0.5,
        0.0f64..0.9,
        any::<u64>(),
    )
        .prop_map(|(p, q, eps, frac, seed)| {
            random_separated(p, q, eps, frac * (1.0 - eps) / 2.0, seed).unwrap()
        })
}

fn lambda_params() -> impl Strategy<Value = LambdaParams> {
    (
        0.5f64..2.0,
        0.003f64..0.05,
        any::<bool>(),
        -0.4f64..0.4,
        -0.4f64..0.4,
        -0.4f64..0.4,
        -0.4f64..0.4,
    )
        .prop_map(|(dbar, d, neg, ar, ai, br, bi)| {
            let delta = if neg { -d } else { d } * dbar;
            LambdaParams::new(delta, c(ar, ai) * dbar, c(br, bi) * dbar, dbar).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn herm_eig_reconstructs(n in 1usize..=64, seed in any::<u64>()) {
        let m = hermitian(seed, n, 3.0);
        let eig = herm_eig(&m).unwrap();
        let rebuilt = eig.map_values(real);
        prop_assert!(spectral_norm(&(rebuilt - m.matrix())) <= 1e-12 * (1.0 + m.norm()));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn herm_sqrt_squares_back(n in 1usize..=12, seed in any::<u64>()) {
        let a = random_matrix(seed, n, n);
        let pd = HermMatrix::hermitian_part(&(&a * a.adjoint() + identity(n) * real(0.1))).unwrap();
        let r = herm_sqrt(&pd).unwrap();
        prop_assert!(spectral_norm(&(r.matrix() * r.matrix() - pd.matrix())) <= 1e-12 * (1.0 + pd.norm()));
    }

    #[test]
    fn spectral_norm_submultiplicative(n in 1usize..=10, k in 1usize..=10, m in 1usize..=10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_matrix(s1, n, k) * real(2.5);
        let b = random_matrix(s2, k, m) * real(0.7);
        prop_assert!(spectral_norm(&(&a * &b)) <= spectral_norm(&a) * spectral_norm(&b) * (1.0 + 1e-12));
    }

    #[test]
    fn sylvester_solve_gapped(p in 1usize..=6, q in 1usize..=6, seed in any::<u64>()) {
        let a = hermitian(seed, p, 1.0);
        let shift = identity(q) * real(4.0);
        let cm = HermMatrix::hermitian_part(&(hermitian(seed ^ 1, q, 1.0).matrix() + shift)).unwrap();
        let rhs = random_matrix(seed ^ 2, p, q);
        let y = sylvester_solve(a.matrix(), cm.matrix(), &rhs).unwrap();
        let res = a.matrix() * &y - &y * cm.matrix() - &rhs;
        prop_assert!(spectral_norm(&res) <= 1e-12 * (1.0 + spectral_norm(&rhs)));
    }

    #[test]
    fn partition_round_trips(n in 2usize..=9, split in 0usize..=9, seed in any::<u64>()) {
        let p = split.min(n - 1);
        let delta_shift = identity(n - p) * real(20.0);
        let mut m = hermitian(seed, n, 1.0).into_matrix();
        let mut tail = m.view_mut((p, p), (n - p, n - p));
        tail += delta_shift;
        let h = HermMatrix::new(m.clone()).unwrap();
        let part = PartitionedHamiltonian::from_hermitian(&h, p).unwrap();
        prop_assert_eq!(part.assemble().into_matrix(), m);
    }

    #[test]
    fn diagnostics_scale_invariant(h in convergent(), s in 0.01f64..100.0) {
        let scaled = PartitionedHamiltonian::new(
            HermMatrix::new(h.omega() * real(s)).unwrap(),
            h.coupling() * real(s),
            HermMatrix::new(h.delta() * real(s)).unwrap(),
        ).unwrap();
        let (a, b) = (h.diagnostics(), scaled.diagnostics());
        prop_assert!((a.eps - b.eps).abs() <= 1e-12 * a.eps.max(1e-300));
        prop_assert!((a.eps_prime - b.eps_prime).abs() <= 1e-12 * a.eps_prime.max(1e-300));
        prop_assert_eq!(a.convergent, b.convergent);
    }

    #[test]
    fn random_separated_hits_targets(p in 1usize..=6, q in 1usize..=6, eps in 0.01f64..0.9, eps_prime in 0.0f64..0.5, seed in any::<u64>()) {
        let h = random_separated(p, q, eps, eps_prime, seed).unwrap();
        let d = h.diagnostics();
        prop_assert!((d.eps - eps).abs() <= 1e-10);
        prop_assert!((d.eps_prime - eps_prime).abs() <= 1e-10);
        prop_assert_eq!(&h, &random_separated(p, q, eps, eps_prime, seed).unwrap());
    }

    #[test]
    fn t_map_obeys_norm_bound(h in convergent(), norm in 0.0f64..5.0, seed in any::<u64>()) {
        let a = random_matrix_with_norm(h.q(), h.p(), norm, seed);
        let bound = h.diagnostics().t_map_bound(spectral_norm(&a));
        prop_assert!(spectral_norm(&t_map(&a, &h).unwrap()) <= bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn balls_are_invariant(h in convergent(), frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let d = h.diagnostics();
        for radius in [d.ball_radius, d.ball_radius_min].into_iter().flatten() {
            let a = random_matrix_with_norm(h.q(), h.p(), frac * radius, seed);
            prop_assert!(spectral_norm(&t_map(&a, &h).unwrap()) <= radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn converged_solution_satisfies_bloch_equation(h in convergent()) {
        let tol = 1e-12;
        let wave = fixed_point(&h, FixedPointOptions { max_iter: 2000, tol }).unwrap();
        let (p, q) = (h.p(), h.q());
        let mut big_b = CMatrix::zeros(p + q, p + q);
        big_b.view_mut((0, 0), (p, p)).copy_from(&identity(p));
        big_b.view_mut((p, 0), (q, p)).copy_from(wave.matrix());
        let full = h.assemble();
        let lhs = spectral_norm(&((full.matrix() * &big_b - &big_b * full.matrix()) * &big_b));
        let bound = (2.0 + 2.0 * spectral_norm(wave.matrix())) * tol * h.delta_norm();
        prop_assert!(lhs <= bound + 1e-13 * full.norm(), "{lhs:e} > {bound:e}");
    }

    #[test]
    fn fixed_point_gauge_covariant(h in convergent(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let va = random_unitary_seeded(h.p(), s1);
        let vg = random_unitary_seeded(h.q(), s2);
        let b = fixed_point(&h, FixedPointOptions::default()).unwrap();
        let b_rot = fixed_point(&h.conjugated(&va, &vg).unwrap(), FixedPointOptions::default()).unwrap();
        prop_assert!(spectral_norm(&(&vg * b.matrix() * va.adjoint() - b_rot.matrix())) <= 1e-10);
    }

    #[test]
    fn uniform_shift_keeps_b(h in convergent(), shift in -0.5f64..0.5) {
        let shifted_h = h.shifted(shift).unwrap();
        // A shift moves ε, ε′; near the boundary contraction is slow.
        prop_assume!(shifted_h.diagnostics().convergent);
        let opts = FixedPointOptions { max_iter: 5000, ..FixedPointOptions::default() };
        let model = EffectiveModel::build(fixed_point(&h, opts).unwrap(), &h).unwrap();
        let shifted = EffectiveModel::build(fixed_point(&shifted_h, opts).unwrap(), &shifted_h).unwrap();
        prop_assert!(spectral_norm(&(model.source.matrix() - shifted.source.matrix())) <= 1e-10);
        prop_assert!(spectral_norm(&(&model.h_bloch + identity(h.p()) * real(shift) - &shifted.h_bloch)) <= 1e-10);
    }

    #[test]
    fn bridge_identity(params in lambda_params()) {
        let h = lambda_hamiltonian(&params).unwrap();
        let series = perturbative_series(&h, 5).unwrap();
        let rows = lambda_manifold_coefficients(&params, 5).unwrap();
        let eps = params.epsilon();
        for (k, (row, term)) in rows.iter().zip(&series.terms).enumerate() {
            let w = eps.powi(k as i32 + 1);
            let scaled = CMatrix::from_row_slice(1, 2, &[row[0] * w, row[1] * w]);
            let scale = spectral_norm(term).max(1e-300);
            prop_assert!(spectral_norm(&(scaled - term)) <= 1e-12 * scale, "k = {}", k + 1);
        }
    }

    #[test]
    fn structure_holds_for_any_b(h in convergent(), norm in 0.0f64..4.0, seed in any::<u64>()) {
        let b = random_matrix_with_norm(h.q(), h.p(), norm, seed);
        prop_assert!(unitarity_defect(&diagonalizer(&b).unwrap()) <= 1e-11);
        prop_assert!(hermiticity_defect(hermitized_hamiltonian(&b, &h).unwrap().matrix()) <= 1e-12);
        prop_assert!(hermiticity_defect(fast_companion(&b, &h).unwrap().matrix()) <= 1e-12);
        let n = Normalizers::new(&b).unwrap();
        prop_assert!(spectral_norm(&(n.s_tilde.matrix() * &b - &b * n.s.matrix())) <= 1e-11);
    }

    #[test]
    fn spectra_match_at_convergence(h in convergent()) {
        let model = EffectiveModel::build(fixed_point(&h, FixedPointOptions::default()).unwrap(), &h).unwrap();
        let full = h.assemble();
        let exact = herm_eigenvalues(&full).unwrap();
        let mut reduced = herm_eigenvalues(&model.h_alpha).unwrap();
        reduced.extend(herm_eigenvalues(&model.h_gamma).unwrap());
        prop_assert!(spectral_distance(&reduced, &exact).unwrap() <= 1e-9 * full.norm());
        for z in eigenvalues(&model.h_bloch).unwrap() {
            let gap = exact.iter().map(|&l| (z - real(l)).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(gap <= 1e-8 * full.norm());
        }
    }

    #[test]
    fn hermitized_evolution_conserves_norm(h in convergent(), norm in 0.0f64..2.0, seed in any::<u64>()) {
        let b = random_matrix_with_norm(h.q(), h.p(), norm, seed);
        let hv = hermitized_hamiltonian(&b, &h).unwrap();
        let alpha0 = CVector::from_fn(h.p(), |i, _| if i == 0 { real(1.0) } else { real(0.0) });
        let traj = propagate_effective(hv.matrix(), &alpha0, &time_grid(100.0, 101)).unwrap();
        prop_assert!(traj.norms().iter().all(|n| (n - 1.0).abs() <= 1e-9));
    }
}

#[test]
fn perturbative_partial_sums_mostly_monotone() {
    let mut rng_seed = 0u64;
    let mut monotone = 0;
    let total = 100;
    for _ in 0..total {
        rng_seed += 1;
        // Deep inside the convergence region so the series itself converges.
        let h = random_separated(3, 3, 0.05, 0.1, rng_seed).unwrap();
        let res = perturbative_series(&h, 8)
            .unwrap()
            .partial_residuals(&h)
            .unwrap();
        if res[1..].windows(2).all(|w| w[1] <= w[0]) {
            monotone += 1;
        }
    }
    assert!(monotone * 100 >= 95 * total, "{monotone}/{total} monotone");
}

#[test]
fn sylvester_series_residuals_decrease_on_lambda() {
    let h = lambda_hamiltonian(&LambdaParams::reference(1.0)).unwrap();
    let res = sylvester_series(&h, 6)
        .unwrap()
        .partial_residuals(&h)
        .unwrap();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn lambda_population_error_improves_with_order() {
    let params = LambdaParams::reference(1.0);
    let h = lambda_hamiltonian(&params).unwrap();
    let times = time_grid(300.0, 3000);
    let psi0 = CVector::from_vec(vec![real(1.0), real(0.0), real(0.0)]);
    let alpha0 = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let exact = propagate_exact(&h.assemble(), &psi0, &times).unwrap();
    let errors: Vec<f64> = [0, 2, 4]
        .iter()
        .map(|&k| {
            let h_eff = bloch_hamiltonian(iterate(&h, k).unwrap().matrix(), &h).unwrap();
            let traj = propagate_effective(&h_eff, &alpha0, &times).unwrap();
            let r = compare(&exact, &traj, &[0, 1], 2.0 * std::f64::consts::PI).unwrap();
            r.max_population_error.iter().copied().fold(0.0, f64::max)
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn lambda_sign_conventions() {
    let params = LambdaParams::new(0.2, c(0.3, 0.1), c(-0.5, 0.0), 7.0).unwrap();
    let m = lambda_hamiltonian(&params)
        .unwrap()
        .assemble()
        .into_matrix();
    assert_eq!(m[(0, 0)], real(-0.1));
    assert_eq!(m[(1, 1)], real(0.1));
    assert_eq!(m[(2, 2)], real(7.0));
    assert_eq!(m[(2, 0)], c(0.15, 0.05));
    assert_eq!(m[(2, 1)], real(-0.25));
    assert_eq!(m[(0, 2)], c(0.15, -0.05));
}

#[test]
fn refined_grid_leaves_metrics_unchanged() {
    let h = lambda_hamiltonian(&LambdaParams::reference(1.0)).unwrap();
    let psi0 = CVector::from_vec(vec![real(1.0), real(0.0), real(0.0)]);
    let alpha0 = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let h_eff = bloch_hamiltonian(iterate(&h, 4).unwrap().matrix(), &h).unwrap();
    let metrics = |n: usize| {
        let times = time_grid(300.0, n);
        let exact = propagate_exact(&h.assemble(), &psi0, &times).unwrap();
        let eff = propagate_effective(&h_eff, &alpha0, &times).unwrap();
        (exact, eff)
    };
    let (exact_c, eff_c) = metrics(3001);
    let (exact_f, eff_f) = metrics(6001);
    // Every coarse point is a fine point; values there must agree.
    for j in 0..exact_c.len() {
        let de = (exact_c.amplitudes.column(j) - exact_f.amplitudes.column(2 * j)).norm();
        let df = (eff_c.amplitudes.column(j) - eff_f.amplitudes.column(2 * j)).norm();
        assert!(
            de <= 1e-9 && df <= 1e-9,
            "t = {}: {de:e} {df:e}",
            exact_c.times[j]
        );
    }
}
