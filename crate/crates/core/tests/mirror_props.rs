use faer::Mat;
use fermihart_core::lattice::make_grid;
use fermihart_core::matfun::dense::spectral_function;
use fermihart_core::matfun::{build_contour, dense_eigh, ExpansionKind, SolverConfig};
use fermihart_core::mirror::geometry::{bregman_divergence, fd_entropy, inverse_mirror_map, mirror_map};
use fermihart_core::mirror::{init_state, md_update, sample_gradient, GradientSample, InitKind, Problem};
use fermihart_core::rng::gaussian_vector;
use fermihart_core::scf::{dense_electron_count, dense_scf, ScfConfig};
use proptest::prelude::*;

/// `Q diag(p) Qᵀ` with `Q` the eigenvectors of a random symmetric matrix.
fn random_density_matrix(n: usize, occupations: &[f64], seed: u64) -> Mat<f64> {
    let g = gaussian_vector(seed, 0, 0, n * n);
    let a = Mat::from_fn(n, n, |i, j| g[i * n + j] + g[j * n + i]);
    let (_, q) = dense_eigh(&a).unwrap();
    let p = occupations.to_vec();
    let d = Mat::from_fn(n, n, |i, j| if i == j { p[i] } else { 0.0 });
    &q * &d * q.transpose()
}

fn small_problem(n: usize, beta: f64, seed: u64) -> Problem {
    let grid = make_grid(1, &[n], &[n as f64]).unwrap();
    Problem::build(&grid, beta, 0.0, 0.5, 0.5, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mirror_map_round_trip(occ in prop::collection::vec(0.01f64..0.99, 2..24), seed in any::<u64>()) {
        let x = random_density_matrix(occ.len(), &occ, seed);
        let back = inverse_mirror_map(&mirror_map(&x).unwrap()).unwrap();
        prop_assert!((&back - &x).norm_max() < 1e-10);
    }

    #[test]
    fn divergence_from_half_identity_is_bounded(occ in prop::collection::vec(0.0f64..=1.0, 1..32), seed in any::<u64>()) {
        let n = occ.len();
        let x = random_density_matrix(n, &occ, seed);
        let half = Mat::from_fn(n, n, |i, j| if i == j { 0.5 } else { 0.0 });
        let d = bregman_divergence(&x, &half).unwrap();
        prop_assert!(d >= -1e-10);
        prop_assert!(d <= n as f64 * 2f64.ln() + 1e-10);
        // At X₀ = I/2 the gradient vanishes, so D(X‖I/2) = S(X) + n log 2.
        prop_assert!((d - fd_entropy(&x).unwrap() - n as f64 * 2f64.ln()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cbs_trajectories_lose_electrons_and_keep_nonnegative_hartree(
        half in 4usize..12,
        beta in 0.5f64..4.0,
        gamma in 0.05f64..1.0,
        seed in 0u64..1000,
    ) {
        let n = 2 * half + 1;
        let problem = small_problem(n, beta, seed);
        let kernel = problem.interaction.to_dense();
        prop_assume!((0..n).all(|j| kernel[(0, j)] >= 0.0));
        let mut state = init_state(&problem, InitKind::Cbs, 1);
        let n0 = dense_electron_count(&state.h.to_dense(), beta).unwrap();
        let solver = SolverConfig::default();
        for t in 0..12 {
            let (lo, hi) = state.h.spectral_bounds();
            let p = build_contour(lo, hi, beta, 32, ExpansionKind::SqrtFd).unwrap();
            let sample = sample_gradient(&state.h, &problem, &p, None, &solver, 2, seed, t).unwrap();
            md_update(&mut state, &problem, &sample, gamma.min(beta)).unwrap();
            prop_assert_eq!(state.h.c, 1.0);
            for (v, u) in state.h.v.iter().zip(&problem.external) {
                prop_assert!(v - (u - problem.mu) >= 0.0);
            }
            let nt = dense_electron_count(&state.h.to_dense(), beta).unwrap();
            prop_assert!(nt <= n0 + 1e-12);
        }
    }
}

#[test]
fn scf_fixed_point_is_stationary() {
    let problem = small_problem(21, 2.0, 4);
    let scf = dense_scf(&problem, &ScfConfig::default()).unwrap();
    let mut state = init_state(&problem, InitKind::Cbs, 1);
    let hartree = problem.interaction.apply(&scf.rho_star).unwrap();
    for ((v, u), w) in state.h.v.iter_mut().zip(&problem.external).zip(&hartree) {
        *v = u + w - problem.mu;
    }
    let before = state.h.v.clone();
    let exact = GradientSample::exact(&problem, scf.rho_star.clone()).unwrap();
    md_update(&mut state, &problem, &exact, 1.0).unwrap();
    let moved = before.iter().zip(&state.h.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(moved < 1e-9, "moved by {moved:e}");
}

#[test]
fn hartree_gradient_matches_finite_differences() {
    let problem = small_problem(15, 1.0, 9);
    let rho: Vec<f64> = gaussian_vector(3, 0, 0, 15).iter().map(|x| 0.5 + 0.2 * x).collect();
    let grad = problem.interaction.apply(&rho).unwrap();
    let h = 1e-6;
    for i in [0, 4, 14] {
        let mut up = rho.clone();
        let mut down = rho.clone();
        up[i] += h;
        down[i] -= h;
        let fd = (problem.hartree_energy(&up).unwrap() - problem.hartree_energy(&down).unwrap()) / (2.0 * h);
        assert!((fd - grad[i]).abs() < 1e-7, "site {i}: {fd} vs {}", grad[i]);
    }
}

#[test]
fn density_estimate_is_unbiased() {
    let problem = small_problem(11, 2.0, 1);
    let state = init_state(&problem, InitKind::Cbs, 1);
    let (values, vectors) = dense_eigh(&state.h.to_dense()).unwrap();
    let x = spectral_function(&values, &vectors, |l| fermihart_core::matfun::fermi::fermi(l, 2.0));
    let (lo, hi) = state.h.spectral_bounds();
    let p = build_contour(lo, hi, 2.0, 40, ExpansionKind::SqrtFd).unwrap();
    let repeats = 2000;
    let mut trace_sum = 0.0;
    for r in 0..repeats {
        let s = sample_gradient(&state.h, &problem, &p, None, &SolverConfig::default(), 1, 5, r).unwrap();
        trace_sum += s.rho_hat.iter().sum::<f64>();
    }
    // Var[zᵀXz] = 2‖X‖_F².
    let frob2: f64 = (0..11).flat_map(|i| (0..11).map(move |j| (i, j))).map(|(i, j)| x[(i, j)].powi(2)).sum();
    let sigma = (2.0 * frob2 / repeats as f64).sqrt();
    let trace: f64 = (0..11).map(|i| x[(i, i)]).sum();
    assert!((trace_sum / repeats as f64 - trace).abs() <= 3.0 * sigma);
}
