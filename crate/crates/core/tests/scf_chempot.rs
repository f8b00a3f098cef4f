use std::sync::Arc;

use faer::Mat;
use fermihart_core::chempot::{mu_bisect, mu_bracket, mu_scan, DenseOracle};
use fermihart_core::lattice::{kinetic_multiplier, make_grid, FourierMultiplier};
use fermihart_core::matfun::dense::spectral_function;
use fermihart_core::matfun::fermi::fermi;
use fermihart_core::matfun::{dense_eigh, dense_matrix_function, ExpansionKind};
use fermihart_core::mirror::geometry::fd_entropy;
use fermihart_core::mirror::Problem;
use fermihart_core::scf::{dense_scf, gold_standard_density, ScfConfig};
use proptest::prelude::*;

fn problem(n: usize, length: f64, beta: f64, mu: f64, seed: u64) -> Problem {
    let grid = make_grid(1, &[n], &[length]).unwrap();
    Problem::build(&grid, beta, mu, 0.5, 0.5, seed).unwrap()
}

/// `Tr[CX] + ½ρᵀVρ + S_FD(X)/β` for an explicit `X`.
fn free_energy(p: &Problem, x: &Mat<f64>) -> f64 {
    let c = p.core_hamiltonian().to_dense();
    let n = p.len();
    let single: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| c[(i, j)] * x[(i, j)]).sum();
    let rho: Vec<f64> = (0..n).map(|i| x[(i, i)]).collect();
    single + p.hartree_energy(&rho).unwrap() + fd_entropy(x).unwrap() / p.beta
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn scf_solution_beats_the_standard_starts() {
    let p = problem(25, 25.0, 3.0, 0.0, 2);
    let scf = dense_scf(&p, &ScfConfig::default()).unwrap();
    assert!(scf.residual < 1e-9);
    let direct = free_energy(&p, &scf.x_star);
    assert!((direct - scf.free_energy).abs() < 1e-9 * direct.abs().max(1.0));
    let half = Mat::from_fn(25, 25, |i, j| if i == j { 0.5 } else { 0.0 });
    let mut shifted = p.core_hamiltonian().to_dense();
    for i in 0..25 {
        shifted[(i, i)] -= p.mu;
    }
    let cbs = dense_matrix_function(&shifted, p.beta, ExpansionKind::Fd).unwrap();
    // μ = 0, so F_β itself is the minimized objective.
    assert!(scf.free_energy <= free_energy(&p, &half));
    assert!(scf.free_energy <= free_energy(&p, &cbs));
}

#[test]
fn scf_fixed_point_equation_holds() {
    let p = problem(31, 31.0, 5.0, -0.2, 6);
    let scf = dense_scf(&p, &ScfConfig::default()).unwrap();
    let mut h = p.core_hamiltonian().to_dense();
    let hartree = p.interaction.apply(&scf.rho_star).unwrap();
    for i in 0..31 {
        h[(i, i)] += hartree[i] - p.mu;
    }
    let (values, vectors) = dense_eigh(&h).unwrap();
    let x = spectral_function(&values, &vectors, |l| fermi(l, p.beta));
    assert!((&x - &scf.x_star).norm_max() < 1e-8);
}

#[test]
fn scf_is_bitwise_reproducible() {
    let p = problem(101, 100.0, 10.0, 0.0, 0);
    let a = dense_scf(&p, &ScfConfig::default()).unwrap();
    let b = dense_scf(&p, &ScfConfig::default()).unwrap();
    assert_eq!(a.rho_star, b.rho_star);
    assert_eq!(a.free_energy.to_bits(), b.free_energy.to_bits());
}

#[test]
fn gold_standard_error_shrinks_like_inverse_root() {
    let p = problem(21, 21.0, 2.0, 0.0, 3);
    let scf = dense_scf(&p, &ScfConfig::default()).unwrap();
    // Average over seeds to tame the noise, then compare t = 25 with t = 400.
    let err = |t: usize| -> f64 {
        (0..16u64)
            .map(|s| rel_err(&gold_standard_density(&scf.x_star, s, 4, t).unwrap(), &scf.rho_star))
            .sum::<f64>()
            / 16.0
    };
    let ratio = err(25) / err(400);
    assert!((2.5..6.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn dense_scan_reproduces_target_for_free_electrons() {
    let grid = make_grid(1, &[21], &[21.0]).unwrap();
    let zero = Arc::new(FourierMultiplier::from_fn(&grid, 1.0, |_| 0.0));
    let ext = fermihart_core::lattice::background_potential(&grid, 0.3, 0.5, 8).unwrap().values;
    let p = Problem::from_parts(Arc::new(kinetic_multiplier(&grid)), zero, ext, 1.0, 0.0).unwrap();
    let bracket = mu_bracket(&p.core_hamiltonian(), 1.0, 0.0, 8.0 / 21.0).unwrap();
    let mut oracle = DenseOracle {
        problem: p,
        scf: ScfConfig::default(),
    };
    let scan = mu_scan(&mut oracle, 8.0, 21, bracket, 64).unwrap();
    assert_eq!(scan.evaluations.len(), 65);
    // Concave dual: the values rise to the best point and fall after it.
    let values: Vec<f64> = scan.evaluations.iter().map(|e| e.value.unwrap()).collect();
    assert!(values[..scan.best].windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(values[scan.best..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // The electron count changes by at most n·Δμ/4·β between grid points.
    let step = (bracket.1 - bracket.0) / 64.0;
    assert!((scan.best_electrons() - 8.0).abs() <= 21.0 * step / 4.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn optimal_mu_lies_in_bracket(half in 3usize..12, beta in 0.5f64..6.0, fill in 0.1f64..0.9, seed in 0u64..500) {
        let n = 2 * half + 1;
        let p = problem(n, n as f64, beta, 0.0, seed);
        let target = fill * n as f64;
        let bracket = mu_bracket(&p.core_hamiltonian(), beta, p.hartree_constant(), fill).unwrap();
        let mut oracle = DenseOracle { problem: p, scf: ScfConfig::default() };
        let (mu, value) = mu_bisect(&mut oracle, target, (bracket.0 - 50.0, bracket.1 + 50.0), 1e-9, 200).unwrap();
        prop_assert!((value.electrons - target).abs() < 1e-6);
        prop_assert!(bracket.0 < mu && mu < bracket.1, "{mu} outside {bracket:?}");
    }

    #[test]
    fn electron_count_is_monotone_in_mu(seed in 0u64..500, beta in 0.5f64..6.0) {
        let p = problem(15, 15.0, beta, 0.0, seed);
        let mut last = 0.0;
        for k in 0..12 {
            let mu = -3.0 + 0.5 * k as f64;
            let scf = dense_scf(&p.with_mu(mu), &ScfConfig::default()).unwrap();
            prop_assert!(scf.electrons >= last - 1e-9);
            last = scf.electrons;
        }
    }
}
