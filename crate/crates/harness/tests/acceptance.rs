//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.
//!
//! `cargo test -p fermihart --test acceptance` runs the default suite, with
//! the reduced variant of criterion 3. Add `-- --ignored` for the full-size
//! criterion 3 run as well (tens of minutes). Positional arguments such as
//! `c4` restrict the run to those criteria.

use std::sync::Arc;
use std::time::Instant;

use faer::Mat;
use fermihart::commands::{self, bench_matvec, contour_check};
use fermihart::RunConfig;
use fermihart_core::chempot::{mu_bisect, mu_bracket, mu_scan, DenseOracle};
use fermihart_core::lattice::{kinetic_multiplier, make_grid};
use fermihart_core::matfun::dense::spectral_function;
use fermihart_core::matfun::fermi::fermi;
use fermihart_core::matfun::{
    build_contour, chebyshev_matvec, contour_matvec, dense_eigh, dense_matrix_function, pole_count_for_tolerance,
    EffectiveHamiltonian, ExpansionKind, SolverConfig,
};
use fermihart_core::mirror::geometry::{bregman_divergence, inverse_mirror_map, mirror_map};
use fermihart_core::mirror::{self, init_state, md_update, sample_gradient, GradientSample, InitKind, MirrorConfig, Problem};
use fermihart_core::rng::gaussian_vector;
use fermihart_core::scf::{dense_electron_count, dense_scf, ScfConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn dense_apply(m: &Mat<f64>, z: &[f64]) -> Vec<f64> {
    (0..z.len()).map(|i| (0..z.len()).map(|j| m[(i, j)] * z[j]).sum()).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn config(json: &str) -> RunConfig {
    RunConfig::from_json(json).expect("acceptance config is valid")
}

fn c1_contour_accuracy() -> Outcome {
    let base = r#""grid": {"dims": 1, "sizes": [101], "lengths": [100.0]}, "physics": {"alpha": 0.5, "beta": BETA},
        "estimator": {"solver_tol": 1e-13}, "contour_check": {"poles": [4, 8, 12, 16, 20, 24, 28, 32, 36, 40], "probes": 5 NORM}"#;
    let mut details = Vec::new();
    let mut pass = true;
    for (beta, normalize) in [(1.0, true), (10.0, false)] {
        let norm = if normalize { r#", "normalize": [-2.0, 6.0]"# } else { "" };
        let cfg = config(&format!("{{{}}}", base.replace("BETA", &beta.to_string()).replace("NORM", norm)));
        let rows = contour_check(&cfg, None).expect("contour check runs");
        let decreasing = rows.windows(2).all(|w| w[1].median_rel_error < w[0].median_rel_error);
        let at20 = rows.iter().find(|r| r.n_poles == 20).expect("20 poles checked").median_rel_error;
        pass &= decreasing;
        if normalize {
            pass &= at20 <= 1e-4;
        }
        details.push(format!(
            "beta={beta}{}: strictly decreasing={decreasing}, N_p=20 {at20:.2e}, N_p=40 {:.2e}",
            if normalize { " on [-2,6]" } else { "" },
            rows.last().unwrap().median_rel_error
        ));
    }
    outcome(pass, details.join("; "))
}

fn c2_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let solver = SolverConfig::default();
    let mut worst_contour: f64 = 0.0;
    let mut worst_cheb: f64 = 0.0;
    let mut max_poles = 0;
    for case in 0..20 {
        let n = 2 * rng.random_range(15..=255) + 1;
        let length = rng.random_range(0.2..2.0) * n as f64;
        let c = rng.random_range(0.3..1.5);
        let amplitude = rng.random_range(0.0..2.0);
        let grid = make_grid(1, &[n], &[length]).unwrap();
        let v = gaussian_vector(case, 7, 0, n).into_iter().map(|x| amplitude * x).collect();
        let h = EffectiveHamiltonian::new(c, v, Arc::new(kinetic_multiplier(&grid))).unwrap();
        let (lo, hi) = h.spectral_bounds();
        let beta = rng.random_range(5.0..100.0) / (hi - lo);
        let exact = dense_matrix_function(&h.to_dense(), beta, ExpansionKind::SqrtFd).unwrap();
        let z = gaussian_vector(case, 8, 0, n);
        let reference = dense_apply(&exact, &z);
        let n_poles = pole_count_for_tolerance(lo, hi, beta, ExpansionKind::SqrtFd, solver.tol, 200).unwrap();
        max_poles = max_poles.max(n_poles);
        let p = build_contour(lo, hi, beta, n_poles, ExpansionKind::SqrtFd).unwrap();
        worst_contour = worst_contour.max(rel_err(&contour_matvec(&h, &p, &z, &solver).unwrap(), &reference));
        worst_cheb = worst_cheb.max(rel_err(&chebyshev_matvec(&h, beta, 2000, &z, (lo, hi)).unwrap(), &reference));
    }
    outcome(
        worst_contour <= 10.0 * solver.tol && worst_cheb <= 1e-6,
        format!(
            "20 Hamiltonians n<=511: contour worst {worst_contour:.2e} (limit {:.0e}, up to {max_poles} poles), chebyshev r=2000 worst {worst_cheb:.2e} (limit 1e-6)",
            10.0 * solver.tol
        ),
    )
}

fn c3_validated_run(cfg: &RunConfig, label: &str) -> Outcome {
    let summary = commands::run(cfg, None).expect("mirror descent run");
    let err = summary.final_rel_density_error.unwrap();
    let gold = summary.final_gold_rel_density_error.unwrap();
    outcome(
        err <= 2.0 * gold && err <= 0.05,
        format!(
            "{label}: {} iterations, {} poles, rel density error {err:.3e} vs gold {gold:.3e} (ratio {:.2}, limit 2 and 0.05)",
            summary.iterations,
            summary.n_poles,
            err / gold
        ),
    )
}

fn c3_smoke() -> Outcome {
    let cfg = config(
        r#"{"grid": {"dims": 1, "sizes": [101], "lengths": [10.0]}, "physics": {"beta": 10.0},
            "schedule": {"gamma0": 1.0}, "estimator": {"n_samples": 20, "pole_tolerance": 1e-5},
            "run": {"t_max": 1000, "seed": 1, "dense_validation": true, "entropy_every": 0}}"#,
    );
    c3_validated_run(&cfg, "n=101 L=10 beta=10, 1000 iterations")
}

fn c3_full() -> Outcome {
    let cfg = config(
        r#"{"grid": {"dims": 1, "sizes": [1281], "lengths": [10.0]}, "physics": {"beta": 10.0},
            "schedule": {"gamma0": 1.0}, "estimator": {"n_samples": 20, "pole_tolerance": 1e-5},
            "run": {"t_max": 5000, "seed": 1, "dense_validation": true, "entropy_every": 0}}"#,
    );
    c3_validated_run(&cfg, "n=1281 L=10 beta=10, 5000 iterations")
}

fn c4_rate() -> Outcome {
    let grid = make_grid(1, &[101], &[100.0]).unwrap();
    let problem = Problem::build(&grid, 10.0, 0.0, 0.5, 1.0, 0).unwrap();
    let reference = dense_scf(&problem, &ScfConfig::default()).unwrap().free_energy;
    let volume = grid.volume();
    let checkpoints: Vec<usize> = (0..=8).map(|k| (100.0 * 20f64.powf(k as f64 / 8.0)).round() as usize).collect();
    let mut errors = vec![Vec::new(); checkpoints.len()];
    let cfg_base = config(r#"{"estimator": {"n_samples": 10, "pole_tolerance": 1e-5}}"#);
    let n_poles = cfg_base.pole_count(&problem).unwrap();
    for seed in 1..=8u64 {
        let cfg = MirrorConfig {
            n_samples: 10,
            n_poles,
            t_max: *checkpoints.last().unwrap(),
            seed,
            entropy_every: 1,
            ..MirrorConfig::default()
        };
        for report in mirror::run(problem.clone(), cfg, None).unwrap() {
            let report = report.unwrap();
            if let Some(k) = checkpoints.iter().position(|&c| c == report.t) {
                errors[k].push((report.free_energy - reference).abs() / volume);
            }
        }
    }
    let medians: Vec<(f64, f64)> = checkpoints
        .iter()
        .zip(&mut errors)
        .map(|(&t, e)| {
            e.sort_by(f64::total_cmp);
            (t as f64, 0.5 * (e[3] + e[4]))
        })
        .collect();
    let slope = log_log_slope(&medians);
    outcome(
        (-0.7..=-0.3).contains(&slope),
        format!(
            "median |F - F*|/V over seeds 1..8 (N_g=10, {n_poles} poles): {:.2e} at T=100, {:.2e} at T=2000, slope {slope:.3} (limit [-0.7, -0.3])",
            medians[0].1,
            medians.last().unwrap().1
        ),
    )
}

fn c5_unbiasedness() -> Outcome {
    let beta = 4.0;
    let grid = make_grid(1, &[15], &[15.0]).unwrap();
    let problem = Problem::build(&grid, beta, 0.0, 0.5, 0.5, 3).unwrap();
    let n = problem.len();
    let tight = SolverConfig {
        tol: 1e-11,
        ..SolverConfig::default()
    };
    // Condition on an iterate a few steps into a run.
    let mut state = init_state(&problem, InitKind::Cbs, 1);
    for t in 0..5 {
        let (lo, hi) = state.h.spectral_bounds();
        let p = build_contour(lo, hi, beta, 40, ExpansionKind::SqrtFd).unwrap();
        let s = sample_gradient(&state.h, &problem, &p, None, &tight, 4, 99, t).unwrap();
        md_update(&mut state, &problem, &s, 1.0).unwrap();
    }
    let (values, vectors) = dense_eigh(&state.h.to_dense()).unwrap();
    let x = spectral_function(&values, &vectors, |l| fermi(l, beta));
    let rho: Vec<f64> = (0..n).map(|i| x[(i, i)]).collect();
    let g = problem.interaction.apply(&rho).unwrap();
    let v = problem.interaction.to_dense();

    let (lo, hi) = state.h.spectral_bounds();
    let n_poles = pole_count_for_tolerance(lo, hi, beta, ExpansionKind::SqrtFd, 1e-9, 200).unwrap();
    let p = build_contour(lo, hi, beta, n_poles, ExpansionKind::SqrtFd).unwrap();
    let repeats = 10_000;
    let mut rho_sum = vec![0.0; n];
    let mut g_sum = vec![0.0; n];
    for r in 0..repeats {
        let s = sample_gradient(&state.h, &problem, &p, None, &tight, 1, 2024, r).unwrap();
        rho_sum.iter_mut().zip(&s.rho_hat).for_each(|(a, b)| *a += b);
        g_sum.iter_mut().zip(&s.g_tilde_diag).for_each(|(a, b)| *a += b);
    }
    // Cov[(X^{1/2}z)_j², (X^{1/2}z)_k²] = 2 X_jk².
    let r = repeats as f64;
    let mut worst_rho: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for i in 0..n {
        let sigma_rho = (2.0 * x[(i, i)].powi(2) / r).sqrt();
        worst_rho = worst_rho.max((rho_sum[i] / r - rho[i]).abs() / sigma_rho);
        let var_g: f64 = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| v[(i, j)] * v[(i, k)] * 2.0 * x[(j, k)].powi(2))
            .sum();
        worst_g = worst_g.max((g_sum[i] / r - g[i]).abs() / (var_g / r).sqrt());
    }
    let frob2: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[(i, j)].powi(2)).sum();
    let trace_z = (rho_sum.iter().sum::<f64>() / r - rho.iter().sum::<f64>()).abs() / (2.0 * frob2 / r).sqrt();
    outcome(
        worst_rho <= 3.0 && worst_g <= 3.0 && trace_z <= 3.0,
        format!("10^4 repeats, n={n}: max |z| over entries rho_hat {worst_rho:.2}, G~ {worst_g:.2}; trace {trace_z:.2} (limit 3)"),
    )
}

fn random_density_matrix(n: usize, rng: &mut ChaCha8Rng) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sym = &a + a.transpose();
    let (_, q) = dense_eigh(&sym).unwrap();
    let occ: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..0.999)).collect();
    let d = Mat::from_fn(n, n, |i, j| if i == j { occ[i] } else { 0.0 });
    &q * &d * q.transpose()
}

fn c6_structural() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut round_trip: f64 = 0.0;
    let mut div_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let x = random_density_matrix(n, &mut rng);
        round_trip = round_trip.max((&inverse_mirror_map(&mirror_map(&x).unwrap()).unwrap() - &x).norm_max());
        let half = Mat::from_fn(n, n, |i, j| if i == j { 0.5 } else { 0.0 });
        let d = bregman_divergence(&x, &half).unwrap();
        div_ok &= d >= -1e-10 && d <= n as f64 * 2f64.ln();
    }

    let mut trace_ok = true;
    let mut min_veff = f64::INFINITY;
    let solver = SolverConfig::default();
    for traj in 0..200u64 {
        let n = 2 * rng.random_range(5..=31) + 1;
        let beta = rng.random_range(0.5..10.0);
        let grid = make_grid(1, &[n], &[n as f64]).unwrap();
        let problem = Problem::build(&grid, beta, rng.random_range(-0.5..0.5), 0.5, 0.5, traj).unwrap();
        let mut state = init_state(&problem, InitKind::Cbs, 1);
        let n0 = dense_electron_count(&state.h.to_dense(), beta).unwrap();
        for t in 0..10 {
            let (lo, hi) = state.h.spectral_bounds();
            let p = build_contour(lo, hi, beta, 40, ExpansionKind::SqrtFd).unwrap();
            let s = sample_gradient(&state.h, &problem, &p, None, &solver, 2, traj, t).unwrap();
            md_update(&mut state, &problem, &s, rng.random_range(0.01..1.0f64).min(beta)).unwrap();
            let nt = dense_electron_count(&state.h.to_dense(), beta).unwrap();
            trace_ok &= nt <= n0 + 1e-12;
            for (v, u) in state.h.v.iter().zip(&problem.external) {
                min_veff = min_veff.min(v - (u - problem.mu));
            }
        }
    }

    let grid = make_grid(1, &[31], &[31.0]).unwrap();
    let problem = Problem::build(&grid, 5.0, 0.0, 0.5, 0.5, 1).unwrap();
    let scf = dense_scf(&problem, &ScfConfig::default()).unwrap();
    let mut state = init_state(&problem, InitKind::Cbs, 1);
    let w = problem.interaction.apply(&scf.rho_star).unwrap();
    for ((v, u), w) in state.h.v.iter_mut().zip(&problem.external).zip(&w) {
        *v = u + w - problem.mu;
    }
    let before = state.h.v.clone();
    md_update(&mut state, &problem, &GradientSample::exact(&problem, scf.rho_star.clone()).unwrap(), 1.0).unwrap();
    let moved = before.iter().zip(&state.h.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    outcome(
        round_trip < 1e-8 && div_ok && trace_ok && min_veff >= 0.0 && moved < 1e-9,
        format!(
            "mirror map round trip {round_trip:.1e}; D(X||I/2) <= n log 2 on 100 X: {div_ok}; Tr X_t <= Tr X_0 on 200 cbs trajectories: {trace_ok}; min V_t {min_veff:.2e}; SCF point moved {moved:.1e}"
        ),
    )
}

fn c7_chemical_potential() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_count: f64 = 0.0;
    for (n, beta, electrons) in [(15, 1.0, 5.0), (31, 1.0, 12.0), (21, 2.0, 8.0), (63, 0.5, 20.0)] {
        let grid = make_grid(1, &[n], &[n as f64]).unwrap();
        let problem = Problem::build(&grid, beta, 0.0, 0.5, 0.5, n as u64).unwrap();
        let nu = electrons / n as f64;
        let bracket = mu_bracket(&problem.core_hamiltonian(), beta, problem.hartree_constant(), nu).unwrap();
        let mut oracle = DenseOracle {
            problem,
            scf: ScfConfig::default(),
        };
        let scan = mu_scan(&mut oracle, electrons, n, bracket, 64).unwrap();
        worst_count = worst_count.max((scan.best_electrons() - electrons).abs());
    }
    let mut inside = 0;
    for k in 0..50u64 {
        let n = 2 * rng.random_range(4..=31) + 1;
        let beta = rng.random_range(0.3..10.0);
        let nu = rng.random_range(0.05..0.95);
        let grid = make_grid(1, &[n], &[rng.random_range(0.5..2.0) * n as f64]).unwrap();
        let problem = Problem::build(&grid, beta, 0.0, rng.random_range(0.2..1.0), 0.5, k).unwrap();
        let bracket = mu_bracket(&problem.core_hamiltonian(), beta, problem.hartree_constant(), nu).unwrap();
        let mut oracle = DenseOracle {
            problem,
            scf: ScfConfig::default(),
        };
        let wide = (bracket.0 - 100.0, bracket.1 + 100.0);
        let (mu, _) = mu_bisect(&mut oracle, nu * n as f64, wide, 1e-10, 300).unwrap();
        if bracket.0 <= mu && mu <= bracket.1 {
            inside += 1;
        }
    }
    outcome(
        worst_count <= 0.5 && inside == 50,
        format!("K=64 dense scans on 4 instances: worst |Tr X - N| {worst_count:.3} (limit 0.5); optimum inside bracket on {inside}/50"),
    )
}

fn c8_scaling() -> Outcome {
    let bench = |sizes: &str, lengths: &str, beta: f64| {
        let cfg = config(&format!(
            r#"{{"grid": {{"dims": {}, "sizes": {sizes}, "lengths": {lengths}}}, "physics": {{"beta": {beta}}},
                "estimator": {{"n_samples": 5, "pole_tolerance": 1e-5}}, "run": {{"t_max": 60, "timing_every": 20, "entropy_every": 0}}}}"#,
            sizes.matches(',').count() + 1
        ));
        bench_matvec(&cfg, None).expect("benchmark runs")
    };
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for beta in [0.5, 2.0, 10.0, 40.0] {
        let row = bench("[12801]", "[100.0]", beta);
        points.push((beta, row.t_vec));
        rows.push(format!("beta={beta}: {:.2}s/{} poles/{} its", row.t_vec, row.n_poles, row.solver_iterations_max));
    }
    let slope = log_log_slope(&points);
    let small = bench("[1281]", "[10.0]", 10.0);
    let large_per_point = points[2].1 / 12801.0;
    let ratio = (small.t_vec_per_point / large_per_point).max(large_per_point / small.t_vec_per_point);

    let cfg3d = config(
        r#"{"grid": {"dims": 3, "sizes": [11, 11, 11], "lengths": [10.0, 10.0, 10.0]}, "physics": {"beta": 10.0},
            "estimator": {"n_samples": 20, "pole_tolerance": 1e-5},
            "run": {"t_max": 300, "seed": 1, "dense_validation": true, "entropy_every": 0}}"#,
    );
    let three_d = c3_validated_run(&cfg3d, "3D (11,11,11) L=10");
    outcome(
        (0.3..=0.7).contains(&slope) && ratio < 3.0 && three_d.pass,
        format!(
            "T_vec vs beta at n=12801 [{}] slope {slope:.3} (limit 0.5 +- 0.2); T_vec/n ratio (1281,10) vs (12801,100) {ratio:.2} (limit 3); {}",
            rows.join(", "),
            three_d.detail
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let selected: Vec<&str> = args.iter().filter(|a| !a.starts_with('-')).map(String::as_str).collect();
    if args.iter().any(|a| a == "--list") {
        for name in ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8"] {
            println!("{name}: test");
        }
        return;
    }

    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome>)> = vec![
        ("c1", "contour accuracy", Box::new(c1_contour_accuracy)),
        ("c2", "oracle equivalence", Box::new(c2_oracle_equivalence)),
        (
            "c3",
            "MD convergence vs ground truth",
            Box::new(move || {
                let smoke = c3_smoke();
                if !full {
                    return outcome(smoke.pass, format!("{} [full n=1281 run skipped; pass --ignored]", smoke.detail));
                }
                let big = c3_full();
                outcome(smoke.pass && big.pass, format!("{}; {}", smoke.detail, big.detail))
            }),
        ),
        ("c4", "1/sqrt(T) rate", Box::new(c4_rate)),
        ("c5", "unbiasedness", Box::new(c5_unbiasedness)),
        ("c6", "structural invariants", Box::new(c6_structural)),
        ("c7", "chemical potential", Box::new(c7_chemical_potential)),
        ("c8", "scaling shape", Box::new(c8_scaling)),
    ];

    let mut failed = 0;
    for (key, name, check) in &criteria {
        if !selected.is_empty() && !selected.iter().any(|s| key.contains(s) || s.contains(key)) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} ({name}): {verdict} [{:.1}s] {}",
            &key[1..],
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
