//! The subcommands as library functions. Each takes a validated config and an
//! optional output directory and returns a serializable summary.

use std::path::Path;
use std::time::Instant;

use fermihart_core::chempot::{self, DenseOracle, MirrorOracle, MuEvaluation};
use fermihart_core::matfun::{
    build_contour, contour_matvec_multi, dense_matrix_function, ExpansionKind, EffectiveHamiltonian,
};
use fermihart_core::mirror::{self, IterationReport, Problem, Validation};
use fermihart_core::rng::gaussian_vector;
use fermihart_core::scf::{dense_scf, GoldStandard, ScfResult};
use fermihart_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::{OracleName, RunConfig};
use crate::dump::dump_density;
use crate::metrics::{write_sidecar, MetricsRecord, MetricsWriter};
use crate::HarnessError;

fn scf_failure(e: Error) -> HarnessError {
    match e {
        Error::NotConverged(r) => HarnessError::Validation(format!(
            "dense SCF did not converge in {} iterations (residual {:e})",
            r.iterations, r.residual
        )),
        other => HarnessError::Solver(other),
    }
}

/// Dense ground truth for `problem`.
pub fn reference(cfg: &RunConfig, problem: &Problem) -> Result<ScfResult, HarnessError> {
    dense_scf(problem, &cfg.scf_config()).map_err(scf_failure)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub n_poles: usize,
    pub final_free_energy_per_volume: f64,
    pub final_electrons_per_volume: f64,
    pub final_rel_density_error: Option<f64>,
    pub final_gold_rel_density_error: Option<f64>,
    pub reference_free_energy_per_volume: Option<f64>,
    /// Mean batch matvec time over the timing iterations, in seconds.
    pub t_vec: Option<f64>,
    #[serde(skip)]
    pub records: Vec<MetricsRecord>,
    #[serde(skip)]
    pub final_density: Vec<f64>,
}

fn record(report: &IterationReport, problem: &Problem, timed: bool) -> MetricsRecord {
    let volume = problem.grid().volume();
    MetricsRecord {
        t: report.t,
        free_energy_per_volume: report.free_energy / volume,
        free_energy_per_basis: report.free_energy / problem.len() as f64,
        hartree_energy_per_volume: report.objective.hartree / volume,
        electrons_per_volume: report.objective.electrons / volume,
        rel_density_error: report.rel_density_error,
        step_gamma: report.gamma,
        wall_time_matvec_batch: timed.then(|| report.matvec_time.as_secs_f64()),
        solver_iterations_max: report.solver_iterations_max,
        gold_rel_density_error: report.gold_rel_density_error,
    }
}

/// Mirror descent on the configured problem.
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<RunSummary, HarnessError> {
    let problem = cfg.problem()?;
    let mirror_cfg = cfg.mirror_config(&problem)?;
    let n_poles = mirror_cfg.n_poles;
    let (validation, reference_free_energy) = if cfg.run.dense_validation {
        let scf = reference(cfg, &problem)?;
        let gold = GoldStandard::from_scf(&scf, problem.beta);
        let f = scf.free_energy / problem.grid().volume();
        (
            Some(Validation {
                reference_density: scf.rho_star,
                gold: Some(gold),
            }),
            Some(f),
        )
    } else {
        (None, None)
    };
    log::info!(
        "mirror descent: n = {}, beta = {}, {} poles, {} samples, {} iterations",
        problem.len(),
        problem.beta,
        n_poles,
        mirror_cfg.n_samples,
        mirror_cfg.t_max
    );

    let mut writer = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(MetricsWriter::create(&dir.join("metrics.csv"))?)
        }
        None => None,
    };
    let grid = problem.grid().clone();
    let mut iter = mirror::run(problem.clone(), mirror_cfg, validation)?;
    let mut records = Vec::new();
    let mut timings = Vec::new();
    while let Some(report) = iter.next() {
        let report = report?;
        let timed = report.t % cfg.run.timing_every == 0;
        if timed {
            timings.push(report.matvec_time.as_secs_f64());
        }
        let rec = record(&report, &problem, timed);
        if let Some(w) = writer.as_mut() {
            w.write(&rec)?;
        }
        let every = cfg.output.density_dump_every;
        if let Some(dir) = out {
            if every > 0 && report.t % every == 0 {
                let rho = mirror::tail_average_density(iter.state())?;
                dump_density(&rho, &grid, &dir.join(format!("density_t{:06}", report.t)))?;
            }
        }
        if report.t % 100 == 0 {
            log::debug!("t = {}: F/V = {:.8}", report.t, rec.free_energy_per_volume);
        }
        records.push(rec);
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    let final_density = match iter.state().t {
        0 => Vec::new(),
        _ => mirror::tail_average_density(iter.state())?,
    };
    let last = records.last();
    let summary = RunSummary {
        iterations: records.len(),
        n_poles,
        final_free_energy_per_volume: last.map_or(f64::NAN, |r| r.free_energy_per_volume),
        final_electrons_per_volume: last.map_or(f64::NAN, |r| r.electrons_per_volume),
        final_rel_density_error: last.and_then(|r| r.rel_density_error),
        final_gold_rel_density_error: last.and_then(|r| r.gold_rel_density_error),
        reference_free_energy_per_volume: reference_free_energy,
        t_vec: (!timings.is_empty()).then(|| timings.iter().sum::<f64>() / timings.len() as f64),
        records,
        final_density,
    };
    if let Some(dir) = out {
        if !summary.final_density.is_empty() {
            dump_density(&summary.final_density, &grid, &dir.join("density"))?;
        }
        write_sidecar("run", cfg, &summary, &dir.join("metrics.json"))?;
    }
    if let (Some(limit), Some(err)) = (cfg.run.max_rel_density_error, summary.final_rel_density_error) {
        if !(err <= limit) {
            return Err(HarnessError::Validation(format!(
                "final relative density error {err:e} exceeds {limit:e}"
            )));
        }
    }
    Ok(summary)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScfSummary {
    pub iterations: usize,
    pub residual: f64,
    pub free_energy_per_volume: f64,
    pub hartree_energy_per_volume: f64,
    pub electrons_per_volume: f64,
    #[serde(skip)]
    pub density: Vec<f64>,
}

/// Dense SCF; writes the reference density.
pub fn scf(cfg: &RunConfig, out: Option<&Path>) -> Result<ScfSummary, HarnessError> {
    let problem = cfg.problem()?;
    let result = reference(cfg, &problem)?;
    let volume = problem.grid().volume();
    let summary = ScfSummary {
        iterations: result.iterations,
        residual: result.residual,
        free_energy_per_volume: result.free_energy / volume,
        hartree_energy_per_volume: result.hartree_energy / volume,
        electrons_per_volume: result.electrons / volume,
        density: result.rho_star,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        dump_density(&summary.density, problem.grid(), &dir.join("reference_density"))?;
        write_sidecar("scf", cfg, &summary, &dir.join("scf.json"))?;
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub n_poles: usize,
    /// Median over probes of `‖y - f^{1/2}(H)z‖ / ‖f^{1/2}(H)z‖`.
    pub median_rel_error: f64,
    pub max_rel_error: f64,
    /// Largest scalar quadrature error on the contour's interval.
    pub scalar_error: f64,
    pub solver_iterations_max: usize,
}

/// `C`, or `C` mapped affinely so its spectrum is exactly `[a, b]`.
pub fn contour_check_hamiltonian(cfg: &RunConfig, problem: &Problem) -> Result<EffectiveHamiltonian, HarnessError> {
    let core = problem.core_hamiltonian();
    let Some([a, b]) = cfg.contour_check.normalize else {
        return Ok(core);
    };
    let (values, _) = fermihart_core::matfun::dense_eigh(&core.to_dense())?;
    let (lo, hi) = (values[0], values[values.len() - 1]);
    let scale = (b - a) / (hi - lo);
    let v = core.v.iter().map(|x| scale * x + a - scale * lo).collect();
    Ok(EffectiveHamiltonian::new(scale * core.c, v, core.kinetic().clone())?)
}

/// Error of the sqrt-FD contour matvec against the dense oracle, per pole
/// count.
pub fn contour_check(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<ContourRow>, HarnessError> {
    let problem = cfg.problem()?;
    let h = contour_check_hamiltonian(cfg, &problem)?;
    let beta = problem.beta;
    let exact = dense_matrix_function(&h.to_dense(), beta, ExpansionKind::SqrtFd)?;
    let n = h.len();
    let probes: Vec<Vec<f64>> = (0..cfg.contour_check.probes.max(1))
        .map(|j| gaussian_vector(cfg.run.seed, u64::MAX, j as u64, n))
        .collect();
    let (lo, hi) = h.spectral_bounds();
    let solver = cfg.solver();
    let mut rows = Vec::new();
    for &n_poles in &cfg.contour_check.poles {
        let p = build_contour(lo, hi, beta, n_poles, ExpansionKind::SqrtFd)?;
        let mut errors = Vec::new();
        let mut iterations = 0;
        for z in &probes {
            let (y, stats) = contour_matvec_multi(&h, &[&p], z, &solver)?;
            iterations = iterations.max(stats.max_iterations);
            let reference: Vec<f64> = (0..n).map(|i| (0..n).map(|j| exact[(i, j)] * z[j]).sum()).collect();
            let num: f64 = y[0].iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = reference.iter().map(|b| b * b).sum();
            errors.push((num / den).sqrt());
        }
        errors.sort_by(f64::total_cmp);
        let mid = errors.len() / 2;
        let median = if errors.len() % 2 == 1 { errors[mid] } else { 0.5 * (errors[mid - 1] + errors[mid]) };
        rows.push(ContourRow {
            n_poles,
            median_rel_error: median,
            max_rel_error: errors[errors.len() - 1],
            scalar_error: fermihart_core::matfun::scalar_error(&p),
            solver_iterations_max: iterations,
        });
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("contour_check.csv"))?;
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
        write_sidecar("contour-check", cfg, &rows, &dir.join("contour_check.json"))?;
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuScanSummary {
    pub electrons_target: f64,
    pub bracket: (f64, f64),
    pub best_mu: f64,
    pub best_electrons: f64,
    pub evaluations: Vec<MuEvaluationRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuEvaluationRow {
    pub mu: f64,
    pub dual_value: Option<f64>,
    pub electrons: Option<f64>,
    pub error: Option<String>,
}

impl From<&MuEvaluation> for MuEvaluationRow {
    fn from(e: &MuEvaluation) -> Self {
        Self {
            mu: e.mu,
            dual_value: e.value,
            electrons: e.electrons,
            error: e.error.clone(),
        }
    }
}

/// Grid search on the dual for the configured electron count.
pub fn mu_scan(cfg: &RunConfig, out: Option<&Path>) -> Result<MuScanSummary, HarnessError> {
    let problem = cfg.problem()?;
    let n = problem.len();
    let target = cfg.chempot.electrons;
    let bracket = chempot::mu_bracket(
        &problem.core_hamiltonian(),
        problem.beta,
        problem.hartree_constant(),
        target / n as f64,
    )?;
    let k = cfg.chempot.grid_points;
    let scan = match cfg.chempot.oracle {
        OracleName::Dense => {
            let mut oracle = DenseOracle {
                problem,
                scf: cfg.scf_config(),
            };
            chempot::mu_scan(&mut oracle, target, n, bracket, k)?
        }
        OracleName::Mirror => {
            let config = cfg.mirror_config(&problem)?;
            let mut oracle = MirrorOracle { problem, config };
            chempot::mu_scan(&mut oracle, target, n, bracket, k)?
        }
    };
    let summary = MuScanSummary {
        electrons_target: target,
        bracket,
        best_mu: scan.best_mu(),
        best_electrons: scan.best_electrons(),
        evaluations: scan.evaluations.iter().map(MuEvaluationRow::from).collect(),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("mu_scan.csv"))?;
        for row in &summary.evaluations {
            w.serialize(row)?;
        }
        w.flush()?;
        write_sidecar("mu-scan", cfg, &summary, &dir.join("mu_scan.json"))?;
    }
    Ok(summary)
}

/// One row of the timing table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub lengths: Vec<f64>,
    pub beta: f64,
    pub gamma0: f64,
    pub n_samples: usize,
    pub n_poles: usize,
    pub iterations: usize,
    pub timed_iterations: usize,
    /// Mean seconds per batch of `n_samples` matvecs.
    pub t_vec: f64,
    pub t_vec_per_point: f64,
    pub solver_iterations_max: usize,
    pub wall_time: f64,
}

/// Runs `t_max` mirror descent iterations and averages the batch matvec time
/// over every `timing_every`-th one.
pub fn bench_matvec(cfg: &RunConfig, out: Option<&Path>) -> Result<BenchRow, HarnessError> {
    let problem = cfg.problem()?;
    let mirror_cfg = cfg.mirror_config(&problem)?;
    let n_poles = mirror_cfg.n_poles;
    let n = problem.len();
    let start = Instant::now();
    let mut timings = Vec::new();
    let mut iterations = 0;
    let mut solver_max = 0;
    for report in mirror::run(problem, mirror_cfg, None)? {
        let report = report?;
        iterations = report.t;
        solver_max = solver_max.max(report.solver_iterations_max);
        if report.t % cfg.run.timing_every == 0 {
            timings.push(report.matvec_time.as_secs_f64());
        }
    }
    if timings.is_empty() {
        return Err(HarnessError::Config(format!(
            "t_max = {} never reaches a timing iteration (every {})",
            cfg.run.t_max, cfg.run.timing_every
        )));
    }
    let t_vec = timings.iter().sum::<f64>() / timings.len() as f64;
    let row = BenchRow {
        n,
        lengths: cfg.grid.lengths.clone(),
        beta: cfg.physics.beta,
        gamma0: cfg.schedule.gamma0,
        n_samples: cfg.estimator.n_samples,
        n_poles,
        iterations,
        timed_iterations: timings.len(),
        t_vec,
        t_vec_per_point: t_vec / n as f64,
        solver_iterations_max: solver_max,
        wall_time: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_sidecar("bench-matvec", cfg, &row, &dir.join("bench_matvec.json"))?;
    }
    Ok(row)
}
