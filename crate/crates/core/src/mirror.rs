//! Stochastic mirror descent with the Fermi-Dirac entropy as mirror map.
//!
//! In Hamiltonian form the update is the convex combination
//! `H_{t+1} = (1 - γ_t/β) H_t + (γ_t/β)(C + G̃_t - μI)`, where
//! `G̃_t = diag(V ρ̂_t)` and `ρ̂_t` is the batch mean of `(f_β(H_t)^{1/2} z)²`
//! over Gaussian `z`. Because `C = K + diag(u)` and `G̃_t` is diagonal, the
//! iterate stays of the form `c·K + diag(v)` and is stored as that pair.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::lattice::{self, FourierMultiplier, GridSpec};
use crate::matfun::{
    build_contour, contour_matvec_multi, EffectiveHamiltonian, ExpansionKind, PoleExpansion, SolveStats,
    SolverConfig,
};
use crate::rng::gaussian_vector;
use crate::scf::GoldStandard;
use crate::{Error, Result};

/// The fixed data of one Hartree problem: `C = K + diag(u)`, the interaction
/// `V`, the inverse temperature and the chemical potential.
#[derive(Clone, Debug)]
pub struct Problem {
    pub kinetic: Arc<FourierMultiplier>,
    pub interaction: Arc<FourierMultiplier>,
    /// External potential `u` at grid points.
    pub external: Vec<f64>,
    pub beta: f64,
    pub mu: f64,
}

impl Problem {
    /// Yukawa interaction and a random background potential on `grid`.
    pub fn build(grid: &GridSpec, beta: f64, mu: f64, alpha: f64, zeta: f64, potential_seed: u64) -> Result<Self> {
        let external = lattice::background_potential(grid, zeta, alpha, potential_seed)?;
        Self::from_parts(
            Arc::new(lattice::kinetic_multiplier(grid)),
            Arc::new(lattice::yukawa_multiplier(grid, alpha)),
            external.values,
            beta,
            mu,
        )
    }

    pub fn from_parts(
        kinetic: Arc<FourierMultiplier>,
        interaction: Arc<FourierMultiplier>,
        external: Vec<f64>,
        beta: f64,
        mu: f64,
    ) -> Result<Self> {
        kinetic.grid().check_len(external.len())?;
        if interaction.grid() != kinetic.grid() {
            return Err(Error::InvalidParameter("kinetic and interaction grids differ".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be positive and finite")));
        }
        Ok(Self {
            kinetic,
            interaction,
            external,
            beta,
            mu,
        })
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }

    pub fn grid(&self) -> &GridSpec {
        self.kinetic.grid()
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    /// `C = K + diag(u)`.
    pub fn core_hamiltonian(&self) -> EffectiveHamiltonian {
        EffectiveHamiltonian::new(1.0, self.external.clone(), self.kinetic.clone()).expect("lengths checked")
    }

    /// `c_h = ‖V‖_∞`.
    pub fn hartree_constant(&self) -> f64 {
        lattice::row_norm(&self.interaction)
    }

    /// `½ ρᵀ V ρ`.
    pub fn hartree_energy(&self, rho: &[f64]) -> Result<f64> {
        let v_rho = self.interaction.apply(rho)?;
        Ok(0.5 * dot(rho, &v_rho))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    /// `X₀ = I/2`, i.e. `H₀ = 0`.
    HalfIdentity,
    /// `X₀ = f_β(C - μI)`, i.e. `H₀ = C - μI`.
    Cbs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `γ_t = γ₀ e^{-t/τ}`.
    ExpDecay,
    Constant,
    /// `γ = ηβ/(η + β)` with `η = 1/(c_{T,m,δ} c_h √T)`.
    Theoretical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleConfig {
    pub gamma0: f64,
    pub decay_tau: f64,
    pub kind: ScheduleKind,
    /// Horizon `T` of the theoretical schedule.
    pub horizon: usize,
    /// Failure probability `δ` of the theoretical schedule.
    pub delta: f64,
    /// `c_h`, needed by the theoretical schedule only.
    pub hartree_constant: f64,
    /// Basis size `m`, needed by the theoretical schedule only.
    pub basis_size: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            decay_tau: 1000.0,
            kind: ScheduleKind::ExpDecay,
            horizon: 5000,
            delta: 0.1,
            hartree_constant: 1.0,
            basis_size: 1,
        }
    }
}

/// Step size at iteration `t` (0-based), clamped to `β`.
pub fn step_size(sched: &ScheduleConfig, t: usize, beta: f64) -> f64 {
    match sched.kind {
        ScheduleKind::ExpDecay => (sched.gamma0 * (-(t as f64) / sched.decay_tau).exp()).min(beta),
        ScheduleKind::Constant => sched.gamma0.min(beta),
        ScheduleKind::Theoretical => {
            let horizon = sched.horizon.max(1) as f64;
            let c = 2.0 * (1.0 + 4.0 * (2.0 * horizon * sched.basis_size.max(1) as f64 / sched.delta).ln());
            let eta = 1.0 / (c * sched.hartree_constant * horizon.sqrt());
            eta * beta / (eta + beta)
        }
    }
}

/// Mean over the last half of a stream of vectors, `{ρ̂_s : ⌈t/2⌉ ≤ s ≤ t}`.
///
/// The window start moves, so old samples have to be kept. With `block = 1`
/// they are kept individually and the mean is exact. Larger blocks store only
/// block sums; the window then starts at the beginning of the block holding
/// sample `⌈t/2⌉`, which bounds memory by `n·t/(2·block)` values.
#[derive(Clone, Debug)]
pub struct TailAverage {
    n: usize,
    block: usize,
    t: usize,
    blocks: VecDeque<Block>,
    window_sum: Vec<f64>,
    window_count: usize,
}

#[derive(Clone, Debug)]
struct Block {
    first: usize,
    count: usize,
    sum: Vec<f64>,
}

impl TailAverage {
    pub fn new(n: usize, block: usize) -> Self {
        Self {
            n,
            block: block.max(1),
            t: 0,
            blocks: VecDeque::new(),
            window_sum: vec![0.0; n],
            window_count: 0,
        }
    }

    /// Block size keeping at most `budget` stored values over `horizon` pushes.
    pub fn for_budget(n: usize, horizon: usize, budget: usize) -> Self {
        let needed = n.saturating_mul(horizon / 2 + 2);
        Self::new(n, needed.div_ceil(budget.max(1)))
    }

    pub fn is_exact(&self) -> bool {
        self.block == 1
    }

    pub fn count(&self) -> usize {
        self.t
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.n);
        self.t += 1;
        match self.blocks.back_mut() {
            Some(b) if b.count < self.block => {
                b.count += 1;
                b.sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
            }
            _ => self.blocks.push_back(Block {
                first: self.t,
                count: 1,
                sum: x.to_vec(),
            }),
        }
        self.window_sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
        self.window_count += 1;
        let start = self.t.div_ceil(2);
        while let Some(front) = self.blocks.front() {
            if front.first + front.count - 1 >= start {
                break;
            }
            let front = self.blocks.pop_front().expect("checked non-empty");
            self.window_sum.iter_mut().zip(&front.sum).for_each(|(s, v)| *s -= v);
            self.window_count -= front.count;
        }
    }

    pub fn mean(&self) -> Result<Vec<f64>> {
        if self.window_count == 0 {
            return Err(Error::NoSamplesYet);
        }
        let scale = 1.0 / self.window_count as f64;
        Ok(self.window_sum.iter().map(|s| s * scale).collect())
    }
}

/// Prefix sums of a scalar series with optional gaps, for tail means.
#[derive(Clone, Debug, Default)]
struct ScalarSeries {
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl ScalarSeries {
    fn push(&mut self, value: Option<f64>) {
        let (s, c) = (self.sums.last().copied().unwrap_or(0.0), self.counts.last().copied().unwrap_or(0));
        match value {
            Some(v) => {
                self.sums.push(s + v);
                self.counts.push(c + 1);
            }
            None => {
                self.sums.push(s);
                self.counts.push(c);
            }
        }
    }

    /// Mean over entries `⌈t/2⌉..=t` (1-based) that are present.
    fn tail_mean(&self) -> Option<f64> {
        let t = self.sums.len();
        if t == 0 {
            return None;
        }
        let before = t.div_ceil(2) - 1;
        let (s0, c0) = if before == 0 { (0.0, 0) } else { (self.sums[before - 1], self.counts[before - 1]) };
        let count = self.counts[t - 1] - c0;
        (count > 0).then(|| (self.sums[t - 1] - s0) / count as f64)
    }
}

/// One batch estimate of the gradient at `H_t`.
#[derive(Clone, Debug)]
pub struct GradientSample {
    /// `ρ̂ = (1/N_g) Σ_j (f^{1/2}(H) z_j)²`.
    pub rho_hat: Vec<f64>,
    /// Diagonal of `G̃ = diag(V ρ̂)`.
    pub g_tilde_diag: Vec<f64>,
    pub batch_size: usize,
    /// The vectors `f^{1/2}(H) z_j`.
    pub sample_sqrt_x_z: Vec<Vec<f64>>,
    /// Batch mean of `yᵀ C y`, an estimate of `Tr[C X]`.
    pub single_particle: f64,
    /// Batch mean of `zᵀ φ(H) z` with `φ` the entropy density, when requested.
    pub entropy: Option<f64>,
    pub stats: SolveStats,
    pub matvec_time: Duration,
}

impl GradientSample {
    /// A noise-free "sample" built from an exact density.
    pub fn exact(problem: &Problem, rho: Vec<f64>) -> Result<Self> {
        let g_tilde_diag = problem.interaction.apply(&rho)?;
        Ok(Self {
            rho_hat: rho,
            g_tilde_diag,
            batch_size: 0,
            sample_sqrt_x_z: Vec::new(),
            single_particle: f64::NAN,
            entropy: None,
            stats: SolveStats::default(),
            matvec_time: Duration::ZERO,
        })
    }
}

/// Draws `N_g` Gaussian vectors from the substreams `(seed, iteration, j)` and
/// applies `f_β^{1/2}(H)` to each. `entropy`, if given, must share the nodes of
/// `sqrt_fd`; its estimate then costs no extra solves.
#[allow(clippy::too_many_arguments)]
pub fn sample_gradient(
    h: &EffectiveHamiltonian,
    problem: &Problem,
    sqrt_fd: &PoleExpansion,
    entropy: Option<&PoleExpansion>,
    cfg: &SolverConfig,
    n_samples: usize,
    seed: u64,
    iteration: u64,
) -> Result<GradientSample> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    let n = h.len();
    let core = problem.core_hamiltonian();
    let mut expansions = vec![sqrt_fd];
    expansions.extend(entropy);
    let start = Instant::now();
    let per_sample = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let z = gaussian_vector(seed, iteration, j as u64, n);
            let (mut out, stats) = contour_matvec_multi(h, &expansions, &z, cfg)?;
            let ent = if out.len() > 1 { Some(dot(&z, &out.pop().expect("two outputs"))) } else { None };
            let y = out.pop().expect("one output");
            Ok((y, ent, stats))
        })
        .collect::<Result<Vec<_>>>()?;
    let matvec_time = start.elapsed();

    let mut rho_hat = vec![0.0; n];
    let mut stats = SolveStats::default();
    let mut single_particle = 0.0;
    let mut entropy_sum = 0.0;
    for (y, ent, st) in &per_sample {
        rho_hat.iter_mut().zip(y).for_each(|(r, v)| *r += v * v);
        single_particle += dot(y, &core.apply(y)?);
        entropy_sum += ent.unwrap_or(0.0);
        stats = stats.merge(*st);
    }
    let scale = 1.0 / n_samples as f64;
    rho_hat.iter_mut().for_each(|r| *r *= scale);
    let g_tilde_diag = problem.interaction.apply(&rho_hat)?;
    Ok(GradientSample {
        rho_hat,
        g_tilde_diag,
        batch_size: n_samples,
        entropy: entropy.map(|_| entropy_sum * scale),
        sample_sqrt_x_z: per_sample.into_iter().map(|(y, _, _)| y).collect(),
        single_particle: single_particle * scale,
        stats,
        matvec_time,
    })
}

/// Optimizer state: the effective Hamiltonian and the running averages.
#[derive(Clone, Debug)]
pub struct MDState {
    pub h: EffectiveHamiltonian,
    pub t: usize,
    pub beta: f64,
    pub mu: f64,
    density: TailAverage,
    single_particle: ScalarSeries,
    entropy: ScalarSeries,
}

/// Builds `H₀`. `tail_block` sets the granularity of the density tail average
/// (1 for exact).
pub fn init_state(problem: &Problem, init: InitKind, tail_block: usize) -> MDState {
    let n = problem.len();
    let h = match init {
        InitKind::HalfIdentity => EffectiveHamiltonian::new(0.0, vec![0.0; n], problem.kinetic.clone()),
        InitKind::Cbs => EffectiveHamiltonian::new(
            1.0,
            problem.external.iter().map(|u| u - problem.mu).collect(),
            problem.kinetic.clone(),
        ),
    }
    .expect("lengths checked");
    MDState {
        h,
        t: 0,
        beta: problem.beta,
        mu: problem.mu,
        density: TailAverage::new(n, tail_block),
        single_particle: ScalarSeries::default(),
        entropy: ScalarSeries::default(),
    }
}

/// Records `sample` in the running averages, then applies
/// `c ← (1-a)c + a`, `v ← (1-a)v + a(u + g̃ - μ)` with `a = γ/β`.
pub fn md_update(state: &mut MDState, problem: &Problem, sample: &GradientSample, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || gamma > state.beta {
        return Err(Error::StepTooLarge { gamma, beta: state.beta });
    }
    problem.grid().check_len(sample.g_tilde_diag.len())?;
    let a = gamma / state.beta;
    state.h.c = (1.0 - a) * state.h.c + a;
    for ((v, &u), &g) in state.h.v.iter_mut().zip(&problem.external).zip(&sample.g_tilde_diag) {
        *v = (1.0 - a) * *v + a * (u + g - state.mu);
    }
    state.density.push(&sample.rho_hat);
    state.single_particle.push(sample.single_particle.is_finite().then_some(sample.single_particle));
    state.entropy.push(sample.entropy);
    state.t += 1;
    Ok(())
}

/// Mean of `ρ̂_s` over `⌈t/2⌉ ≤ s ≤ t`.
pub fn tail_average_density(state: &MDState) -> Result<Vec<f64>> {
    state.density.mean()
}

/// Tail-averaged estimates of the terms of `F_β`, as totals over the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveEstimate {
    pub single_particle: f64,
    pub hartree: f64,
    /// `S_FD`, not yet divided by `β`. `NaN` when no entropy sample exists.
    pub entropy: f64,
    pub electrons: f64,
}

impl ObjectiveEstimate {
    /// `Tr[CX] + Ẽ + S_FD/β`.
    pub fn free_energy(&self, beta: f64) -> f64 {
        self.single_particle + self.hartree + self.entropy / beta
    }
}

pub fn estimate_objective(state: &MDState, problem: &Problem) -> Result<ObjectiveEstimate> {
    let rho = tail_average_density(state)?;
    Ok(ObjectiveEstimate {
        single_particle: state.single_particle.tail_mean().unwrap_or(f64::NAN),
        hartree: problem.hartree_energy(&rho)?,
        entropy: state.entropy.tail_mean().unwrap_or(f64::NAN),
        electrons: rho.iter().sum(),
    })
}

/// Everything the driver needs besides the problem.
#[derive(Clone, Debug)]
pub struct MirrorConfig {
    pub n_samples: usize,
    pub n_poles: usize,
    pub solver: SolverConfig,
    pub schedule: ScheduleConfig,
    pub t_max: usize,
    pub seed: u64,
    pub init: InitKind,
    /// Estimate the entropy every this many iterations; 0 disables it.
    pub entropy_every: usize,
    /// Upper bound on stored density values for the tail average.
    pub tail_budget: usize,
    /// Stop once the tail free energy moves by less than this (relative) over
    /// 100 iterations.
    pub early_stop: Option<f64>,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        Self {
            n_samples: 20,
            n_poles: 20,
            solver: SolverConfig::default(),
            schedule: ScheduleConfig::default(),
            t_max: 5000,
            seed: 0,
            init: InitKind::Cbs,
            entropy_every: 1,
            tail_budget: 1 << 25,
            early_stop: None,
        }
    }
}

/// Reference data for runs on problems small enough for the dense solver.
#[derive(Clone, Debug)]
pub struct Validation {
    pub reference_density: Vec<f64>,
    pub gold: Option<GoldStandard>,
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    /// Number of updates performed, starting at 1.
    pub t: usize,
    pub gamma: f64,
    pub objective: ObjectiveEstimate,
    pub free_energy: f64,
    /// `‖ρ̄ - ρ⋆‖ / ‖ρ⋆‖` with `ρ̄` the tail-averaged density.
    pub rel_density_error: Option<f64>,
    /// The same error for the gold-standard density at this sample count.
    pub gold_rel_density_error: Option<f64>,
    pub matvec_time: Duration,
    pub solver_iterations_max: usize,
    pub n_poles: usize,
}

pub(crate) fn relative_error(a: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// The mirror descent loop as an iterator over per-iteration reports.
pub struct MirrorRun {
    problem: Problem,
    cfg: MirrorConfig,
    state: MDState,
    validation: Option<Validation>,
    history: VecDeque<f64>,
    finished: bool,
}

impl MirrorRun {
    pub fn new(problem: Problem, cfg: MirrorConfig, validation: Option<Validation>) -> Result<Self> {
        if cfg.n_poles < 2 || cfg.n_poles % 2 != 0 {
            return Err(Error::OddPoleCount(cfg.n_poles));
        }
        if let Some(v) = &validation {
            problem.grid().check_len(v.reference_density.len())?;
        }
        let density = TailAverage::for_budget(problem.len(), cfg.t_max, cfg.tail_budget);
        let mut state = init_state(&problem, cfg.init, 1);
        state.density = density;
        Ok(Self {
            problem,
            cfg,
            state,
            validation,
            history: VecDeque::new(),
            finished: false,
        })
    }

    pub fn state(&self) -> &MDState {
        &self.state
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn validation(&self) -> Option<&Validation> {
        self.validation.as_ref()
    }

    pub fn into_state(self) -> MDState {
        self.state
    }

    /// Pole expansions valid for the current Hamiltonian.
    pub fn expansions(&self, with_entropy: bool) -> Result<(PoleExpansion, Option<PoleExpansion>)> {
        let (lo, hi) = self.state.h.spectral_bounds();
        let sqrt = build_contour(lo, hi, self.problem.beta, self.cfg.n_poles, ExpansionKind::SqrtFd)?;
        let entropy = if with_entropy { Some(sqrt.with_kind(ExpansionKind::Entropy)?) } else { None };
        Ok((sqrt, entropy))
    }

    fn step(&mut self) -> Result<IterationReport> {
        let t = self.state.t;
        let gamma = step_size(&self.cfg.schedule, t, self.problem.beta);
        let with_entropy = self.cfg.entropy_every > 0 && t % self.cfg.entropy_every == 0;
        let (sqrt, entropy) = self.expansions(with_entropy)?;
        let sample = sample_gradient(
            &self.state.h,
            &self.problem,
            &sqrt,
            entropy.as_ref(),
            &self.cfg.solver,
            self.cfg.n_samples,
            self.cfg.seed,
            t as u64,
        )?;
        md_update(&mut self.state, &self.problem, &sample, gamma)?;
        let objective = estimate_objective(&self.state, &self.problem)?;
        let (rel_density_error, gold_rel_density_error) = match &mut self.validation {
            Some(v) => {
                let rho = tail_average_density(&self.state)?;
                let gold = match &mut v.gold {
                    Some(g) => {
                        g.push_iteration(self.cfg.seed, t as u64, self.cfg.n_samples);
                        Some(relative_error(&g.density()?, &v.reference_density))
                    }
                    None => None,
                };
                (Some(relative_error(&rho, &v.reference_density)), gold)
            }
            None => (None, None),
        };
        Ok(IterationReport {
            t: self.state.t,
            gamma,
            free_energy: objective.free_energy(self.problem.beta),
            objective,
            rel_density_error,
            gold_rel_density_error,
            matvec_time: sample.matvec_time,
            solver_iterations_max: sample.stats.max_iterations,
            n_poles: self.cfg.n_poles,
        })
    }

    fn should_stop(&mut self, report: &IterationReport) -> bool {
        let Some(tol) = self.cfg.early_stop else {
            return false;
        };
        let value = if report.free_energy.is_finite() {
            report.free_energy
        } else {
            report.objective.single_particle + report.objective.hartree
        };
        self.history.push_back(value);
        if self.history.len() > 100 {
            let old = self.history.pop_front().expect("non-empty");
            return (value - old).abs() <= tol * value.abs().max(1e-300);
        }
        false
    }
}

impl Iterator for MirrorRun {
    type Item = Result<IterationReport>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished || self.state.t >= self.cfg.t_max {
            return None;
        }
        let report = self.step();
        match &report {
            Ok(r) => {
                if self.should_stop(r) {
                    self.finished = true;
                }
            }
            Err(_) => self.finished = true,
        }
        Some(report)
    }
}

/// Starts a run; see [`MirrorRun`].
pub fn run(problem: Problem, cfg: MirrorConfig, validation: Option<Validation>) -> Result<MirrorRun> {
    MirrorRun::new(problem, cfg, validation)
}

/// Dense forms of the mirror geometry, for checks on small matrices.
pub mod geometry {
    use faer::Mat;

    use crate::matfun::dense::{dense_eigh, spectral_function};
    use crate::Result;

    /// `∇S_FD(X) = log(X (I - X)⁻¹)`, for `0 ≺ X ≺ I`.
    pub fn mirror_map(x: &Mat<f64>) -> Result<Mat<f64>> {
        let (values, vectors) = dense_eigh(x)?;
        Ok(spectral_function(&values, &vectors, |p| (p / (1.0 - p)).ln()))
    }

    /// `(∇S_FD)⁻¹(Y) = (I + e^{-Y})⁻¹`.
    pub fn inverse_mirror_map(y: &Mat<f64>) -> Result<Mat<f64>> {
        let (values, vectors) = dense_eigh(y)?;
        Ok(spectral_function(&values, &vectors, |l| crate::matfun::fermi::fermi(-l, 1.0)))
    }

    /// `S_FD(X) = Tr[X log X + (I - X) log(I - X)]`.
    pub fn fd_entropy(x: &Mat<f64>) -> Result<f64> {
        let (values, _) = dense_eigh(x)?;
        Ok(values.iter().map(|&p| xlogx(p) + xlogx(1.0 - p)).sum())
    }

    fn xlogx(p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            p * p.ln()
        }
    }

    /// `D(Y‖X) = S(Y) - S(X) - ⟨∇S(X), Y - X⟩`.
    pub fn bregman_divergence(y: &Mat<f64>, x: &Mat<f64>) -> Result<f64> {
        let grad = mirror_map(x)?;
        let diff = y - x;
        let inner: f64 = (0..x.nrows())
            .flat_map(|i| (0..x.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| grad[(i, j)] * diff[(i, j)])
            .sum();
        Ok(fd_entropy(y)? - fd_entropy(x)? - inner)
    }
}
