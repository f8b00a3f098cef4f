//! JSON run configuration.
//!
//! Every field has a default, so `{}` is a valid (small) configuration. The
//! defaults describe the 1D benchmark box: 101 points over length 100,
//! `β = 10`, `α = 0.5`, `ζ = 1`, 20 samples and 20 poles per iteration.

use std::path::{Path, PathBuf};

use fermihart_core::lattice::{self, GridSpec};
use fermihart_core::matfun::{pole_count_for_tolerance, ExpansionKind, SolverConfig};
use fermihart_core::mirror::{InitKind, MirrorConfig, Problem, ScheduleConfig, ScheduleKind};
use fermihart_core::scf::ScfConfig;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub schedule: ScheduleSection,
    pub estimator: EstimatorConfig,
    pub run: RunSection,
    pub output: OutputConfig,
    pub scf: ScfSection,
    pub chempot: ChempotConfig,
    pub contour_check: ContourCheckConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dims: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dims: 1,
            sizes: vec![101],
            lengths: vec![100.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub beta: f64,
    pub mu: f64,
    /// Yukawa screening; 0 gives the Coulomb kernel.
    pub alpha: f64,
    /// Density of point charges in the background.
    pub zeta: f64,
    /// Seed of the background potential, independent of the sampling seed.
    pub potential_seed: u64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            beta: 10.0,
            mu: 0.0,
            alpha: 0.5,
            zeta: 1.0,
            potential_seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    ExpDecay,
    Constant,
    Theoretical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub gamma0: f64,
    pub decay_tau: f64,
    pub kind: ScheduleName,
    /// Accept a constant step above `β` and clamp it instead of rejecting it.
    pub clamp: bool,
    pub delta: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            decay_tau: 1000.0,
            kind: ScheduleName::ExpDecay,
            clamp: false,
            delta: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Gaussian vectors per iteration.
    pub n_samples: usize,
    /// Quadrature nodes, counting conjugate pairs twice.
    pub n_poles: usize,
    /// When set, `n_poles` is replaced by the smallest count whose scalar
    /// quadrature error on the initial spectral interval is below this.
    pub pole_tolerance: Option<f64>,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub preconditioner: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_samples: 20,
            n_poles: 20,
            pole_tolerance: None,
            solver_tol: 1e-5,
            solver_max_iter: 1000,
            preconditioner: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitName {
    HalfIdentity,
    Cbs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_max: usize,
    pub seed: u64,
    pub init: InitName,
    /// Solve the problem densely and report errors against it.
    pub dense_validation: bool,
    /// Fail with a validation error if the final relative density error
    /// exceeds this. Needs `dense_validation`.
    pub max_rel_density_error: Option<f64>,
    pub entropy_every: usize,
    /// Record the batch matvec time every this many iterations.
    pub timing_every: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_max: 5000,
            seed: 0,
            init: InitName::Cbs,
            dense_validation: false,
            max_rel_density_error: None,
            entropy_every: 1,
            timing_every: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Dump the tail-averaged density every this many iterations; 0 dumps
    /// only the final one.
    pub density_dump_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            density_dump_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScfSection {
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfSection {
    fn default() -> Self {
        let d = ScfConfig::default();
        Self {
            mixing: d.mixing,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleName {
    Dense,
    Mirror,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChempotConfig {
    pub electrons: f64,
    /// Number of grid intervals `K`.
    pub grid_points: usize,
    pub oracle: OracleName,
}

impl Default for ChempotConfig {
    fn default() -> Self {
        Self {
            electrons: 10.0,
            grid_points: 64,
            oracle: OracleName::Dense,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourCheckConfig {
    pub poles: Vec<usize>,
    /// Random probe vectors per pole count.
    pub probes: usize,
    /// Affinely map the spectrum of `C` onto this interval first.
    pub normalize: Option<[f64; 2]>,
}

impl Default for ContourCheckConfig {
    fn default() -> Self {
        Self {
            poles: (1..=10).map(|k| 4 * k).collect(),
            probes: 5,
            normalize: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        let g = &self.grid;
        if g.sizes.len() != g.dims || g.lengths.len() != g.dims {
            return fail(format!("grid has dims = {} but {} sizes and {} lengths", g.dims, g.sizes.len(), g.lengths.len()));
        }
        if let Some(s) = g.sizes.iter().find(|s| *s % 2 == 0) {
            return fail(format!("grid sizes must be odd, got {s}"));
        }
        if !(self.physics.beta > 0.0 && self.physics.beta.is_finite()) {
            return fail(format!("beta must be positive and finite, got {}", self.physics.beta));
        }
        let e = &self.estimator;
        if e.n_poles < 2 || e.n_poles % 2 != 0 {
            return fail(format!("n_poles must be even and at least 2, got {}", e.n_poles));
        }
        if let Some(p) = self.contour_check.poles.iter().find(|p| **p < 2 || *p % 2 != 0) {
            return fail(format!("contour_check pole counts must be even, got {p}"));
        }
        if e.n_samples == 0 {
            return fail("n_samples must be at least 1".into());
        }
        let s = &self.schedule;
        if !(s.gamma0 > 0.0) {
            return fail(format!("gamma0 must be positive, got {}", s.gamma0));
        }
        if s.kind == ScheduleName::Constant && s.gamma0 > self.physics.beta && !s.clamp {
            return fail(format!(
                "constant step {} exceeds beta = {}; set schedule.clamp to accept it",
                s.gamma0, self.physics.beta
            ));
        }
        if self.run.max_rel_density_error.is_some() && !self.run.dense_validation {
            return fail("max_rel_density_error needs dense_validation".into());
        }
        if self.run.timing_every == 0 {
            return fail("timing_every must be at least 1".into());
        }
        let n = self.chempot.electrons;
        let basis: usize = g.sizes.iter().product();
        if !(n > 0.0 && n < basis as f64) || self.chempot.grid_points == 0 {
            return fail(format!("chempot needs 0 < electrons < {basis} and grid_points ≥ 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, HarnessError> {
        Ok(lattice::make_grid(self.grid.dims, &self.grid.sizes, &self.grid.lengths)?)
    }

    pub fn problem(&self) -> Result<Problem, HarnessError> {
        let p = &self.physics;
        Ok(Problem::build(&self.grid()?, p.beta, p.mu, p.alpha, p.zeta, p.potential_seed)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.estimator.solver_tol,
            max_iter: self.estimator.solver_max_iter,
            use_preconditioner: self.estimator.preconditioner,
        }
    }

    pub fn scf_config(&self) -> ScfConfig {
        ScfConfig {
            mixing: self.scf.mixing,
            tol: self.scf.tol,
            max_iter: self.scf.max_iter,
        }
    }

    /// Pole count for `problem`: the configured one, or the one meeting
    /// `pole_tolerance` on the core spectrum widened by the Hartree constant.
    pub fn pole_count(&self, problem: &Problem) -> Result<usize, HarnessError> {
        let Some(tol) = self.estimator.pole_tolerance else {
            return Ok(self.estimator.n_poles);
        };
        let (lo, hi) = problem.core_hamiltonian().spectral_bounds();
        let c_h = problem.hartree_constant();
        let lo = lo - problem.mu;
        let hi = hi - problem.mu + c_h;
        Ok(pole_count_for_tolerance(lo, hi, problem.beta, ExpansionKind::SqrtFd, tol, 400)?)
    }

    pub fn mirror_config(&self, problem: &Problem) -> Result<MirrorConfig, HarnessError> {
        let s = &self.schedule;
        let schedule = ScheduleConfig {
            gamma0: s.gamma0,
            decay_tau: s.decay_tau,
            kind: match s.kind {
                ScheduleName::ExpDecay => ScheduleKind::ExpDecay,
                ScheduleName::Constant => ScheduleKind::Constant,
                ScheduleName::Theoretical => ScheduleKind::Theoretical,
            },
            horizon: self.run.t_max,
            delta: s.delta,
            hartree_constant: problem.hartree_constant(),
            basis_size: problem.len(),
        };
        Ok(MirrorConfig {
            n_samples: self.estimator.n_samples,
            n_poles: self.pole_count(problem)?,
            solver: self.solver(),
            schedule,
            t_max: self.run.t_max,
            seed: self.run.seed,
            init: match self.run.init {
                InitName::HalfIdentity => InitKind::HalfIdentity,
                InitName::Cbs => InitKind::Cbs,
            },
            entropy_every: self.run.entropy_every,
            ..MirrorConfig::default()
        })
    }
}
