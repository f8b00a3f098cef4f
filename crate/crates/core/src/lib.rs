//! Stochastic mirror descent for the finite-temperature Hartree problem on a
//! periodic box.
//!
//! The state of the optimizer is never a density matrix. It is an effective
//! Hamiltonian `H = c·K + diag(v)` from which `X = f_β(H)` is defined
//! implicitly, and every quantity the optimizer needs is obtained from
//! matrix-vector products with `f_β(H)^{1/2}` computed by contour quadrature
//! over shifted linear solves.
//!
//! Modules, bottom up:
//!
//! * [`lattice`]: grids, FFT-applied translation-invariant operators, the
//!   Yukawa/Coulomb kernel and random background potentials.
//! * [`matfun`]: Fermi-Dirac holomorphic extensions, the pole expansion,
//!   preconditioned BiCGSTAB for shifted systems, Chebyshev matvecs and a dense
//!   eigendecomposition oracle.
//! * [`mirror`]: the mirror descent state machine and its estimators.
//! * [`scf`]: dense self-consistent field ground truth and the gold-standard
//!   density estimator.
//! * [`chempot`]: chemical potential bracketing and grid search.

pub mod chempot;
mod error;
mod fft;
pub mod lattice;
pub mod matfun;
pub mod mirror;
pub mod rng;
pub mod scf;

pub use error::{Error, Result};
pub use lattice::{ExternalPotential, FourierMultiplier, GridSpec};
pub use matfun::{EffectiveHamiltonian, ExpansionKind, PoleExpansion, SolverConfig};
pub use mirror::{GradientSample, MDState, Problem, ScheduleConfig, ScheduleKind};
pub use num_complex::Complex64;
pub use scf::ScfResult;
