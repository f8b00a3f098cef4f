//! Matrix functions of the effective Hamiltonian.

mod chebyshev;
mod contour;
pub mod dense;
pub mod elliptic;
pub mod fermi;
mod hamiltonian;
mod krylov;

pub use chebyshev::{chebyshev_coefficients, chebyshev_matvec};
pub use contour::{
    build_contour, contour_matvec, pole_count_for_tolerance, scalar_error, contour_matvec_complex, contour_matvec_multi, ExpansionKind, PoleExpansion,
    SolveStats, CUT_MARGIN,
};
pub use dense::{dense_eigh, dense_matrix_function, DENSE_CUTOFF};
pub use fermi::{eval_g, eval_gtilde, eval_h};
pub use hamiltonian::EffectiveHamiltonian;
pub use krylov::{apply_preconditioner, solve_shifted, ShiftedSolution};

/// Stopping rule for the shifted solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    pub use_preconditioner: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 1000,
            use_preconditioner: true,
        }
    }
}
