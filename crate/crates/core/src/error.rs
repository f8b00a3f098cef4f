use thiserror::Error;

use crate::scf::ScfResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {size} along axis {axis} is even; every axis needs an odd number of points")]
    EvenGridSize { axis: usize, size: usize },
    #[error("box length {length} along axis {axis} is not positive")]
    NonPositiveLength { axis: usize, length: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("vector length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("floor(zeta * volume) is zero; no background charges to place")]
    ZeroCharges,
    #[error("{requested} background charges requested but the grid has only {available} points")]
    TooManyCharges { requested: usize, available: usize },
    #[error("point {re}+{im}i lies on the branch cut of the Fermi-Dirac extension")]
    OnBranchCut { re: f64, im: f64 },
    #[error("spectral interval [{lo}, {hi}] is empty or not finite")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("pole count {0} must be even and at least 2")]
    OddPoleCount(usize),
    #[error("shifted solve did not reach tolerance in {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("BiCGSTAB broke down twice after {iterations} iterations (relative residual {residual:e})")]
    Breakdown { iterations: usize, residual: f64 },
    #[error("dense oracle refused: n = {n} exceeds the cutoff {cutoff}")]
    TooLargeForDense { n: usize, cutoff: usize },
    #[error("step {gamma} exceeds beta = {beta}")]
    StepTooLarge { gamma: f64, beta: f64 },
    #[error("no density samples have been accumulated yet")]
    NoSamplesYet,
    #[error("dense SCF did not converge in {} iterations (residual {:e})", .0.iterations, .0.residual)]
    NotConverged(Box<ScfResult>),
    #[error("filling factor {0} must lie strictly between 0 and 1")]
    DegenerateFilling(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
