//! Chemical potential search for a target electron number.
//!
//! The constrained problem `min F_β(X)` s.t. `Tr X = N` has the concave dual
//! `g_N(μ) = Nμ + p(μ)`, where `p(μ) = min_X F_β(X) - μ Tr X` is what an
//! unconstrained solve at `μ` returns. Its maximizer lies in an explicit
//! bracket, which we scan on a uniform grid.

use log::warn;

use crate::matfun::dense::dense_eigh;
use crate::matfun::EffectiveHamiltonian;
use crate::mirror::{self, MirrorConfig, Problem};
use crate::scf::{dense_scf, ScfConfig};
use crate::{Error, Result};

/// Matrices up to this size get exact extreme eigenvalues in [`mu_bracket`].
pub const DENSE_BRACKET_CUTOFF: usize = 512;

/// Interval containing the maximizer of `g_N`:
/// `[λ_min(C) - c_h - β⁻¹ log(1/ν), λ_max(C) + c_h + β⁻¹ log(1/(1-ν))]`.
/// `β = ∞` drops the logarithmic terms.
pub fn mu_bracket(core: &EffectiveHamiltonian, beta: f64, c_h: f64, nu: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::DegenerateFilling(nu));
    }
    let (lam_min, lam_max) = if core.len() <= DENSE_BRACKET_CUTOFF {
        let (values, _) = dense_eigh(&core.to_dense())?;
        (values[0], values[values.len() - 1])
    } else {
        let vmin = core.v.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = core.v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (vmin, core.c * core.kinetic().max_eigenvalue() + vmax)
    };
    let temperature = if beta.is_infinite() { 0.0 } else { 1.0 / beta };
    Ok((
        lam_min - c_h - temperature * (1.0 / nu).ln(),
        lam_max + c_h + temperature * (1.0 / (1.0 - nu)).ln(),
    ))
}

/// What a solve at fixed `μ` reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    /// `F_β(X_μ)`.
    pub free_energy: f64,
    /// `Tr X_μ`.
    pub electrons: f64,
}

/// An (approximate) minimizer of `F_β(X) - μ Tr X`.
pub trait MuOracle {
    fn evaluate(&mut self, mu: f64, index: usize) -> Result<OracleValue>;
}

/// Exact oracle backed by [`dense_scf`].
pub struct DenseOracle {
    pub problem: Problem,
    pub scf: ScfConfig,
}

impl MuOracle for DenseOracle {
    fn evaluate(&mut self, mu: f64, _index: usize) -> Result<OracleValue> {
        let result = dense_scf(&self.problem.with_mu(mu), &self.scf)?;
        Ok(OracleValue {
            free_energy: result.free_energy,
            electrons: result.electrons,
        })
    }
}

/// Stochastic oracle: a full mirror descent run per `μ`, reporting the final
/// tail-averaged estimates. Grid point `k` uses seed `seed + k`.
pub struct MirrorOracle {
    pub problem: Problem,
    pub config: MirrorConfig,
}

impl MuOracle for MirrorOracle {
    fn evaluate(&mut self, mu: f64, index: usize) -> Result<OracleValue> {
        let cfg = MirrorConfig {
            seed: self.config.seed.wrapping_add(index as u64),
            ..self.config.clone()
        };
        let mut last = None;
        for report in mirror::run(self.problem.with_mu(mu), cfg, None)? {
            last = Some(report?);
        }
        let report = last.ok_or(Error::NoSamplesYet)?;
        if !report.free_energy.is_finite() {
            return Err(Error::InvalidParameter(
                "mirror oracle needs entropy estimates (entropy_every > 0)".into(),
            ));
        }
        Ok(OracleValue {
            free_energy: report.free_energy,
            electrons: report.objective.electrons,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuEvaluation {
    pub mu: f64,
    /// `ĝ_N(μ) = F + μ(N - Tr X)`, absent when the oracle failed.
    pub value: Option<f64>,
    pub electrons: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct MuScan {
    pub n_target: f64,
    pub nu: f64,
    pub bracket: (f64, f64),
    pub evaluations: Vec<MuEvaluation>,
    /// Index of the largest `ĝ_N` among successful evaluations.
    pub best: usize,
}

impl MuScan {
    pub fn best_mu(&self) -> f64 {
        self.evaluations[self.best].mu
    }

    pub fn best_electrons(&self) -> f64 {
        self.evaluations[self.best].electrons.expect("best point succeeded")
    }
}

/// Evaluates `ĝ_N` at `K + 1` equispaced points of `bracket` and keeps the
/// best. Failed points are recorded and skipped.
pub fn mu_scan(
    oracle: &mut impl MuOracle,
    n_target: f64,
    n_basis: usize,
    bracket: (f64, f64),
    k: usize,
) -> Result<MuScan> {
    let (lo, hi) = bracket;
    if !(lo < hi) || k == 0 {
        return Err(Error::InvalidParameter(format!("need lo < hi and K ≥ 1, got [{lo}, {hi}], K = {k}")));
    }
    let evaluations: Vec<MuEvaluation> = (0..=k)
        .map(|i| {
            let mu = lo + (hi - lo) * i as f64 / k as f64;
            match oracle.evaluate(mu, i) {
                Ok(v) => MuEvaluation {
                    mu,
                    value: Some(v.free_energy + mu * (n_target - v.electrons)),
                    electrons: Some(v.electrons),
                    error: None,
                },
                Err(e) => {
                    warn!("chemical potential {mu}: {e}; point excluded");
                    MuEvaluation {
                        mu,
                        value: None,
                        electrons: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let best = evaluations
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.value.map(|v| (i, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidParameter("every chemical potential evaluation failed".into()))?;
    Ok(MuScan {
        n_target,
        nu: n_target / n_basis as f64,
        bracket,
        evaluations,
        best,
    })
}

/// Bisection on `Tr X(μ) = N`, for oracles where the electron count is
/// reliably monotone in `μ` (the dense one).
pub fn mu_bisect(
    oracle: &mut impl MuOracle,
    n_target: f64,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<(f64, OracleValue)> {
    let (mut lo, mut hi) = bracket;
    let mut best = None;
    for i in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let value = oracle.evaluate(mid, i)?;
        if value.electrons < n_target {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some((mid, value));
        if (value.electrons - n_target).abs() <= tol || hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("max_iter must be at least 1".into()))
}
