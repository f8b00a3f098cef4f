//! Pole expansions of Fermi-Dirac matrix functions.
//!
//! The functions we need are holomorphic off `{iy : |y| ≥ π/β}`. Substituting
//! `s² = ζ - m` with `m = r²`, `r < π/β`, sends that cut to the negative real
//! ζ axis and the spectrum `[-E, E]` into `[m, M]` with `M = m + E²`, which is
//! the setting of the conformal-map trapezoidal rule for functions analytic
//! in `ℂ \ (-∞, 0]`. The ζ contour is traced with Jacobi elliptic functions;
//! taking both square roots of each ζ node gives the dumbbell-shaped contour in
//! the `s` plane, `N_p/2` ζ nodes giving `N_p` poles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::elliptic::{complete_k, jacobi_complex};
use super::fermi;
use super::krylov::solve_shifted;
use super::{EffectiveHamiltonian, SolverConfig};
use crate::{Error, Result};

/// Fraction of the distance to the branch point `iπ/β` kept free.
pub const CUT_MARGIN: f64 = 0.05;

/// Which function of `H` an expansion approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExpansionKind {
    /// `f_β^{1/2}`.
    SqrtFd,
    /// `f_β`.
    Fd,
    /// `f_β log f_β`.
    FdLogFd,
    /// `f log f + (1 - f) log(1 - f)`, the Fermi-Dirac entropy density.
    Entropy,
}

impl ExpansionKind {
    pub fn eval_complex(self, z: Complex64, beta: f64) -> Result<Complex64> {
        match self {
            Self::SqrtFd => fermi::eval_g(z, beta),
            Self::Fd => fermi::eval_f(z, beta),
            Self::FdLogFd => fermi::eval_gtilde(z, beta),
            Self::Entropy => fermi::eval_entropy(z, beta),
        }
    }

    pub fn eval_real(self, x: f64, beta: f64) -> f64 {
        match self {
            Self::SqrtFd => fermi::sqrt_fermi(x, beta),
            Self::Fd => fermi::fermi(x, beta),
            Self::FdLogFd => fermi::fermi_log_fermi(x, beta),
            Self::Entropy => fermi::entropy_density(x, beta),
        }
    }
}

/// Quadrature nodes `s_i` and combined weights `ŵ_i` with
/// `φ(H) ≈ Σ_i ŵ_i (s_i I - H)⁻¹` on the enclosed interval.
#[derive(Clone, Debug)]
pub struct PoleExpansion {
    nodes: Vec<Complex64>,
    quadrature: Vec<Complex64>,
    weights: Vec<Complex64>,
    beta: f64,
    interval: (f64, f64),
    kind: ExpansionKind,
}

impl PoleExpansion {
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectral_interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same contour with the weights of another function.
    pub fn with_kind(&self, kind: ExpansionKind) -> Result<Self> {
        let weights = self
            .nodes
            .iter()
            .zip(&self.quadrature)
            .map(|(&s, &q)| Ok(q * kind.eval_complex(s, self.beta)?))
            .collect::<Result<_>>()?;
        Ok(Self {
            weights,
            kind,
            ..self.clone()
        })
    }

    /// Scalar version of the expansion, `Σ ŵ_i / (s_i - x)`.
    pub fn eval_scalar(&self, x: f64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w / (s - x)).sum()
    }

    /// True when the interval lies within the one the contour was built for.
    pub fn encloses(&self, lo: f64, hi: f64) -> bool {
        lo >= self.interval.0 && hi <= self.interval.1
    }

    /// Indices of the poles that need a solve, with the factor their real part
    /// enters with: 2 for the upper member of a conjugate pair, 1 for a real node.
    pub fn folded(&self) -> Vec<(usize, f64)> {
        let scale = self.nodes.iter().map(|s| s.norm()).fold(0.0, f64::max);
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                if s.im.abs() <= 1e-14 * scale {
                    Some((i, 1.0))
                } else if s.im > 0.0 {
                    Some((i, 2.0))
                } else {
                    None
                }
            })
            .collect()
    }

    fn same_nodes(&self, other: &Self) -> bool {
        self.beta == other.beta && self.nodes == other.nodes
    }
}

/// Builds an `n_poles`-point expansion of `kind` valid on `[lam_lo, lam_hi]`.
pub fn build_contour(lam_lo: f64, lam_hi: f64, beta: f64, n_poles: usize, kind: ExpansionKind) -> Result<PoleExpansion> {
    if !(lam_lo < lam_hi) || !lam_lo.is_finite() || !lam_hi.is_finite() {
        return Err(Error::InvalidInterval { lo: lam_lo, hi: lam_hi });
    }
    if n_poles < 2 || n_poles % 2 != 0 {
        return Err(Error::OddPoleCount(n_poles));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive and finite")));
    }
    let e = lam_lo.abs().max(lam_hi.abs());
    let r = (1.0 - CUT_MARGIN) * PI / beta;
    let m = r * r;
    let big_m = m + e * e;
    let q = (big_m / m).sqrt();
    let k = (q - 1.0) / (q + 1.0);
    let kp = 2.0 * q.sqrt() / (q + 1.0);
    let kk = complete_k(kp);
    let kkp = complete_k(k);
    let scale = (m * big_m).sqrt();
    let n_zeta = n_poles / 2;
    let h = 4.0 * kk / n_zeta as f64;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);

    let mut nodes = Vec::with_capacity(n_poles);
    let mut quadrature = Vec::with_capacity(n_poles);
    for j in 0..n_zeta {
        let t = Complex64::new(-kk + h * (j as f64 + 0.5), 0.5 * kkp);
        let (sn, cn, dn) = jacobi_complex(t, k, kp);
        let denom = 1.0 - sn * k;
        let zeta = scale * (1.0 + sn * k) / denom;
        let dzeta = scale * 2.0 * k * cn * dn / (denom * denom);
        let root = (zeta - m).sqrt();
        // t runs along the line clockwise around [m, M], hence the minus sign.
        for s in [root, -root] {
            nodes.push(s);
            quadrature.push(-h * dzeta / (2.0 * s) / two_pi_i);
        }
    }
    let base = PoleExpansion {
        nodes,
        weights: Vec::new(),
        quadrature,
        beta,
        interval: (lam_lo, lam_hi),
        kind,
    };
    base.with_kind(kind)
}

/// Largest scalar error `|Σ ŵ_i/(s_i - x) - φ(x)|` over a sample of the
/// interval: uniform points plus points clustered at the low end, where the
/// functions vary on the `1/β` scale however wide the interval is.
pub fn scalar_error(p: &PoleExpansion) -> f64 {
    let (lo, hi) = p.interval;
    let width = hi - lo;
    let uniform = (0..=1000).map(|i| lo + width * i as f64 / 1000.0);
    let near = (0..=400).map(|i| lo + (width.min(60.0 / p.beta) * i as f64 / 400.0));
    uniform
        .chain(near)
        .map(|x| (p.eval_scalar(x) - p.kind.eval_real(x, p.beta)).norm())
        .fold(0.0, f64::max)
}

/// Smallest pole count in steps of 4, up to `max_poles`, whose scalar error
/// on `[lam_lo, lam_hi]` is at most `tol`. Falls back to `max_poles`.
pub fn pole_count_for_tolerance(
    lam_lo: f64,
    lam_hi: f64,
    beta: f64,
    kind: ExpansionKind,
    tol: f64,
    max_poles: usize,
) -> Result<usize> {
    let mut n_poles = 4;
    while n_poles < max_poles {
        if scalar_error(&build_contour(lam_lo, lam_hi, beta, n_poles, kind)?) <= tol {
            return Ok(n_poles);
        }
        n_poles += 4;
    }
    Ok(max_poles)
}

/// Work done by the shifted solves of one contour matvec.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub solves: usize,
    pub max_iterations: usize,
    pub total_iterations: usize,
}

impl SolveStats {
    pub fn merge(self, other: Self) -> Self {
        Self {
            solves: self.solves + other.solves,
            max_iterations: self.max_iterations.max(other.max_iterations),
            total_iterations: self.total_iterations + other.total_iterations,
        }
    }
}

/// `Re Σ_i ŵ_i (s_i I - H)⁻¹ z`, i.e. `φ(H) z`.
pub fn contour_matvec(h: &EffectiveHamiltonian, p: &PoleExpansion, z: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let (mut out, _) = contour_matvec_multi(h, &[p], z, cfg)?;
    Ok(out.pop().expect("one expansion in, one result out"))
}

/// Applies several expansions that share their nodes (built with
/// [`PoleExpansion::with_kind`]) using a single set of shifted solves.
pub fn contour_matvec_multi(
    h: &EffectiveHamiltonian,
    expansions: &[&PoleExpansion],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<Vec<f64>>, SolveStats)> {
    h.grid().check_len(z.len())?;
    let Some(first) = expansions.first() else {
        return Ok((Vec::new(), SolveStats::default()));
    };
    if let Some(other) = expansions.iter().find(|e| !first.same_nodes(e)) {
        return Err(Error::InvalidParameter(format!(
            "expansions of kinds {:?} and {:?} do not share nodes",
            first.kind, other.kind
        )));
    }
    let b: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let solutions = first
        .folded()
        .into_par_iter()
        .map(|(i, factor)| solve_shifted(h, first.nodes[i], &b, cfg).map(|sol| (i, factor, sol)))
        .collect::<Result<Vec<_>>>()?;

    let mut stats = SolveStats::default();
    let mut outputs = vec![vec![0.0; z.len()]; expansions.len()];
    for (i, factor, sol) in &solutions {
        stats = stats.merge(SolveStats {
            solves: 1,
            max_iterations: sol.iterations,
            total_iterations: sol.iterations,
        });
        for (out, e) in outputs.iter_mut().zip(expansions) {
            let w = e.weights[*i] * *factor;
            for (o, x) in out.iter_mut().zip(&sol.x) {
                *o += (w * x).re;
            }
        }
    }
    Ok((outputs, stats))
}

/// The unfolded sum over every pole, imaginary part included. Twice the solve
/// count of [`contour_matvec`]; only useful to check conjugate symmetry.
pub fn contour_matvec_complex(
    h: &EffectiveHamiltonian,
    p: &PoleExpansion,
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<Complex64>> {
    h.grid().check_len(z.len())?;
    let b: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
    for (&s, &w) in p.nodes.iter().zip(&p.weights) {
        let sol = solve_shifted(h, s, &b, cfg)?;
        for (o, x) in out.iter_mut().zip(&sol.x) {
            *o += w * x;
        }
    }
    Ok(out)
}
