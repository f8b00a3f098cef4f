//! Right-preconditioned complex BiCGSTAB for `(sI - H) x = b`.
//!
//! The preconditioner is the exact inverse of `sI - cK - v̄I`, which is
//! diagonal in Fourier space. When `v` is close to constant the preconditioned
//! operator is close to the identity, which is the regime the optimizer lives in.

use num_complex::Complex64;

use super::{EffectiveHamiltonian, SolverConfig};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ShiftedSolution {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// True relative residual `‖b - (sI - H)x‖ / ‖b‖`.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

struct Shifted<'a> {
    h: &'a EffectiveHamiltonian,
    s: Complex64,
    vbar: f64,
    precondition: bool,
}

impl Shifted<'_> {
    /// `out = (sI - H) x`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.h.apply_complex_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = self.s * xi - *o;
        }
    }

    fn precondition(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(x);
        if !self.precondition {
            return;
        }
        let (s, c, vbar) = (self.s, self.h.c, self.vbar);
        self.h
            .kinetic()
            .apply_spectral(out, |lambda| 1.0 / (s - c * lambda - vbar));
    }

    /// Overwrites the recursive residual with the true one `b - (sI - H)x`,
    /// which can drift apart in floating point, and returns its norm.
    fn replace_residual(&self, x: &[Complex64], b: &[Complex64], r: &mut [Complex64]) -> f64 {
        self.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm(r)
    }

    fn residual(&self, x: &[Complex64], b: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        self.apply(x, scratch);
        scratch
            .iter()
            .zip(b)
            .map(|(ax, bi)| (bi - ax).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Applies the preconditioner `(sI - cK - v̄I)⁻¹` on its own. Exposed for tests.
pub fn apply_preconditioner(h: &EffectiveHamiltonian, s: Complex64, x: &[Complex64]) -> Vec<Complex64> {
    let op = Shifted {
        h,
        s,
        vbar: h.mean_potential(),
        precondition: true,
    };
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    op.precondition(x, &mut out);
    out
}

pub fn solve_shifted(
    h: &EffectiveHamiltonian,
    s: Complex64,
    b: &[Complex64],
    cfg: &SolverConfig,
) -> Result<ShiftedSolution> {
    h.grid().check_len(b.len())?;
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(ShiftedSolution {
            x: vec![zero; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let op = Shifted {
        h,
        s,
        vbar: h.mean_potential(),
        precondition: cfg.use_preconditioner,
    };
    let target = cfg.tol * bnorm;
    let mut x = vec![zero; n];
    let mut iterations = 0;
    let mut restarted = false;

    let mut r = b.to_vec();
    let mut rhat = r.clone();
    let mut p = vec![zero; n];
    let mut v = vec![zero; n];
    let mut phat = vec![zero; n];
    let mut shat = vec![zero; n];
    let mut t = vec![zero; n];
    let mut scratch = vec![zero; n];
    let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));

    loop {
        if iterations >= cfg.max_iter {
            let residual = op.residual(&x, b, &mut scratch) / bnorm;
            return Err(Error::SolverDiverged { iterations, residual });
        }
        let rho_next = dot(&rhat, &r);
        let breakdown = rho_next.norm() <= 1e-30 * norm(&rhat) * norm(&r) || omega.norm() == 0.0;
        if breakdown {
            let residual = op.residual(&x, b, &mut scratch) / bnorm;
            if restarted {
                return Err(Error::Breakdown { iterations, residual });
            }
            restarted = true;
            op.apply(&x, &mut scratch);
            for ((ri, bi), ax) in r.iter_mut().zip(b).zip(&scratch) {
                *ri = bi - ax;
            }
            rhat.copy_from_slice(&r);
            p.fill(zero);
            v.fill(zero);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            continue;
        }
        iterations += 1;
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for ((pi, &ri), &vi) in p.iter_mut().zip(&r).zip(&v) {
            *pi = ri + beta * (*pi - omega * vi);
        }
        op.precondition(&p, &mut phat);
        op.apply(&phat, &mut v);
        let denom = dot(&rhat, &v);
        if denom.norm() == 0.0 {
            omega = Complex64::new(0.0, 0.0);
            continue;
        }
        alpha = rho / denom;
        // r now holds s = r - α v.
        for ((ri, &vi), (xi, &ph)) in r.iter_mut().zip(&v).zip(x.iter_mut().zip(&phat)) {
            *ri -= alpha * vi;
            *xi += alpha * ph;
        }
        if norm(&r) <= target && op.replace_residual(&x, b, &mut r) <= target {
            break;
        }
        op.precondition(&r, &mut shat);
        op.apply(&shat, &mut t);
        let tt = dot(&t, &t).re;
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { Complex64::new(0.0, 0.0) };
        for ((ri, &ti), (xi, &sh)) in r.iter_mut().zip(&t).zip(x.iter_mut().zip(&shat)) {
            *ri -= omega * ti;
            *xi += omega * sh;
        }
        if norm(&r) <= target && op.replace_residual(&x, b, &mut r) <= target {
            break;
        }
    }
    let residual = norm(&r) / bnorm;
    Ok(ShiftedSolution { x, iterations, residual })
}
