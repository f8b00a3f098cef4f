//! Scalar Fermi-Dirac functions and their holomorphic extensions.
//!
//! With `w = βz`, `log f` continues off the real axis as
//! `-Log(1 + e^w)` on `Re w ≤ 0` and `-(w + Log(1 + e^{-w}))` on `Re w > 0`.
//! Both branches only ever take the principal log of a number in the disk
//! `|ζ - 1| < 1`, and they agree on `Re w = 0, |Im w| < π`, so the result is
//! holomorphic off the cut `{iy : |y| ≥ π}`. Every other extension is built
//! from this one: `f^{1/2} = exp(h/2)`, `f = exp(h)`, `f log f = h·exp(h)`.

use num_complex::Complex64;

use crate::{Error, Result};

/// `f_β(x) = 1/(1 + e^{βx})`, evaluated without overflow.
pub fn fermi(x: f64, beta: f64) -> f64 {
    let w = beta * x;
    if w > 0.0 {
        let e = (-w).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + w.exp())
    }
}

/// `log f_β(x) = -log(1 + e^{βx})`.
pub fn ln_fermi(x: f64, beta: f64) -> f64 {
    let w = beta * x;
    if w > 0.0 {
        -(w + (-w).exp().ln_1p())
    } else {
        -w.exp().ln_1p()
    }
}

pub fn sqrt_fermi(x: f64, beta: f64) -> f64 {
    (0.5 * ln_fermi(x, beta)).exp()
}

/// `f log f` with the convention `0·log 0 = 0`.
pub fn fermi_log_fermi(x: f64, beta: f64) -> f64 {
    let l = ln_fermi(x, beta);
    if l == f64::NEG_INFINITY {
        0.0
    } else {
        l * l.exp()
    }
}

/// `f log f + (1 - f) log(1 - f)`, using `1 - f_β(x) = f_β(-x)`.
pub fn entropy_density(x: f64, beta: f64) -> f64 {
    fermi_log_fermi(x, beta) + fermi_log_fermi(-x, beta)
}

fn log1p(u: Complex64) -> Complex64 {
    if u.norm() < 1e-5 {
        u * (1.0 - u * (0.5 - u / 3.0))
    } else {
        (1.0 + u).ln()
    }
}

fn check_cut(w: Complex64) -> Result<()> {
    if w.re == 0.0 && w.im.abs() >= std::f64::consts::PI {
        return Err(Error::OnBranchCut { re: w.re, im: w.im });
    }
    Ok(())
}

/// `log(1 + e^w)` continued off the real axis, for `β = 1`.
fn softplus(w: Complex64) -> Complex64 {
    if w.re <= 0.0 {
        log1p(w.exp())
    } else {
        w + log1p((-w).exp())
    }
}

/// Extension of `log f_β`.
pub fn eval_h(z: Complex64, beta: f64) -> Result<Complex64> {
    let w = z * beta;
    check_cut(w)?;
    Ok(-softplus(w))
}

/// Extension of `f_β^{1/2}`.
pub fn eval_g(z: Complex64, beta: f64) -> Result<Complex64> {
    Ok((eval_h(z, beta)? * 0.5).exp())
}

/// Extension of `f_β`.
pub fn eval_f(z: Complex64, beta: f64) -> Result<Complex64> {
    Ok(eval_h(z, beta)?.exp())
}

/// Extension of `f_β log f_β`.
pub fn eval_gtilde(z: Complex64, beta: f64) -> Result<Complex64> {
    let h = eval_h(z, beta)?;
    Ok(h * h.exp())
}

/// Extension of `f log f + (1 - f) log(1 - f)`.
pub fn eval_entropy(z: Complex64, beta: f64) -> Result<Complex64> {
    Ok(eval_gtilde(z, beta)? + eval_gtilde(-z, beta)?)
}
