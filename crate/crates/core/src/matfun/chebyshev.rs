//! Chebyshev interpolation of `f_β^{1/2}` applied through the three-term
//! recurrence. An alternative to the pole expansion whose cost grows
//! linearly in `β·(λ_hi - λ_lo)`.

use std::f64::consts::PI;

use super::fermi::sqrt_fermi;
use super::EffectiveHamiltonian;
use crate::{Error, Result};

/// Coefficients of the degree-`order` interpolant of `f` at the Chebyshev
/// points of the first kind on `[-1, 1]`.
pub fn chebyshev_coefficients(order: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = order + 1;
    let theta: Vec<f64> = (0..n).map(|j| PI * (j as f64 + 0.5) / n as f64).collect();
    let values: Vec<f64> = theta.iter().map(|t| f(t.cos())).collect();
    (0..n)
        .map(|k| {
            let sum: f64 = theta.iter().zip(&values).map(|(t, v)| v * (k as f64 * t).cos()).sum();
            let norm = if k == 0 { 1.0 } else { 2.0 };
            norm * sum / n as f64
        })
        .collect()
}

/// `f_β^{1/2}(H) z` from a degree-`order` expansion on `bounds`, using `order`
/// products with `H`.
pub fn chebyshev_matvec(
    h: &EffectiveHamiltonian,
    beta: f64,
    order: usize,
    z: &[f64],
    bounds: (f64, f64),
) -> Result<Vec<f64>> {
    h.grid().check_len(z.len())?;
    let (lo, hi) = bounds;
    if !(lo < hi) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let coeffs = chebyshev_coefficients(order, |y| sqrt_fermi(mid + half * y, beta));

    // T_{j+1}(A) z = 2 A T_j(A) z - T_{j-1}(A) z with A = (H - mid)/half.
    let scaled = |x: &[f64]| -> Result<Vec<f64>> {
        let mut y = h.apply(x)?;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - mid * xi) / half;
        }
        Ok(y)
    };
    let mut out: Vec<f64> = z.iter().map(|x| coeffs[0] * x).collect();
    if order == 0 {
        return Ok(out);
    }
    let mut prev = z.to_vec();
    let mut cur = scaled(z)?;
    for (o, c) in out.iter_mut().zip(&cur) {
        *o += coeffs[1] * c;
    }
    for &coef in &coeffs[2..] {
        let mut next = scaled(&cur)?;
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = 2.0 * *nx - p;
        }
        for (o, nx) in out.iter_mut().zip(&next) {
            *o += coef * nx;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(out)
}
