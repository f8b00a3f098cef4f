//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! The modulus is passed together with its complement `k' = √(1 - k²)`
//! because the contours we build push `k` to within `1e-6` of 1, where
//! recomputing `k'` from `k` would lose most of its digits.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// Complete elliptic integral of the first kind `K(k)`, given `k'`.
pub fn complete_k(kp: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, kp)
}

/// `(sn, cn, dn)(u | k)` for real `u`, by the descending Landen/AGM scheme.
pub fn jacobi_real(u: f64, k: f64, kp: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kp;
    while c.last().unwrap().abs() > 1e-16 && a.len() < 64 {
        let an = *a.last().unwrap();
        c.push(0.5 * (an - b));
        a.push(0.5 * (an + b));
        b = (an * b).sqrt();
    }
    let levels = a.len() - 1;
    let mut phi = (1u64 << levels) as f64 * a[levels] * u;
    for n in (1..=levels).rev() {
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // 1 - k² sn² written without cancellation.
    let dn = (cn * cn + kp * kp * sn * sn).sqrt();
    (sn, cn, dn)
}

/// `(sn, cn, dn)(u | k)` for complex `u`, via the addition formulas that split
/// `u = x + iy` into real evaluations with moduli `k` and `k'`.
pub fn jacobi_complex(u: Complex64, k: f64, kp: f64) -> (Complex64, Complex64, Complex64) {
    let (s, c, d) = jacobi_real(u.re, k, kp);
    let (s1, c1, d1) = jacobi_real(u.im, kp, k);
    let m = k * k;
    let delta = c1 * c1 + m * s * s * s1 * s1;
    let sn = Complex64::new(s * d1, c * d * s1 * c1) / delta;
    let cn = Complex64::new(c * c1, -s * d * s1 * d1) / delta;
    let dn = Complex64::new(d * c1 * d1, -m * s * c * s1) / delta;
    (sn, cn, dn)
}
