use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;

use crate::lattice::{FourierMultiplier, GridSpec};
use crate::Result;

/// `H = c·K + diag(v)`. This pair is the whole optimizer state; `f_β(H)` is
/// only ever touched through matrix-vector products.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub c: f64,
    pub v: Vec<f64>,
    kinetic: Arc<FourierMultiplier>,
}

impl EffectiveHamiltonian {
    pub fn new(c: f64, v: Vec<f64>, kinetic: Arc<FourierMultiplier>) -> Result<Self> {
        kinetic.grid().check_len(v.len())?;
        Ok(Self { c, v, kinetic })
    }

    pub fn grid(&self) -> &GridSpec {
        self.kinetic.grid()
    }

    pub fn kinetic(&self) -> &Arc<FourierMultiplier> {
        &self.kinetic
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn mean_potential(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = if self.c == 0.0 {
            self.grid().check_len(x.len())?;
            vec![0.0; x.len()]
        } else {
            self.kinetic.apply(x)?
        };
        for ((yi, &xi), &vi) in y.iter_mut().zip(x).zip(&self.v) {
            *yi = self.c * *yi + vi * xi;
        }
        Ok(y)
    }

    /// `out = H x` for complex `x`; `out` is overwritten.
    pub fn apply_complex_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(x);
        if self.c != 0.0 {
            self.kinetic.apply_complex(out);
        }
        for ((o, &xi), &vi) in out.iter_mut().zip(x).zip(&self.v) {
            *o = *o * self.c + xi * vi;
        }
    }

    /// Cheap enclosing interval `[min v - 0.1, c·λ_max(K) + max v + 0.1]`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let (vmin, vmax) = self
            .v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let kmax = self.kinetic.max_eigenvalue();
        let kin = self.c * kmax;
        (vmin + kin.min(0.0) - 0.1, vmax + kin.max(0.0) + 0.1)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut h = if self.c == 0.0 {
            Mat::zeros(self.len(), self.len())
        } else {
            self.kinetic.to_dense() * faer::Scale(self.c)
        };
        for (i, &vi) in self.v.iter().enumerate() {
            h[(i, i)] += vi;
        }
        h
    }
}
