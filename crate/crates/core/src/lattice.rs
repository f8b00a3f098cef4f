//! Periodic sinc discretization of a box.
//!
//! Grid functions are stored as flat vectors in row-major multi-index order
//! (the last axis varies fastest). Translation-invariant operators are
//! [`FourierMultiplier`]s: `scale · F · diag(symbol) · F*` with `F` the unitary
//! d-dimensional DFT. Symbols are indexed by the dual multi-index
//! `k ∈ {-ℓ_i, …, ℓ_i}` with `ℓ_i = (n_i - 1)/2`; internally they are kept in
//! FFT layout, where FFT slot `j` holds `k = j` for `j ≤ ℓ` and `k = j - n`
//! otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rand::seq::index;

use crate::fft::{Direction, NdFft};
use crate::rng;
use crate::{Error, Result};

/// Box geometry: odd point counts and side lengths per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
    len: usize,
    volume: f64,
    cell_volume: f64,
}

impl GridSpec {
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidGrid("at least one dimension is required".into()));
        }
        if sizes.len() != lengths.len() {
            return Err(Error::InvalidGrid(format!(
                "{} sizes but {} lengths",
                sizes.len(),
                lengths.len()
            )));
        }
        for (axis, &size) in sizes.iter().enumerate() {
            if size % 2 == 0 {
                return Err(Error::EvenGridSize { axis, size });
            }
        }
        for (axis, &length) in lengths.iter().enumerate() {
            if !(length > 0.0) || !length.is_finite() {
                return Err(Error::NonPositiveLength { axis, length });
            }
        }
        let len = sizes.iter().product();
        let volume = lengths.iter().product::<f64>();
        Ok(Self {
            sizes: sizes.to_vec(),
            lengths: lengths.to_vec(),
            len,
            volume,
            cell_volume: volume / len as f64,
        })
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of grid points `n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `ΔV = volume / n`.
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// `ℓ_i = (n_i - 1) / 2` per axis.
    pub fn half_widths(&self) -> Vec<i64> {
        self.sizes.iter().map(|&s| ((s - 1) / 2) as i64).collect()
    }

    /// Grid multi-index of a flat position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for axis in (0..self.dims()).rev() {
            idx[axis] = flat % self.sizes[axis];
            flat /= self.sizes[axis];
        }
        idx
    }

    /// Dual multi-index `k` held by a flat FFT-layout slot.
    pub fn frequency(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat)
            .into_iter()
            .zip(&self.sizes)
            .map(|(j, &n)| {
                let j = j as i64;
                let n = n as i64;
                if j <= (n - 1) / 2 {
                    j
                } else {
                    j - n
                }
            })
            .collect()
    }

    /// Flat FFT-layout slot of a dual multi-index.
    pub fn frequency_slot(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dims() {
            return None;
        }
        let mut flat = 0usize;
        for ((&ki, &n), l) in k.iter().zip(&self.sizes).zip(self.half_widths()) {
            if ki.abs() > l {
                return None;
            }
            let j = if ki >= 0 { ki } else { ki + n as i64 } as usize;
            flat = flat * n + j;
        }
        Some(flat)
    }

    /// Cartesian coordinates `x_j = j ⊙ Δx` of a flat grid position.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .into_iter()
            .enumerate()
            .map(|(axis, j)| j as f64 * self.lengths[axis] / self.sizes[axis] as f64)
            .collect()
    }

    /// `Σ_i (2π k_i / L_i)²` for the frequency in FFT slot `flat`.
    pub fn wavenumber_squared(&self, flat: usize) -> f64 {
        self.frequency(flat)
            .iter()
            .zip(&self.lengths)
            .map(|(&k, &l)| {
                let q = 2.0 * PI * k as f64 / l;
                q * q
            })
            .sum()
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.len,
                got,
            })
        }
    }
}

/// Validating constructor mirroring the `(dims, sizes, lengths)` triple of a run
/// configuration.
pub fn make_grid(dims: usize, sizes: &[usize], lengths: &[f64]) -> Result<GridSpec> {
    if dims == 0 || sizes.len() != dims || lengths.len() != dims {
        return Err(Error::InvalidGrid(format!(
            "dims = {dims} with {} sizes and {} lengths",
            sizes.len(),
            lengths.len()
        )));
    }
    GridSpec::new(sizes, lengths)
}

/// A translation-invariant operator `scale · F · diag(symbol) · F*`.
#[derive(Clone, Debug)]
pub struct FourierMultiplier {
    grid: GridSpec,
    symbol: Vec<f64>,
    scale: f64,
    fft: Arc<NdFft>,
}

impl FourierMultiplier {
    /// Builds a multiplier from a symbol given on dual multi-indices. The symbol
    /// must be even under `k → -k`.
    pub fn from_fn(grid: &GridSpec, scale: f64, symbol: impl Fn(&[i64]) -> f64) -> Self {
        let symbol = (0..grid.len()).map(|flat| symbol(&grid.frequency(flat))).collect();
        Self {
            fft: Arc::new(NdFft::new(grid.sizes())),
            grid: grid.clone(),
            symbol,
            scale,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Symbol values in FFT layout.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn symbol_at(&self, k: &[i64]) -> Option<f64> {
        self.grid.frequency_slot(k).map(|slot| self.symbol[slot])
    }

    /// Eigenvalues `scale · symbol_k` in FFT layout order.
    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.symbol.iter().map(move |&s| self.scale * s)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::INFINITY, f64::min)
    }

    /// `y = scale · F⁻¹(symbol ⊙ F x)` for real `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_len(x.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply_complex(&mut buf);
        let y: Vec<f64> = buf.iter().map(|c| c.re).collect();
        // Round-off scales with the input, not the (possibly cancelled) output.
        // The 1-norm avoids squaring tiny densities into zero.
        debug_assert!(
            {
                let norm: f64 = x.iter().map(|v| v.abs()).sum();
                let gain = self.eigenvalues().fold(0.0, |m: f64, l| m.max(l.abs()));
                let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
                residue <= 1e-10 * gain * norm || residue < 1e-280
            },
            "imaginary residue after applying a real-symbol multiplier; is the symbol even?"
        );
        Ok(y)
    }

    /// In-place application to a complex vector of the right length.
    pub fn apply_complex(&self, x: &mut [Complex64]) {
        self.apply_spectral(x, |lambda| Complex64::new(lambda, 0.0));
    }

    /// In-place application of `F · diag(m(λ_k)) · F*`, where `λ_k = scale ·
    /// symbol_k` are the eigenvalues of this operator. Used to apply functions of
    /// the operator, such as shifted inverses.
    pub fn apply_spectral(&self, x: &mut [Complex64], m: impl Fn(f64) -> Complex64) {
        debug_assert_eq!(x.len(), self.grid.len());
        let norm = 1.0 / self.grid.len() as f64;
        self.fft.process(x, Direction::Forward);
        for (value, &s) in x.iter_mut().zip(&self.symbol) {
            *value *= m(self.scale * s) * norm;
        }
        self.fft.process(x, Direction::Inverse);
    }

    /// Explicit dense matrix. Intended for oracles on small grids.
    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.grid.len();
        let mut out = Mat::<f64>::zeros(n, n);
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            column.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            column[j] = Complex64::new(1.0, 0.0);
            self.apply_complex(&mut column);
            for i in 0..n {
                out[(i, j)] = column[i].re;
            }
        }
        out
    }
}

/// Kinetic operator `K = ½ F D F*`, `d_k = Σ_i (2π k_i / L_i)²`.
pub fn kinetic_multiplier(grid: &GridSpec) -> FourierMultiplier {
    let lengths = grid.lengths().to_vec();
    FourierMultiplier::from_fn(grid, 0.5, move |k| {
        k.iter()
            .zip(&lengths)
            .map(|(&ki, &l)| (2.0 * PI * ki as f64 / l).powi(2))
            .sum()
    })
}

/// Yukawa interaction `V = (1/ΔV) F V̂ F*` with `v̂_k = α² / (α² + d_k)`.
/// `alpha = 0` gives the Coulomb kernel `1/d_k` with the zero mode removed.
pub fn yukawa_multiplier(grid: &GridSpec, alpha: f64) -> FourierMultiplier {
    yukawa_multiplier_with(grid, alpha, false)
}

/// As [`yukawa_multiplier`], optionally removing the `k = 0` mode for `alpha > 0`
/// too (it only shifts the Hartree potential by a constant).
pub fn yukawa_multiplier_with(grid: &GridSpec, alpha: f64, drop_zero_mode: bool) -> FourierMultiplier {
    let lengths = grid.lengths().to_vec();
    let a2 = alpha * alpha;
    FourierMultiplier::from_fn(grid, 1.0 / grid.cell_volume(), move |k| {
        let d: f64 = k
            .iter()
            .zip(&lengths)
            .map(|(&ki, &l)| (2.0 * PI * ki as f64 / l).powi(2))
            .sum();
        let zero_mode = k.iter().all(|&ki| ki == 0);
        if zero_mode && (alpha == 0.0 || drop_zero_mode) {
            0.0
        } else if alpha == 0.0 {
            1.0 / d
        } else {
            a2 / (a2 + d)
        }
    })
}

/// `max_p Σ_q |V_pq|` of the circulant interaction kernel. With the sinc basis
/// this is the Hartree constant `c_h`.
pub fn interaction_row_norm(grid: &GridSpec, alpha: f64) -> f64 {
    row_norm(&yukawa_multiplier(grid, alpha))
}

/// Absolute row sum of any multiplier (all rows agree by translation invariance).
pub fn row_norm(multiplier: &FourierMultiplier) -> f64 {
    let mut delta = vec![0.0; multiplier.grid().len()];
    delta[0] = 1.0;
    multiplier
        .apply(&delta)
        .expect("delta has grid length")
        .iter()
        .map(|v| v.abs())
        .sum()
}

/// Random background charges and the potential they generate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalPotential {
    /// `u = v_ext` at grid points.
    pub values: Vec<f64>,
    /// Unit charges at `⌊ζ·volume⌋` distinct grid points.
    pub charge_density: Vec<f64>,
}

/// Places `⌊ζ·volume⌋` unit charges at distinct uniformly sampled grid points
/// and returns `u = -V ρ_ext` with `V` the Yukawa kernel of parameter `alpha`.
pub fn background_potential(grid: &GridSpec, zeta: f64, alpha: f64, seed: u64) -> Result<ExternalPotential> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter(format!("zeta = {zeta} must be positive")));
    }
    let requested = (zeta * grid.volume()).floor();
    if requested < 1.0 {
        return Err(Error::ZeroCharges);
    }
    if requested > grid.len() as f64 {
        return Err(Error::TooManyCharges {
            requested: requested as usize,
            available: grid.len(),
        });
    }
    let mut rng = rng::potential_stream(seed);
    let mut charge_density = vec![0.0; grid.len()];
    for site in index::sample(&mut rng, grid.len(), requested as usize) {
        charge_density[site] = 1.0;
    }
    let kernel = yukawa_multiplier(grid, alpha);
    let values = kernel.apply(&charge_density)?.into_iter().map(|v| -v).collect();
    Ok(ExternalPotential { values, charge_density })
}
