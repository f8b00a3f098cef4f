//! Unnormalized d-dimensional complex FFT over row-major data, built from
//! rustfft 1D plans applied axis by axis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) struct NdFft {
    sizes: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for NdFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NdFft").field("sizes", &self.sizes).finish()
    }
}

impl NdFft {
    pub(crate) fn new(sizes: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = sizes.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = sizes.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self {
            sizes: sizes.to_vec(),
            forward,
            inverse,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    /// In-place transform. No normalization is applied in either direction.
    pub(crate) fn process(&self, data: &mut [Complex64], direction: Direction) {
        debug_assert_eq!(data.len(), self.len());
        let plans = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let total = data.len();
        let mut scratch = Vec::new();
        let mut line = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            let len = self.sizes[axis];
            if len == 1 {
                continue;
            }
            let stride: usize = self.sizes[axis + 1..].iter().product();
            let need = plan.get_inplace_scratch_len();
            if scratch.len() < need {
                scratch.resize(need, Complex64::new(0.0, 0.0));
            }
            if stride == 1 {
                // Contiguous lines: rustfft handles a buffer holding many of them.
                plan.process_with_scratch(data, &mut scratch[..need]);
                continue;
            }
            line.resize(len, Complex64::new(0.0, 0.0));
            let block = len * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch[..need]);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }
}
