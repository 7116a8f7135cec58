//! Multi-dimensional complex FFT on row-major cubic grids.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Plans for an `N^n` grid stored row-major (last axis fastest).
pub struct FftNd {
    n: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("n", &self.n).field("len", &self.len).finish()
    }
}

impl FftNd {
    pub fn new(n: usize, len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn total(&self) -> usize {
        self.len.pow(self.n as u32)
    }

    /// Unnormalized forward transform `sum_x u(x) e^{-2 pi i k x / N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the `1/N^n` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let s = 1.0 / self.total() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.total(), "grid size mismatch");
        let len = self.len;
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = len.pow((self.n - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(len) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * len;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, z) in line.iter_mut().enumerate() {
                        *z = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, z) in line.iter().enumerate() {
                        data[base + j * stride] = *z;
                    }
                }
            }
        }
    }
}

/// Signed integer frequency index for position `j` of an `N`-point transform.
#[inline]
pub fn signed_index(j: usize, len: usize) -> i64 {
    if j < len.div_ceil(2) {
        j as i64
    } else {
        j as i64 - len as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_2d(data: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len * len];
        for k1 in 0..len {
            for k2 in 0..len {
                let mut acc = Complex64::new(0.0, 0.0);
                for x1 in 0..len {
                    for x2 in 0..len {
                        let ph = -2.0 * std::f64::consts::PI * ((k1 * x1 + k2 * x2) % len) as f64 / len as f64;
                        acc += data[x1 * len + x2] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k1 * len + k2] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let len = 8;
        let data: Vec<Complex64> = (0..len * len)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fft = FftNd::new(2, len);
        let mut fast = data.clone();
        fft.forward(&mut fast);
        let slow = naive_2d(&data, len);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn round_trip_3d() {
        let len = 8;
        let fft = FftNd::new(3, len);
        let data: Vec<Complex64> = (0..fft.total())
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.5).sin()))
            .collect();
        let mut work = data.clone();
        fft.forward(&mut work);
        fft.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn signed_indices() {
        let v: Vec<i64> = (0..4).map(|j| signed_index(j, 4)).collect();
        assert_eq!(v, vec![0, 1, -2, -1]);
    }
}
