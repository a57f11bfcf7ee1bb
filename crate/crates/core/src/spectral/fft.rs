use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

/// Unnormalized 3-D complex FFT over an `n³` cube in row-major storage.
///
/// Plans are shared and the struct holds no scratch, so one instance can
/// serve several components transformed in parallel.
#[derive(Clone)]
pub struct Fft3<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `X[m] = Σ_j x[j] e^{-2πi j·m/n}`.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.process(data, &self.forward);
    }

    /// `x[j] = Σ_m X[m] e^{+2πi j·m/n}` (no `1/n³` factor).
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.process(data, &self.inverse);
    }

    fn process(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer is not n³");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        let mut work = vec![Complex::new(T::zero(), T::zero()); data.len()];

        // axis 2 is contiguous
        plan.process_with_scratch(data, &mut scratch);

        // axis 1: transpose each i0 slab
        let slab = n * n;
        for (s, w) in data.chunks_exact_mut(slab).zip(work.chunks_exact_mut(slab)) {
            transpose(s, w, n, n);
            plan.process_with_scratch(w, &mut scratch);
            transpose(w, s, n, n);
        }

        // axis 0: view as n × n² and transpose
        transpose(data, &mut work, n, slab);
        plan.process_with_scratch(&mut work, &mut scratch);
        transpose(&work, data, slab, n);
    }
}

/// Out-of-place transpose of a `rows × cols` row-major matrix.
fn transpose<T: Copy>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    const BLOCK: usize = 16;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex<f64>], n: usize, sign: f64) -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); n * n * n];
        let tau = std::f64::consts::TAU;
        for m0 in 0..n {
            for m1 in 0..n {
                for m2 in 0..n {
                    let mut acc = Complex::new(0.0, 0.0);
                    for j0 in 0..n {
                        for j1 in 0..n {
                            for j2 in 0..n {
                                let phase = sign * tau * ((j0 * m0 + j1 * m1 + j2 * m2) % n) as f64
                                    / n as f64;
                                acc += x[(j0 * n + j1) * n + j2] * Complex::from_polar(1.0, phase);
                            }
                        }
                    }
                    out[(m0 * n + m1) * n + m2] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 6;
        let x: Vec<Complex<f64>> = (0..n * n * n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fft = Fft3::<f64>::new(n);
        let mut y = x.clone();
        fft.forward(&mut y);
        let reference = naive_dft(&x, n, -1.0);
        for (a, b) in y.iter().zip(&reference) {
            assert!((a - b).norm() < 1e-11);
        }
        let mut z = x.clone();
        fft.inverse(&mut z);
        let reference = naive_dft(&x, n, 1.0);
        for (a, b) in z.iter().zip(&reference) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
