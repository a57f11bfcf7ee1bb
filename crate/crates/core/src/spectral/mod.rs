//! Fourier representation of periodic vector fields and the multiplier algebra
//! built on top of it.

mod fft;
mod field;
mod grid;
mod multiplier;

use num_complex::Complex;
use thiserror::Error;

use crate::Real;

pub use fft::Fft3;
pub use field::{forward_transform, inverse_transform, PhysicalField, SpectralVectorField};
pub(crate) use field::{inverse_many, transform_many};
pub use grid::{GridSpec, CONVENTION};
pub use multiplier::{
    apply_multiplier, fractional_symbol, leray_project, power_symbol, MultiplierKind,
};
pub(crate) use multiplier::{check_alpha, dealias_in_place, leray_in_place};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected} samples, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("fractional exponent {0} outside (0, 4)")]
    InvalidAlpha(f64),
    #[error("mollifier width {0} is negative")]
    NegativeDelta(f64),
    #[error("{0}")]
    InvalidParameter(String),
}

/// `‖v‖_{Ḣ^s} = (Σ_{k≠0} |k|^{2s} |v̂(k)|² · cell_volume)^{1/2}`.
pub fn sobolev_norm<T: Real>(v: &SpectralVectorField<T>, s: T) -> T {
    sobolev_norm_squared(v, s).sqrt()
}

pub fn sobolev_norm_squared<T: Real>(v: &SpectralVectorField<T>, s: T) -> T {
    let k2 = v.grid().k_squared();
    let mut acc = T::zero();
    for idx in 1..k2.len() {
        let a = v.component(0)[idx].norm_sqr()
            + v.component(1)[idx].norm_sqr()
            + v.component(2)[idx].norm_sqr();
        if a > T::zero() {
            acc = acc + power_symbol(k2[idx], s) * a;
        }
    }
    acc * v.grid().cell_volume()
}

/// Spectral `L²` pairing `⟨a, b⟩`.
pub fn inner<T: Real>(a: &SpectralVectorField<T>, b: &SpectralVectorField<T>) -> T {
    a.inner(b)
}

/// `max_x |∇⊗v(x)|` with the Frobenius norm, from the nine inverse-transformed
/// partial derivatives.
pub fn max_gradient_norm<T: Real>(v: &SpectralVectorField<T>, fft: &Fft3<T>) -> T {
    let grid = v.grid();
    let grads = gradient_coeffs(v);
    let phys = inverse_many(&grads, fft, grid);
    (0..grid.len())
        .map(|x| phys.iter().map(|g| g[x] * g[x]).sum::<T>().sqrt())
        .fold(T::zero(), T::max)
}

/// Coefficients of `∂_j vᵢ` in order `3i + j`. Nyquist planes are zeroed so
/// that derivatives of real fields stay real.
pub(crate) fn gradient_coeffs<T: Real>(v: &SpectralVectorField<T>) -> Vec<Vec<Complex<T>>> {
    let grid = v.grid();
    let half = (grid.n() / 2) as i64;
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let comp = v.component(i);
            let col: Vec<Complex<T>> = (0..grid.len())
                .map(|idx| {
                    let m = grid.lattice(idx);
                    if m[j] == -half {
                        zero
                    } else {
                        let kj = grid.wavevector(idx)[j];
                        Complex::new(-comp[idx].im * kj, comp[idx].re * kj)
                    }
                })
                .collect();
            out.push(col);
        }
    }
    out
}
