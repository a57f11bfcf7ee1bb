use num_complex::Complex;
use rayon::prelude::*;

use crate::Real;

use super::{Fft3, GridSpec, SpectralError};

/// Real samples of a 3-component field at the grid points `x = (L/n) j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField<T> {
    pub grid: GridSpec<T>,
    pub values: [Vec<T>; 3],
}

impl<T: Real> PhysicalField<T> {
    pub fn new(grid: GridSpec<T>, values: [Vec<T>; 3]) -> Result<Self, SpectralError> {
        for v in &values {
            if v.len() != grid.len() {
                return Err(SpectralError::DimensionMismatch {
                    expected: grid.len(),
                    found: v.len(),
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: [
                vec![T::zero(); len],
                vec![T::zero(); len],
                vec![T::zero(); len],
            ],
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: GridSpec<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let mut out = Self::zeros(grid.clone());
        for idx in 0..grid.len() {
            let [i0, i1, i2] = grid.unflatten(idx);
            let v = f([
                grid.coordinate(i0),
                grid.coordinate(i1),
                grid.coordinate(i2),
            ]);
            for c in 0..3 {
                out.values[c][idx] = v[c];
            }
        }
        out
    }

    /// Riemann-sum `‖v‖²_{L²}` over the box.
    pub fn l2_norm_squared(&self) -> T {
        let s: T = self
            .values
            .iter()
            .flat_map(|v| v.iter())
            .map(|&x| x * x)
            .sum();
        s * self.grid.physical_cell_volume()
    }

    /// Per-component grid mean.
    pub fn mean(&self) -> [T; 3] {
        let len = T::from_usize(self.grid.len()).unwrap();
        [0, 1, 2].map(|c| self.values[c].iter().copied().sum::<T>() / len)
    }
}

/// Fourier coefficients of a real, mean-free 3-component field.
///
/// Invariants maintained by every constructor in this crate: `coeff(-k) =
/// conj(coeff(k))` and `coeff(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField<T> {
    grid: GridSpec<T>,
    coeffs: [Vec<Complex<T>>; 3],
}

impl<T: Real> SpectralVectorField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        let len = grid.len();
        let z = Complex::new(T::zero(), T::zero());
        Self {
            grid,
            coeffs: [vec![z; len], vec![z; len], vec![z; len]],
        }
    }

    /// Wraps raw coefficients. Only the length is checked; use
    /// [`Self::enforce_invariants`] to impose symmetry and the zero mean.
    pub fn from_coeffs(
        grid: GridSpec<T>,
        coeffs: [Vec<Complex<T>>; 3],
    ) -> Result<Self, SpectralError> {
        for c in &coeffs {
            if c.len() != grid.len() {
                return Err(SpectralError::DimensionMismatch {
                    expected: grid.len(),
                    found: c.len(),
                });
            }
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex<T>] {
        &self.coeffs[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.coeffs[c]
    }

    pub fn components(&self) -> &[Vec<Complex<T>>; 3] {
        &self.coeffs
    }

    pub fn into_components(self) -> [Vec<Complex<T>>; 3] {
        self.coeffs
    }

    /// Coefficient vector at flat index `idx`.
    #[inline]
    pub fn at(&self, idx: usize) -> [Complex<T>; 3] {
        [
            self.coeffs[0][idx],
            self.coeffs[1][idx],
            self.coeffs[2][idx],
        ]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [Complex<T>; 3]) {
        for c in 0..3 {
            self.coeffs[c][idx] = v[c];
        }
    }

    /// Averages each coefficient with the conjugate of its mirror and zeroes `k = 0`.
    pub fn enforce_invariants(&mut self) {
        let grid = self.grid.clone();
        let half = T::lit(0.5);
        for comp in self.coeffs.iter_mut() {
            for idx in 0..grid.len() {
                let mir = grid.mirror(idx);
                if idx < mir {
                    let avg = (comp[idx] + comp[mir].conj()).scale(half);
                    comp[idx] = avg;
                    comp[mir] = avg.conj();
                } else if idx == mir {
                    comp[idx] = Complex::new(comp[idx].re, T::zero());
                }
            }
            comp[0] = Complex::new(T::zero(), T::zero());
        }
    }

    /// Largest `|coeff(k) - conj(coeff(-k))|`, zero for an exactly real field.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for comp in &self.coeffs {
            for idx in 0..self.grid.len() {
                let d = (comp[idx] - comp[self.grid.mirror(idx)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest relative divergence `|k·v̂(k)| / (|k| |v̂(k)|)` over nonzero modes.
    pub fn divergence_defect(&self) -> T {
        let mut worst = T::zero();
        for idx in 1..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let v = self.at(idx);
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let vn = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
            if kn > T::zero() && vn > T::zero() {
                let div = v[0].scale(k[0]) + v[1].scale(k[1]) + v[2].scale(k[2]);
                worst = worst.max(div.norm() / (kn * vn));
            }
        }
        worst
    }

    /// `‖∇·v‖_{L²} / ‖∇v‖_{L²}`, insensitive to roundoff in negligible modes.
    pub fn divergence_ratio(&self) -> T {
        let mut div2 = T::zero();
        let mut grad2 = T::zero();
        for idx in 1..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let v = self.at(idx);
            let div = v[0].scale(k[0]) + v[1].scale(k[1]) + v[2].scale(k[2]);
            div2 = div2 + div.norm_sqr();
            grad2 = grad2
                + (k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
                    * (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr());
        }
        if grad2 > T::zero() {
            (div2 / grad2).sqrt()
        } else {
            T::zero()
        }
    }

    /// `⟨a, b⟩_{L²}` evaluated spectrally: `Re Σ conj(â)·b̂ · cell_volume`.
    pub fn inner(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                acc = acc + (a.conj() * b).re;
            }
        }
        acc * self.grid.cell_volume()
    }

    /// Spectral `‖v‖²_{L²}`.
    pub fn energy(&self) -> T {
        let s: T = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        s * self.grid.cell_volume()
    }

    /// Largest coefficient magnitude over all components.
    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&mut self, s: T) {
        for comp in self.coeffs.iter_mut() {
            for z in comp.iter_mut() {
                *z = z.scale(s);
            }
        }
    }

    /// `self + s·other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a = *a + b.scale(s);
            }
        }
    }

    /// Relative L² distance `‖self - other‖ / ‖other‖` (absolute when `other = 0`).
    pub fn relative_distance(&self, other: &Self) -> T {
        let mut diff = T::zero();
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                diff = diff + (a - b).norm_sqr();
            }
        }
        let diff = (diff * self.grid.cell_volume()).sqrt();
        let base = other.energy().sqrt();
        if base > T::zero() {
            diff / base
        } else {
            diff
        }
    }

    pub fn to_physical(&self, fft: &Fft3<T>) -> PhysicalField<T> {
        inverse_transform(self, fft)
    }
}

fn forward_scale<T: Real>(grid: &GridSpec<T>) -> T {
    // (2π)^{-3/2} h³
    let two_pi = T::TAU();
    grid.physical_cell_volume() / (two_pi * two_pi * two_pi).sqrt()
}

fn inverse_scale<T: Real>(grid: &GridSpec<T>) -> T {
    // (2π)^{-3/2} (2π/L)³
    let two_pi = T::TAU();
    grid.cell_volume() / (two_pi * two_pi * two_pi).sqrt()
}

/// Forward transform of real samples into unitary-convention coefficients.
///
/// The result is symmetrized to exact Hermitian form and its `k = 0` mode is
/// zeroed, so a constant input maps to the zero field.
pub fn forward_transform<T: Real>(
    physical: &PhysicalField<T>,
    fft: &Fft3<T>,
) -> Result<SpectralVectorField<T>, SpectralError> {
    let grid = physical.grid.clone();
    for v in &physical.values {
        if v.len() != grid.len() {
            return Err(SpectralError::DimensionMismatch {
                expected: grid.len(),
                found: v.len(),
            });
        }
    }
    if fft.n() != grid.n() {
        return Err(SpectralError::DimensionMismatch {
            expected: grid.n(),
            found: fft.n(),
        });
    }
    let coeffs = transform_many(&physical.values, fft, &grid);
    let coeffs: [Vec<Complex<T>>; 3] = coeffs.try_into().expect("three components");
    let mut out = SpectralVectorField { grid, coeffs };
    out.enforce_invariants();
    Ok(out)
}

/// Forward transforms of any number of real scalar fields (no symmetrization).
pub(crate) fn transform_many<T: Real>(
    values: &[Vec<T>],
    fft: &Fft3<T>,
    grid: &GridSpec<T>,
) -> Vec<Vec<Complex<T>>> {
    let s = forward_scale(grid);
    values
        .par_iter()
        .map(|v| {
            let mut buf: Vec<Complex<T>> =
                v.iter().map(|&x| Complex::new(x * s, T::zero())).collect();
            fft.forward(&mut buf);
            buf
        })
        .collect()
}

/// Inverse transforms of any number of scalar coefficient arrays, keeping real parts.
pub(crate) fn inverse_many<T: Real>(
    coeffs: &[Vec<Complex<T>>],
    fft: &Fft3<T>,
    grid: &GridSpec<T>,
) -> Vec<Vec<T>> {
    let s = inverse_scale(grid);
    coeffs
        .par_iter()
        .map(|c| {
            let mut buf: Vec<Complex<T>> = c.iter().map(|z| z.scale(s)).collect();
            fft.inverse(&mut buf);
            buf.into_iter().map(|z| z.re).collect()
        })
        .collect()
}

/// Inverse transform to real samples on the grid.
pub fn inverse_transform<T: Real>(
    field: &SpectralVectorField<T>,
    fft: &Fft3<T>,
) -> PhysicalField<T> {
    let values = inverse_many(&field.coeffs, fft, &field.grid);
    PhysicalField {
        grid: field.grid.clone(),
        values: values.try_into().expect("three components"),
    }
}
