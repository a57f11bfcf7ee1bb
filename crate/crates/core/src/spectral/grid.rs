use crate::Real;

use super::SpectralError;

/// Fourier normalization tag carried by every grid.
///
/// Coefficients sample the unitary continuum transform
/// `f̂(ξ) = (2π)^{-3/2} ∫ f(x) e^{-ix·ξ} dx`, so `‖f‖_{L²} = ‖f̂‖_{L²}` and
/// spectral integrals are lattice sums weighted by [`GridSpec::cell_volume`].
pub const CONVENTION: &str = "unitary-Plancherel";

/// Periodic box `[0, L]³` sampled with `n` points per axis.
///
/// Storage is FFT order: flat index `(i0 * n + i1) * n + i2`, with lattice
/// index `m = i` for `i < n/2` and `m = i - n` otherwise, and wavevector
/// `k = (2π/L) m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<T> {
    box_length: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(box_length: T, n: usize) -> Result<Self, SpectralError> {
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(SpectralError::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidGrid(format!(
                "modes per axis must be even and at least 8, got {n}"
            )));
        }
        Ok(Self { box_length, n })
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of lattice points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn convention(&self) -> &'static str {
        CONVENTION
    }

    /// Physical grid spacing `L/n`.
    pub fn spacing(&self) -> T {
        self.box_length / T::from_usize(self.n).unwrap()
    }

    /// Lattice spacing in wavenumber space, `2π/L`.
    pub fn dk(&self) -> T {
        T::TAU() / self.box_length
    }

    /// Spectral quadrature weight `(2π/L)³`.
    pub fn cell_volume(&self) -> T {
        let dk = self.dk();
        dk * dk * dk
    }

    /// Physical quadrature weight `(L/n)³`.
    pub fn physical_cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    /// Lattice index of storage position `i` along one axis.
    #[inline]
    pub fn lattice_index(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage position along one axis of lattice index `m` (taken mod `n`).
    #[inline]
    pub fn storage_index(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn flat(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Lattice triple `m` of a flat index.
    #[inline]
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let [i0, i1, i2] = self.unflatten(idx);
        [
            self.lattice_index(i0),
            self.lattice_index(i1),
            self.lattice_index(i2),
        ]
    }

    /// Flat index of the lattice point `-m`. Nyquist planes map to themselves.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let [i0, i1, i2] = self.unflatten(idx);
        let n = self.n;
        self.flat((n - i0) % n, (n - i1) % n, (n - i2) % n)
    }

    /// `true` when any component of `m` sits on the Nyquist plane `-n/2`.
    #[inline]
    pub fn is_nyquist(&self, m: [i64; 3]) -> bool {
        let half = (self.n / 2) as i64;
        m.iter().any(|&mi| mi == -half)
    }

    /// Wavenumber per storage position along one axis.
    pub fn wavenumbers(&self) -> Vec<T> {
        let dk = self.dk();
        (0..self.n)
            .map(|i| T::from_i64(self.lattice_index(i)).unwrap() * dk)
            .collect()
    }

    /// Wavevector of a flat index.
    pub fn wavevector(&self, idx: usize) -> [T; 3] {
        let dk = self.dk();
        self.lattice(idx).map(|m| T::from_i64(m).unwrap() * dk)
    }

    /// `|k|²` at every flat index, computed from integer lattice indices so
    /// that `k` and `-k` give bitwise equal values.
    pub fn k_squared(&self) -> Vec<T> {
        let dk2 = self.dk() * self.dk();
        let n = self.n;
        let m2: Vec<i64> = (0..n).map(|i| self.lattice_index(i).pow(2)).collect();
        let mut out = Vec::with_capacity(self.len());
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let s = m2[i0] + m2[i1] + m2[i2];
                    out.push(T::from_i64(s).unwrap() * dk2);
                }
            }
        }
        out
    }

    /// Largest `|m|` kept by the two-thirds rule: the largest `M` with `3M < n`.
    pub fn dealias_limit(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }

    /// Whether the two-thirds rule keeps lattice point `m`.
    #[inline]
    pub fn keeps(&self, m: [i64; 3]) -> bool {
        let lim = self.dealias_limit();
        m.iter().all(|&mi| mi.abs() <= lim)
    }

    /// Radius of the largest open ball whose lattice points all survive dealiasing.
    pub fn dealias_radius(&self) -> T {
        T::from_i64(self.dealias_limit() + 1).unwrap() * self.dk()
    }

    /// Keep-mask of the two-thirds rule over flat indices.
    pub fn dealias_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| self.keeps(self.lattice(i)))
            .collect()
    }

    /// Physical coordinate of storage position `i` along one axis.
    pub fn coordinate(&self, i: usize) -> T {
        T::from_usize(i).unwrap() * self.spacing()
    }
}
