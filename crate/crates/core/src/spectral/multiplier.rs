use num_complex::Complex;

use crate::Real;

use super::{SpectralError, SpectralVectorField};

/// Diagonal Fourier multipliers acting on vector fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierKind<T> {
    /// `I - k kᵀ / |k|²`, the only non-scalar multiplier.
    LerayProjection,
    /// `|k|^α` with `0 < α < 4`.
    FractionalLaplacian { alpha: T },
    /// Gaussian mollifier `exp(-δ²|k|²)`.
    Mollifier { delta: T },
    /// Zero every mode with some `|mᵢ|` above the two-thirds limit.
    DealiasTwoThirds,
    /// `exp(-coefficient · dt · |k|²)`.
    HeatFactor { coefficient: T, dt: T },
}

/// `(k²)^s` with exact fast paths for the integer and half-integer exponents in use.
#[inline]
pub fn power_symbol<T: Real>(k2: T, s: T) -> T {
    if s == T::zero() {
        T::one()
    } else if s == T::one() {
        k2
    } else if s == T::lit(2.0) {
        k2 * k2
    } else if s == -T::one() {
        k2.recip()
    } else if s == T::lit(0.5) {
        k2.sqrt()
    } else {
        k2.powf(s)
    }
}

/// `|k|^α` evaluated from `|k|²`; `α = 2` returns `k2` unchanged.
#[inline]
pub fn fractional_symbol<T: Real>(k2: T, alpha: T) -> T {
    power_symbol(k2, alpha * T::lit(0.5))
}

pub(crate) fn check_alpha<T: Real>(alpha: T) -> Result<(), SpectralError> {
    if alpha > T::zero() && alpha < T::lit(4.0) {
        Ok(())
    } else {
        Err(SpectralError::InvalidAlpha(alpha.as_f64()))
    }
}

/// Factor as a function of `|k|²`.
type Symbol<T> = Box<dyn Fn(T) -> T>;

/// Per-mode factor of a scalar multiplier, or `None` for the Leray projection.
fn scalar_symbol<T: Real>(kind: &MultiplierKind<T>) -> Result<Option<Symbol<T>>, SpectralError> {
    Ok(match *kind {
        MultiplierKind::LerayProjection | MultiplierKind::DealiasTwoThirds => None,
        MultiplierKind::FractionalLaplacian { alpha } => {
            check_alpha(alpha)?;
            Some(Box::new(move |k2| fractional_symbol(k2, alpha)))
        }
        MultiplierKind::Mollifier { delta } => {
            if !(delta >= T::zero()) {
                return Err(SpectralError::NegativeDelta(delta.as_f64()));
            }
            let d2 = delta * delta;
            Some(Box::new(move |k2: T| (-d2 * k2).exp()))
        }
        MultiplierKind::HeatFactor { coefficient, dt } => {
            if !(coefficient >= T::zero()) || !(dt >= T::zero()) {
                return Err(SpectralError::InvalidParameter(format!(
                    "heat factor needs non-negative coefficient and dt, got {coefficient} and {dt}"
                )));
            }
            let c = coefficient * dt;
            Some(Box::new(move |k2: T| (-c * k2).exp()))
        }
    })
}

/// Coefficientwise application of `kind` to `v`.
pub fn apply_multiplier<T: Real>(
    kind: MultiplierKind<T>,
    v: &SpectralVectorField<T>,
) -> Result<SpectralVectorField<T>, SpectralError> {
    match kind {
        MultiplierKind::LerayProjection => Ok(leray_project(v)),
        MultiplierKind::DealiasTwoThirds => {
            let mut out = v.clone();
            dealias_in_place(&mut out);
            Ok(out)
        }
        _ => {
            let symbol = scalar_symbol(&kind)?.expect("scalar multiplier");
            let k2 = v.grid().k_squared();
            let mut out = v.clone();
            for c in 0..3 {
                for (z, &q) in out.component_mut(c).iter_mut().zip(&k2) {
                    *z = z.scale(symbol(q));
                }
            }
            Ok(out)
        }
    }
}

pub(crate) fn dealias_in_place<T: Real>(v: &mut SpectralVectorField<T>) {
    let mask = v.grid().dealias_mask();
    let zero = Complex::new(T::zero(), T::zero());
    for c in 0..3 {
        for (z, &keep) in v.component_mut(c).iter_mut().zip(&mask) {
            if !keep {
                *z = zero;
            }
        }
    }
}

/// Applies `I - k kᵀ/|k|²` at every `k ≠ 0` and zeroes `k = 0`.
///
/// Modes on a Nyquist plane are zeroed as well: their storage mirror is not
/// `-k`, so no projection of them can stay both real and divergence-free.
pub fn leray_project<T: Real>(v: &SpectralVectorField<T>) -> SpectralVectorField<T> {
    let mut out = v.clone();
    leray_in_place(&mut out);
    out
}

pub(crate) fn leray_in_place<T: Real>(v: &mut SpectralVectorField<T>) {
    let grid = v.grid().clone();
    let zero = Complex::new(T::zero(), T::zero());
    v.set(0, [zero; 3]);
    for idx in 1..grid.len() {
        if grid.is_nyquist(grid.lattice(idx)) {
            v.set(idx, [zero; 3]);
            continue;
        }
        // Integer lattice vector: the projection is scale invariant, and exact
        // integer k² keeps the result identical at k and -k.
        let m = grid.lattice(idx).map(|x| T::from_i64(x).unwrap());
        let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        let c = v.at(idx);
        let dot = c[0].scale(m[0]) + c[1].scale(m[1]) + c[2].scale(m[2]);
        let out = [0, 1, 2].map(|i| (c[i].scale(m2) - dot.scale(m[i])).unscale(m2));
        v.set(idx, out);
    }
}
