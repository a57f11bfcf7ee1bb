//! Time-independent, frequency-localized, divergence-free forces and the
//! scalar quantities derived from them (averaged force, damping rate,
//! Grashof number, hypothesis margins).

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{
    leray_in_place, max_gradient_norm, sobolev_norm, Fft3, GridSpec, SpectralError,
    SpectralVectorField,
};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForcingError {
    #[error("force support radius {radius} exceeds the dealiased radius {cutoff} of the grid")]
    SupportExceedsGrid { radius: f64, cutoff: f64 },
    #[error("force support contains no nonzero lattice wavevector")]
    EmptySupport,
    #[error("Ḣ^-{order} norm of the profile is not integrable")]
    NonIntegrable { order: f64 },
    #[error("invalid force profile: {0}")]
    InvalidProfile(String),
    #[error("damping rate must be positive, got {0}")]
    NonPositiveDamping(f64),
    #[error("fractional exponent {0} outside the certified range (3/7, 3)")]
    AlphaOutOfRange(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Radial profile `g(|ξ|)` of the force before projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceShape<T> {
    /// `A · 1_{|ξ| < c/ℓ₀}`.
    BallIndicator { amplitude: T },
    /// `A · 1_{inner ≤ |ξ| < outer}`, with `outer ≤ c/ℓ₀`.
    Shell { amplitude: T, inner: T, outer: T },
    /// Piecewise-linear interpolation of `values` at increasing `radii`,
    /// zero past the last radius and at or beyond `c/ℓ₀`.
    CustomRadial { radii: Vec<T>, values: Vec<T> },
}

/// A radial profile times the constant direction `e = (1, 0, 0)`, followed by
/// Leray projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceProfile<T> {
    pub shape: ForceShape<T>,
    pub ell0: T,
    /// Dimensionless localization constant: support is `|ξ| < c/ℓ₀`.
    pub c: T,
    /// Exponent selecting the `Ḣ^{-α/2}` norm; 2 is the classical case.
    pub alpha: T,
}

impl<T: Real> ForceProfile<T> {
    pub fn ball(amplitude: T, ell0: T, c: T) -> Self {
        Self {
            shape: ForceShape::BallIndicator { amplitude },
            ell0,
            c,
            alpha: T::lit(2.0),
        }
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    /// Localization radius `c/ℓ₀`.
    pub fn radius(&self) -> T {
        self.c / self.ell0
    }

    pub fn validate(&self) -> Result<(), ForcingError> {
        let bad = |msg: String| Err(ForcingError::InvalidProfile(msg));
        if !(self.ell0 > T::zero()) || !self.ell0.is_finite() {
            return bad(format!("length scale must be positive, got {}", self.ell0));
        }
        if !(self.c > T::zero()) || !self.c.is_finite() {
            return bad(format!(
                "localization constant must be positive, got {}",
                self.c
            ));
        }
        if !(self.alpha > T::zero() && self.alpha < T::lit(4.0)) {
            return bad(format!("alpha must lie in (0, 4), got {}", self.alpha));
        }
        match &self.shape {
            ForceShape::BallIndicator { amplitude } => {
                if !amplitude.is_finite() {
                    return bad("amplitude must be finite".into());
                }
            }
            ForceShape::Shell {
                amplitude,
                inner,
                outer,
            } => {
                if !amplitude.is_finite() || !(*inner >= T::zero()) || !(outer >= inner) {
                    return bad(format!(
                        "shell needs 0 ≤ inner ≤ outer, got {inner} and {outer}"
                    ));
                }
                if *outer > self.radius() {
                    return bad(format!(
                        "shell outer radius {outer} exceeds c/ℓ₀ = {}",
                        self.radius()
                    ));
                }
            }
            ForceShape::CustomRadial { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return bad(
                        "custom profile needs at least two (radius, value) pairs of equal length"
                            .into(),
                    );
                }
                if radii[0] != T::zero() {
                    return bad("custom profile radii must start at 0".into());
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("custom profile radii must increase strictly".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("custom profile values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `g(ρ)`, zero outside the support.
    pub fn value(&self, rho: T) -> T {
        if rho >= self.radius() {
            return T::zero();
        }
        match &self.shape {
            ForceShape::BallIndicator { amplitude } => *amplitude,
            ForceShape::Shell {
                amplitude,
                inner,
                outer,
            } => {
                if rho >= *inner && rho < *outer {
                    *amplitude
                } else {
                    T::zero()
                }
            }
            ForceShape::CustomRadial { radii, values } => {
                let last = radii.len() - 1;
                if rho > radii[last] {
                    return T::zero();
                }
                let j = radii.partition_point(|&r| r <= rho).clamp(1, last);
                let (r0, r1) = (radii[j - 1], radii[j]);
                let w = (rho - r0) / (r1 - r0);
                values[j - 1] + (values[j] - values[j - 1]) * w
            }
        }
    }

    /// Geometric support test, independent of the amplitude.
    fn in_support(&self, rho: T) -> bool {
        if rho >= self.radius() {
            return false;
        }
        match &self.shape {
            ForceShape::BallIndicator { .. } => true,
            ForceShape::Shell { inner, outer, .. } => rho >= *inner && rho < *outer,
            ForceShape::CustomRadial { radii, .. } => rho <= radii[radii.len() - 1],
        }
    }

    /// `‖f̂‖_{L∞}` of the radial profile.
    pub fn sup_amplitude(&self) -> T {
        match &self.shape {
            ForceShape::BallIndicator { amplitude } | ForceShape::Shell { amplitude, .. } => {
                amplitude.abs()
            }
            ForceShape::CustomRadial { radii, values } => radii
                .iter()
                .zip(values)
                .filter(|(r, _)| **r < self.radius())
                .fold(T::zero(), |m, (_, v)| m.max(v.abs())),
        }
    }

    /// Support `[a, b)` pieces on which `g` is linear, as `(a, b, g(a), slope)`.
    fn pieces(&self) -> Vec<(T, T, T, T)> {
        let r = self.radius();
        match &self.shape {
            ForceShape::BallIndicator { amplitude } => vec![(T::zero(), r, *amplitude, T::zero())],
            ForceShape::Shell {
                amplitude,
                inner,
                outer,
            } => {
                vec![(*inner, outer.min(r), *amplitude, T::zero())]
            }
            ForceShape::CustomRadial { radii, values } => radii
                .windows(2)
                .zip(values.windows(2))
                .filter(|(rw, _)| rw[0] < r)
                .map(|(rw, vw)| {
                    let slope = (vw[1] - vw[0]) / (rw[1] - rw[0]);
                    (rw[0], rw[1].min(r), vw[0], slope)
                })
                .collect(),
        }
    }

    /// `4π ∫ g(ρ)² ρ^{2+p} dρ`, exact for piecewise-linear `g`.
    fn radial_moment_sq(&self, p: T) -> Result<T, ForcingError> {
        let mut acc = T::zero();
        for (a, b, ga, slope) in self.pieces() {
            if !(b > a) {
                continue;
            }
            // g(ρ) = c0 + c1 ρ on [a, b)
            let c0 = ga - slope * a;
            let c1 = slope;
            let q = T::lit(2.0) + p;
            let terms = [
                (c0 * c0, q),
                (T::lit(2.0) * c0 * c1, q + T::one()),
                (c1 * c1, q + T::lit(2.0)),
            ];
            for (coef, e) in terms {
                if coef == T::zero() {
                    continue;
                }
                acc = acc + coef * power_integral(a, b, e)?;
            }
        }
        Ok(acc * T::lit(4.0) * T::PI())
    }

    /// `4π ∫ |g(ρ)| ρ³ dρ`, exact for piecewise-linear `g`.
    fn radial_abs_moment3(&self) -> T {
        let mut acc = T::zero();
        for (a, b, ga, slope) in self.pieces() {
            if !(b > a) {
                continue;
            }
            let c0 = ga - slope * a;
            let mut cuts = vec![a];
            if slope != T::zero() {
                let root = -c0 / slope;
                if root > a && root < b {
                    cuts.push(root);
                }
            }
            cuts.push(b);
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let val = c0 * (hi.powi(4) - lo.powi(4)) / T::lit(4.0)
                    + slope * (hi.powi(5) - lo.powi(5)) / T::lit(5.0);
                acc = acc + val.abs();
            }
        }
        acc * T::lit(4.0) * T::PI()
    }
}

/// `∫_a^b ρ^e dρ` for `e > -1`.
fn power_integral<T: Real>(a: T, b: T, e: T) -> Result<T, ForcingError> {
    let e1 = e + T::one();
    if e1 <= T::zero() {
        if a > T::zero() {
            return Ok(if e1 == T::zero() {
                (b / a).ln()
            } else {
                (b.powf(e1) - a.powf(e1)) / e1
            });
        }
        return Err(ForcingError::NonIntegrable {
            order: (-(e - T::lit(2.0)) / T::lit(2.0)).as_f64(),
        });
    }
    Ok((b.powf(e1) - a.powf(e1)) / e1)
}

/// Norms of a force, each in the unitary Fourier convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceNorms<T> {
    /// `‖f‖_{L²}`, units of force density × length^{3/2}.
    pub l2: T,
    /// `‖f‖_{Ḣ^{-1}}`.
    pub h_neg1: T,
    /// `‖f‖_{Ḣ^{-α/2}}` for the profile's α.
    pub h_neg_alpha_half: T,
    /// `‖Δf‖_{L²}`.
    pub laplacian_l2: T,
    /// `‖∇⊗f‖_{L∞}` (an upper bound for continuum values, the grid maximum for lattice values).
    pub grad_linf: T,
    /// Averaged force `F = ‖f‖_{L²}/ℓ₀^{3/2}`.
    pub averaged_force: T,
}

impl<T: Real> ForceNorms<T> {
    /// Closed forms rescaled for the projected field: for a radial profile
    /// with constant direction `e`, the angular mean of `|(I - ξξᵀ/|ξ|²)e|²`
    /// is 2/3, so every quadratic norm shrinks by `(2/3)^{1/2}`. The gradient
    /// bound is kept as is, since `|Pe| ≤ 1`.
    pub fn projected(&self) -> Self {
        let f = (T::lit(2.0) / T::lit(3.0)).sqrt();
        Self {
            l2: self.l2 * f,
            h_neg1: self.h_neg1 * f,
            h_neg_alpha_half: self.h_neg_alpha_half * f,
            laplacian_l2: self.laplacian_l2 * f,
            grad_linf: self.grad_linf,
            averaged_force: self.averaged_force * f,
        }
    }
}

/// Lattice force: `g(|k|) e` on every `0 < |k| < c/ℓ₀`, then projected.
pub fn build_force<T: Real>(
    profile: &ForceProfile<T>,
    grid: &GridSpec<T>,
) -> Result<SpectralVectorField<T>, ForcingError> {
    profile.validate()?;
    let radius = profile.radius();
    let cutoff = grid.dealias_radius();
    if radius > cutoff {
        return Err(ForcingError::SupportExceedsGrid {
            radius: radius.as_f64(),
            cutoff: cutoff.as_f64(),
        });
    }
    let k2 = grid.k_squared();
    let mut field = SpectralVectorField::zeros(grid.clone());
    let mut support = 0usize;
    for idx in 1..grid.len() {
        let rho = k2[idx].sqrt();
        if profile.in_support(rho) {
            support += 1;
            field.component_mut(0)[idx] = Complex::new(profile.value(rho), T::zero());
        }
    }
    if support == 0 {
        return Err(ForcingError::EmptySupport);
    }
    leray_in_place(&mut field);
    Ok(field)
}

/// Exact continuum norms of the unprojected profile `g(|ξ|) e`.
pub fn continuum_norms<T: Real>(profile: &ForceProfile<T>) -> Result<ForceNorms<T>, ForcingError> {
    profile.validate()?;
    let l2 = profile.radial_moment_sq(T::zero())?.sqrt();
    let h_neg1 = profile.radial_moment_sq(-T::lit(2.0))?.sqrt();
    let h_neg_alpha_half = profile.radial_moment_sq(-profile.alpha)?.sqrt();
    let laplacian_l2 = profile.radial_moment_sq(T::lit(4.0))?.sqrt();
    let two_pi = T::TAU();
    let grad_linf = profile.radial_abs_moment3() / (two_pi * two_pi * two_pi).sqrt();
    Ok(ForceNorms {
        l2,
        h_neg1,
        h_neg_alpha_half,
        laplacian_l2,
        grad_linf,
        averaged_force: l2 / profile.ell0.powf(T::lit(1.5)),
    })
}

/// Norms of a lattice force as seen by the solver.
pub fn discrete_norms<T: Real>(
    force: &SpectralVectorField<T>,
    profile: &ForceProfile<T>,
    fft: &Fft3<T>,
) -> ForceNorms<T> {
    let l2 = sobolev_norm(force, T::zero());
    ForceNorms {
        l2,
        h_neg1: sobolev_norm(force, -T::one()),
        h_neg_alpha_half: sobolev_norm(force, -profile.alpha * T::lit(0.5)),
        laplacian_l2: sobolev_norm(force, T::lit(2.0)),
        grad_linf: max_gradient_norm(force, fft),
        averaged_force: l2 / profile.ell0.powf(T::lit(1.5)),
    }
}

/// `Gr = ‖f‖_{L²} ℓ₀^{3/2} / ν²`.
pub fn grashof<T: Real>(norms: &ForceNorms<T>, ell0: T, nu: T) -> T {
    norms.l2 * ell0.powf(T::lit(1.5)) / (nu * nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum DampingRule<T> {
    /// `β = F^{3/2}`.
    BetaFromForce,
    /// `β = ν/ℓ₀²`.
    BetaFromViscosity,
    Explicit(T),
}

pub fn damping_beta<T: Real>(
    rule: DampingRule<T>,
    norms: &ForceNorms<T>,
    nu: T,
    ell0: T,
) -> Result<T, ForcingError> {
    let beta = match rule {
        DampingRule::BetaFromForce => norms.averaged_force.powf(T::lit(1.5)),
        DampingRule::BetaFromViscosity => nu / (ell0 * ell0),
        DampingRule::Explicit(b) => b,
    };
    if beta > T::zero() && beta.is_finite() {
        Ok(beta)
    } else {
        Err(ForcingError::NonPositiveDamping(beta.as_f64()))
    }
}

/// One hypothesis read as a ratio that should be large (`≥ K`) or near one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionMargin {
    pub name: String,
    pub ratio: f64,
    /// `ratio ≥ K`.
    pub strong: bool,
    /// `|ratio - 1| ≤ 5%`.
    pub near_one: bool,
}

/// Where `‖f̂‖_{L∞}` falls relative to the window in which a constant-in-Fourier
/// force meets both hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeWindow {
    pub amplitude: f64,
    pub lower: f64,
    pub upper: f64,
    pub position: WindowPosition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPosition {
    Below,
    Inside,
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub margins: Vec<ConditionMargin>,
    pub amplitude_window: AmplitudeWindow,
    /// `0 < ν < 2`.
    pub viscosity_in_range: bool,
    /// `ℓ₀ > 1`.
    pub large_length_scale: bool,
    pub threshold: f64,
}

impl ConditionReport {
    pub fn margin(&self, name: &str) -> Option<&ConditionMargin> {
        self.margins.iter().find(|m| m.name == name)
    }
}

pub const NEAR_ONE_TOLERANCE: f64 = 0.05;
pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Hypothesis margins on the force.
///
/// With `alpha = None` the classical pair is evaluated:
/// `m₁ = ‖f‖/ℓ₀^{5/2}` and `m₂ = ℓ₀^{9/8}‖f‖_{Ḣ^{-1}}/(√ν ‖f‖^{7/4})`.
/// With `Some(α)`, `α ∈ (3/7, 3)`, `m₁` uses `ℓ₀^{2-α/2}` below α = 1 and
/// `ℓ₀^{α+1/2}` from α = 1 on, and `m₂` uses `norms.h_neg_alpha_half`, which
/// must have been computed for the same α as the profile.
pub fn validate_conditions<T: Real>(
    profile: &ForceProfile<T>,
    norms: &ForceNorms<T>,
    nu: T,
    alpha: Option<T>,
    threshold: T,
) -> Result<ConditionReport, ForcingError> {
    let ell0 = profile.ell0.as_f64();
    let nu64 = nu.as_f64();
    let (m1_exp, negative, window) = match alpha {
        None => (2.5, norms.h_neg1.as_f64(), (4.0, 13.0 / 3.0)),
        Some(a) => {
            let a64 = a.as_f64();
            if !(a64 > 3.0 / 7.0 && a64 < 3.0) {
                return Err(ForcingError::AlphaOutOfRange(a64));
            }
            if a != profile.alpha {
                return Err(ForcingError::InvalidProfile(format!(
                    "conditions requested for alpha = {a64} but the profile carries alpha = {}",
                    profile.alpha
                )));
            }
            let upper = 3.0 + 2.0 * a64 / 3.0;
            if a64 < 1.0 {
                (
                    2.0 - a64 / 2.0,
                    norms.h_neg_alpha_half.as_f64(),
                    (3.5 - a64 / 2.0, upper),
                )
            } else {
                (
                    a64 + 0.5,
                    norms.h_neg_alpha_half.as_f64(),
                    (a64 + 2.0, upper),
                )
            }
        }
    };
    let l2 = norms.l2.as_f64();
    let k = threshold.as_f64();
    let margin = |name: &str, ratio: f64| ConditionMargin {
        name: name.to_string(),
        ratio,
        strong: ratio >= k,
        near_one: (ratio - 1.0).abs() <= NEAR_ONE_TOLERANCE,
    };
    let m1 = l2 / ell0.powf(m1_exp);
    let m2 = ell0.powf(9.0 / 8.0) * negative / (nu64.sqrt() * l2.powf(7.0 / 4.0));
    let amplitude = profile.sup_amplitude().as_f64();
    let (lower, upper) = (ell0.powf(window.0), ell0.powf(window.1));
    let position = if amplitude < lower {
        WindowPosition::Below
    } else if amplitude > upper {
        WindowPosition::Above
    } else {
        WindowPosition::Inside
    };
    Ok(ConditionReport {
        margins: vec![margin("m1", m1), margin("m2", m2)],
        amplitude_window: AmplitudeWindow {
            amplitude,
            lower,
            upper,
            position,
        },
        viscosity_in_range: nu64 > 0.0 && nu64 < 2.0,
        large_length_scale: ell0 > 1.0,
        threshold: k,
    })
}
