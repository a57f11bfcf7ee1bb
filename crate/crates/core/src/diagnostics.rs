//! Energy accounting along a trajectory and the long-time averages `U`, `ℰ_α`, `Re`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::ForceNorms;
use crate::solver::{Solver, SolverState};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("non-finite {quantity} at t = {t}")]
    NonFinite { quantity: &'static str, t: f64 },
    #[error(
        "averaging window {available} is shorter than the required {required} (ten damping times)"
    )]
    InsufficientHorizon { available: f64, required: f64 },
    #[error("need at least two records, have {0}")]
    TooFewRecords(usize),
}

pub const CSV_HEADER: &str =
    "t,kinetic,dissipation,hyper_dissipation,injection,damping_drain,residual";
/// Relative disagreement allowed between the two halves of the averaging window.
pub const STATIONARITY_TOLERANCE: f64 = 0.02;

/// Terms of the energy balance at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord<T> {
    pub t: T,
    /// `‖u‖²_{L²}`.
    pub kinetic: T,
    /// `‖u‖²_{Ḣ^{α/2}}`.
    pub dissipation: T,
    /// `‖u‖²_{Ḣ²}`, zero unless hyperviscosity is on.
    pub hyper_dissipation: T,
    /// `⟨f, u⟩`.
    pub injection: T,
    /// `β‖u‖²_{L²}`.
    pub damping_drain: T,
}

impl<T: Real> EnergyRecord<T> {
    fn check(&self) -> Result<(), DiagnosticsError> {
        let t = self.t.as_f64();
        for (quantity, v) in [
            ("kinetic energy", self.kinetic),
            ("dissipation", self.dissipation),
            ("hyper-dissipation", self.hyper_dissipation),
            ("injection", self.injection),
            ("damping drain", self.damping_drain),
        ] {
            if !v.is_finite() {
                return Err(DiagnosticsError::NonFinite { quantity, t });
            }
        }
        Ok(())
    }
}

/// Evaluates every balance term of `state` with the solver's own symbols.
pub fn record<T: Real>(
    state: &SolverState<T>,
    solver: &Solver<T>,
) -> Result<EnergyRecord<T>, DiagnosticsError> {
    let u = &state.u;
    let symbol = solver.dissipation_symbol();
    let k2 = solver.k_squared();
    let hyper_on = solver.config().epsilon > T::zero();
    let mut kinetic = T::zero();
    let mut dissipation = T::zero();
    let mut hyper = T::zero();
    for idx in 1..k2.len() {
        let a = u.component(0)[idx].norm_sqr()
            + u.component(1)[idx].norm_sqr()
            + u.component(2)[idx].norm_sqr();
        if a == T::zero() {
            continue;
        }
        kinetic = kinetic + a;
        dissipation = dissipation + symbol[idx] * a;
        if hyper_on {
            hyper = hyper + k2[idx] * k2[idx] * a;
        }
    }
    let cv = u.grid().cell_volume();
    let kinetic = kinetic * cv;
    let rec = EnergyRecord {
        t: state.t,
        kinetic,
        dissipation: dissipation * cv,
        hyper_dissipation: hyper * cv,
        injection: solver.force().inner(u),
        damping_drain: solver.beta() * kinetic,
    };
    rec.check()?;
    Ok(rec)
}

/// Coefficients of the balance `d/dt ‖u‖² = -2ν D - 2ε H + 2 I - 2β K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceCoefficients<T> {
    pub nu: T,
    pub epsilon: T,
}

/// `R(t) = ‖u₀‖² - ‖u(t)‖² - 2ν∫D - 2ε∫H + 2∫I - 2∫βK`, trapezoidal in time.
///
/// The inequality holds when `R ≥ -tol`; for the linear Stokes flow `R`
/// vanishes up to quadrature error.
pub fn energy_inequality_residual<T: Real>(
    records: &[EnergyRecord<T>],
    coeffs: BalanceCoefficients<T>,
) -> Result<Vec<T>, DiagnosticsError> {
    if records.len() < 2 {
        return Err(DiagnosticsError::TooFewRecords(records.len()));
    }
    let two = T::lit(2.0);
    let rate = |r: &EnergyRecord<T>| {
        -two * coeffs.nu * r.dissipation - two * coeffs.epsilon * r.hyper_dissipation
            + two * r.injection
            - two * r.damping_drain
    };
    let k0 = records[0].kinetic;
    let mut out = Vec::with_capacity(records.len());
    out.push(T::zero());
    let mut integral = T::zero();
    for w in records.windows(2) {
        integral = integral + (w[1].t - w[0].t) * (rate(&w[0]) + rate(&w[1])) * T::lit(0.5);
        out.push(k0 - w[1].kinetic + integral);
    }
    Ok(out)
}

/// Append-only record of a run with its residual kept current.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsLedger<T> {
    coeffs: BalanceCoefficients<T>,
    records: Vec<EnergyRecord<T>>,
    residuals: Vec<T>,
    integral: T,
}

impl<T: Real> DiagnosticsLedger<T> {
    pub fn new(nu: T, epsilon: T) -> Self {
        Self {
            coeffs: BalanceCoefficients { nu, epsilon },
            records: Vec::new(),
            residuals: Vec::new(),
            integral: T::zero(),
        }
    }

    pub fn for_solver(solver: &Solver<T>) -> Self {
        Self::new(solver.config().nu, solver.config().epsilon)
    }

    pub fn push(&mut self, rec: EnergyRecord<T>) -> T {
        let two = T::lit(2.0);
        let c = self.coeffs;
        let rate = |r: &EnergyRecord<T>| {
            -two * c.nu * r.dissipation - two * c.epsilon * r.hyper_dissipation + two * r.injection
                - two * r.damping_drain
        };
        let residual = match self.records.last() {
            None => T::zero(),
            Some(prev) => {
                self.integral =
                    self.integral + (rec.t - prev.t) * (rate(prev) + rate(&rec)) * T::lit(0.5);
                self.records[0].kinetic - rec.kinetic + self.integral
            }
        };
        self.records.push(rec);
        self.residuals.push(residual);
        residual
    }

    pub fn records(&self) -> &[EnergyRecord<T>] {
        &self.records
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn coefficients(&self) -> BalanceCoefficients<T> {
        self.coeffs
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for (r, res) in self.records.iter().zip(&self.residuals) {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.t.as_f64(),
                r.kinetic.as_f64(),
                r.dissipation.as_f64(),
                r.hyper_dissipation.as_f64(),
                r.injection.as_f64(),
                r.damping_drain.as_f64(),
                res.as_f64()
            )?;
        }
        Ok(())
    }
}

/// Time averages over `[T₀, T]` and the quantities built from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningAverages<T> {
    pub horizon: T,
    pub burn_in: T,
    pub mean_kinetic: T,
    pub mean_dissipation: T,
    /// `U = (mean_kinetic/ℓ₀³)^{1/2}`.
    pub velocity: T,
    /// `ℰ_α = ν · mean_dissipation/ℓ₀³`.
    pub dissipation_rate: T,
    /// `Re = U ℓ₀/ν`.
    pub reynolds: T,
    /// Kinetic and dissipation means over the first and second half of the window.
    pub first_half: [T; 2],
    pub second_half: [T; 2],
    pub stationary: bool,
}

/// `∫_a^b` of the piecewise-linear interpolant through `(t, value)`.
fn window_integral<T: Real>(
    records: &[EnergyRecord<T>],
    value: impl Fn(&EnergyRecord<T>) -> T,
    a: T,
    b: T,
) -> T {
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for w in records.windows(2) {
        let (t0, t1) = (w[0].t, w[1].t);
        let lo = t0.max(a);
        let hi = t1.min(b);
        if !(hi > lo) {
            continue;
        }
        let (v0, v1) = (value(&w[0]), value(&w[1]));
        let at = |t: T| v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        acc = acc + (hi - lo) * (at(lo) + at(hi)) * half;
    }
    acc
}

fn agree<T: Real>(a: T, b: T) -> bool {
    let scale = a.abs().max(b.abs());
    scale == T::zero() || (a - b).abs() <= T::lit(STATIONARITY_TOLERANCE) * scale
}

/// Trapezoidal averages over `[burn_in, T]` with `T` the last record time.
///
/// Needs `T - burn_in ≥ 10/β`.
pub fn finalize_averages<T: Real>(
    records: &[EnergyRecord<T>],
    burn_in: T,
    ell0: T,
    nu: T,
    beta: T,
) -> Result<RunningAverages<T>, DiagnosticsError> {
    if records.len() < 2 {
        return Err(DiagnosticsError::TooFewRecords(records.len()));
    }
    let horizon = records[records.len() - 1].t;
    let window = horizon - burn_in;
    let required = T::lit(10.0) / beta;
    if window < required * (T::one() - T::lit(1e-12)) {
        return Err(DiagnosticsError::InsufficientHorizon {
            available: window.as_f64(),
            required: required.as_f64(),
        });
    }
    let mid = (burn_in + horizon) * T::lit(0.5);
    let mean = |a: T, b: T| -> [T; 2] {
        [
            window_integral(records, |r| r.kinetic, a, b) / (b - a),
            window_integral(records, |r| r.dissipation, a, b) / (b - a),
        ]
    };
    let [mean_kinetic, mean_dissipation] = mean(burn_in, horizon);
    let first_half = mean(burn_in, mid);
    let second_half = mean(mid, horizon);
    let l3 = ell0 * ell0 * ell0;
    let velocity = (mean_kinetic / l3).sqrt();
    Ok(RunningAverages {
        horizon,
        burn_in,
        mean_kinetic,
        mean_dissipation,
        velocity,
        dissipation_rate: nu * mean_dissipation / l3,
        reynolds: velocity * ell0 / nu,
        first_half,
        second_half,
        stationary: agree(first_half[0], second_half[0]) && agree(first_half[1], second_half[1]),
    })
}

/// `‖f‖²_{Ḣ^{-1}}/(ν ℓ₀³)`, an upper bound for `ℰ`.
pub fn appendix_a_ceiling<T: Real>(norms: &ForceNorms<T>, nu: T, ell0: T) -> T {
    norms.h_neg1 * norms.h_neg1 / (nu * ell0 * ell0 * ell0)
}

/// `‖f‖²_{Ḣ^{-1}}/(ν β ℓ₀³)`, an upper bound for `U²`.
pub fn velocity_ceiling<T: Real>(norms: &ForceNorms<T>, nu: T, beta: T, ell0: T) -> T {
    norms.h_neg1 * norms.h_neg1 / (nu * beta * ell0 * ell0 * ell0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{continuum_norms, DampingRule, ForceProfile};
    use crate::solver::{stokes_steady_state, SimConfig, Transport};
    use crate::spectral::GridSpec;
    use num_complex::Complex;
    use std::f64::consts::PI;

    fn stokes_solver() -> Solver<f64> {
        let profile = ForceProfile::ball(2f64.powf(2.5), 1.0, 0.5);
        let grid = GridSpec::new(40.0, 16).unwrap();
        let mut cfg = SimConfig::new(
            grid,
            2f64.sqrt(),
            DampingRule::BetaFromForce,
            1.0,
            1e-3,
            2.0,
        );
        cfg.transport = Transport::Disabled;
        Solver::new(cfg, &profile).unwrap()
    }

    fn synthetic(ts: &[f64], k: impl Fn(f64) -> f64) -> Vec<EnergyRecord<f64>> {
        ts.iter()
            .map(|&t| EnergyRecord {
                t,
                kinetic: k(t),
                dissipation: 2.0 * k(t),
                hyper_dissipation: 0.0,
                injection: 0.0,
                damping_drain: 0.0,
            })
            .collect()
    }

    #[test]
    fn zero_state_records_zero() {
        let s = stokes_solver();
        let rec = record(&s.initial_state(), &s).unwrap();
        assert_eq!(rec.kinetic, 0.0);
        assert_eq!(rec.dissipation, 0.0);
        assert_eq!(rec.injection, 0.0);
        assert_eq!(rec.damping_drain, 0.0);
    }

    #[test]
    fn steady_stokes_balance_is_exact_per_mode() {
        let s = stokes_solver();
        let nu = 2f64.sqrt();
        let steady = stokes_steady_state(s.force(), nu, s.beta());
        let mut state = s.initial_state();
        state.u = steady;
        let rec = record(&state, &s).unwrap();
        let k2 = s.k_squared();
        let cv = s.config().grid.cell_volume();
        let expect: f64 = (0..k2.len())
            .map(|i| {
                (0..3)
                    .map(|c| s.force().component(c)[i].norm_sqr())
                    .sum::<f64>()
                    / (nu * k2[i] + s.beta())
            })
            .sum::<f64>()
            * cv;
        assert!((rec.injection - expect).abs() <= 1e-13 * expect);
        let balance = nu * rec.dissipation + rec.damping_drain;
        assert!((rec.injection - balance).abs() <= 1e-13 * expect);
    }

    #[test]
    fn single_mode_dissipation() {
        let s = stokes_solver();
        let grid = s.config().grid.clone();
        let mut state = s.initial_state();
        let idx = grid.flat(0, 2, 1);
        state.u.component_mut(0)[idx] = Complex::new(0.5, 0.25);
        state.u.component_mut(0)[grid.mirror(idx)] = Complex::new(0.5, -0.25);
        let rec = record(&state, &s).unwrap();
        let k2 = grid.k_squared()[idx];
        assert!((rec.dissipation - k2 * rec.kinetic).abs() <= 1e-15 * rec.dissipation);
    }

    #[test]
    fn residual_needs_two_records_and_vanishes_at_rest() {
        let c = BalanceCoefficients {
            nu: 1.0,
            epsilon: 0.0,
        };
        assert_eq!(
            energy_inequality_residual(&synthetic(&[0.0], |_| 0.0), c),
            Err(DiagnosticsError::TooFewRecords(1))
        );
        let zeros = synthetic(&[0.0, 0.5, 1.0], |_| 0.0);
        assert!(energy_inequality_residual(&zeros, c)
            .unwrap()
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn ledger_matches_batch_residual() {
        let mut recs = synthetic(&[0.0, 0.1, 0.3, 0.35, 1.0], |t| (-t).exp());
        for r in recs.iter_mut() {
            r.injection = 0.3 * r.t;
            r.damping_drain = 0.7 * r.kinetic;
        }
        let c = BalanceCoefficients {
            nu: 0.4,
            epsilon: 0.0,
        };
        let mut ledger = DiagnosticsLedger::new(0.4, 0.0);
        for r in &recs {
            ledger.push(*r);
        }
        assert_eq!(
            ledger.residuals(),
            energy_inequality_residual(&recs, c).unwrap().as_slice()
        );
    }

    #[test]
    fn csv_header_is_exact() {
        let mut ledger = DiagnosticsLedger::new(1.0, 0.0);
        ledger.push(synthetic(&[0.0], |_| 1.0)[0]);
        let mut out = Vec::new();
        ledger.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,kinetic,dissipation,hyper_dissipation,injection,damping_drain,residual"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
    }

    #[test]
    fn averages_of_constant_and_zero_trajectories() {
        let ts: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        let zero = finalize_averages(&synthetic(&ts, |_| 0.0), 5.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(zero.velocity, 0.0);
        assert_eq!(zero.dissipation_rate, 0.0);
        assert!(zero.stationary);
        let c = finalize_averages(&synthetic(&ts, |_| 8.0), 5.0, 2.0, 0.5, 1.0).unwrap();
        assert!((c.velocity - 1.0).abs() < 1e-15);
        assert!((c.dissipation_rate - 0.5 * 16.0 / 8.0).abs() < 1e-15);
        assert!((c.reynolds - 4.0).abs() < 1e-15);
    }

    #[test]
    fn averages_interpolate_the_burn_in_and_flag_drift() {
        // k(t) = t on [0, 20]; window [5.05, 20] sits between samples.
        let ts: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        let a = finalize_averages(&synthetic(&ts, |t| t), 5.05, 1.0, 1.0, 1.0).unwrap();
        assert!((a.mean_kinetic - (20.0 + 5.05) / 2.0).abs() < 1e-12);
        assert!(!a.stationary);
    }

    #[test]
    fn short_window_is_rejected() {
        let ts: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        assert!(matches!(
            finalize_averages(&synthetic(&ts, |_| 1.0), 5.0, 1.0, 1.0, 1.0),
            Err(DiagnosticsError::InsufficientHorizon { .. })
        ));
    }

    #[test]
    fn subsampling_changes_averages_within_trapezoid_error() {
        let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let k = |t: f64| 2.0 + (0.7 * t).sin();
        let full = finalize_averages(&synthetic(&ts, k), 0.0, 1.0, 1.0, 1.0).unwrap();
        let sub: Vec<f64> = ts.iter().step_by(2).copied().collect();
        let half = finalize_averages(&synthetic(&sub, k), 0.0, 1.0, 1.0, 1.0).unwrap();
        // |error| ≤ (b - a) h² max|k''| / 12 with h = 0.1.
        let bound = 20.0 * 0.01 * 0.49 / 12.0 / 20.0;
        assert!((full.mean_kinetic - half.mean_kinetic).abs() <= bound);
    }

    #[test]
    fn ceilings() {
        let n = continuum_norms(&ForceProfile::ball(2f64.powf(2.5), 1.0, 0.5)).unwrap();
        let a = appendix_a_ceiling(&n, 2f64.sqrt(), 1.0);
        assert!((a - 64.0 * PI / 2f64.sqrt()).abs() < 1e-12);
        assert!((a - 142.2).abs() < 0.05);
        let mut z = n;
        z.h_neg1 = 0.0;
        assert_eq!(appendix_a_ceiling(&z, 1.0, 1.0), 0.0);
        let mut d = n;
        d.h_neg1 *= 2.0;
        assert!(
            (appendix_a_ceiling(&d, 1.3, 2.0) - 4.0 * appendix_a_ceiling(&n, 1.3, 2.0)).abs()
                < 1e-12
        );
    }
}
