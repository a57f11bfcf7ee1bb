//! Time integration of the damped (fractional, optionally mollified and
//! hyperviscous) Navier-Stokes equation and its Stokes special case.

mod checkpoint;
mod transport;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::forcing::{
    damping_beta, discrete_norms, DampingRule, ForceNorms, ForceProfile, ForcingError,
};
use crate::spectral::{
    check_alpha, dealias_in_place, fractional_symbol, leray_in_place, Fft3, GridSpec,
    SpectralError, SpectralVectorField,
};
use crate::Real;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use transport::{transport_term, Transport};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("blow-up guard at t = {t}: ‖u‖ = {norm} exceeds {threshold}")]
    BlowUp { t: f64, norm: f64, threshold: f64 },
    #[error("non-finite {quantity} at t = {t}")]
    NonFinite { quantity: String, t: f64 },
    #[error("invariant violated at step {step}: {what} = {value}")]
    Invariant { step: u64, what: String, value: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition<T> {
    Zero,
    /// Seeded Gaussian coefficients on `0 < |k| < cutoff`, projected and
    /// rescaled to `‖u₀‖² = energy`.
    RandomLowpass {
        seed: u64,
        energy: T,
        cutoff: T,
    },
    Explicit(SpectralVectorField<T>),
}

/// Every parameter of one simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig<T> {
    pub nu: T,
    /// `None` selects the classical `-Δ` symbol `|k|²`; `Some(α)` the
    /// fractional symbol `|k|^α`, `0 < α < 4`.
    pub alpha: Option<T>,
    pub damping: DampingRule<T>,
    /// Mollification width, 0 disables.
    pub delta: T,
    /// Hyperviscosity coefficient of `ε Δ²`, 0 disables.
    pub epsilon: T,
    pub ell0: T,
    /// Largest step; the advective CFL limit may shorten it.
    pub dt: T,
    /// Advective CFL number, `None` keeps `dt` fixed.
    pub cfl: Option<T>,
    pub t_end: T,
    pub burn_in: T,
    pub grid: GridSpec<T>,
    pub initial_condition: InitialCondition<T>,
    pub transport: Transport,
    /// Steps between invariant checks.
    pub check_interval: u64,
}

pub const DEFAULT_CFL: f64 = 0.25;
pub const DEFAULT_CHECK_INTERVAL: u64 = 100;
/// Steps between re-evaluations of the advective step limit.
pub const CFL_INTERVAL: u64 = 10;
/// Blow-up guard multiplier on the energy ceiling.
pub const BLOWUP_FACTOR: f64 = 1e3;

impl<T: Real> SimConfig<T> {
    pub fn new(
        grid: GridSpec<T>,
        nu: T,
        damping: DampingRule<T>,
        ell0: T,
        dt: T,
        t_end: T,
    ) -> Self {
        Self {
            nu,
            alpha: None,
            damping,
            delta: T::zero(),
            epsilon: T::zero(),
            ell0,
            dt,
            cfl: Some(T::lit(DEFAULT_CFL)),
            t_end,
            burn_in: T::zero(),
            grid,
            initial_condition: InitialCondition::Zero,
            transport: Transport::Enabled,
            check_interval: DEFAULT_CHECK_INTERVAL,
        }
    }

    /// The exponent of the dissipative symbol, 2 in the classical case.
    pub fn alpha_value(&self) -> T {
        self.alpha.unwrap_or_else(|| T::lit(2.0))
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.nu > T::zero()) || !self.nu.is_finite() {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        if !(self.delta >= T::zero()) {
            return Err(SpectralError::NegativeDelta(self.delta.as_f64()).into());
        }
        if !(self.epsilon >= T::zero()) {
            return bad(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            ));
        }
        if !(self.ell0 > T::zero()) {
            return bad(format!("ell0 must be positive, got {}", self.ell0));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if let Some(c) = self.cfl {
            if !(c > T::zero()) {
                return bad(format!("cfl must be positive, got {c}"));
            }
        }
        if !(self.t_end > T::zero()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.burn_in >= T::zero() && self.burn_in < self.t_end) {
            return bad(format!(
                "burn_in must lie in [0, t_end), got {}",
                self.burn_in
            ));
        }
        if self.check_interval == 0 {
            return bad("check interval must be at least 1".into());
        }
        if let InitialCondition::Explicit(u) = &self.initial_condition {
            if u.grid() != &self.grid {
                return bad("explicit initial field lives on a different grid".into());
            }
        }
        if let InitialCondition::RandomLowpass { energy, cutoff, .. } = &self.initial_condition {
            if !(*energy >= T::zero()) || !(*cutoff > T::zero()) {
                return bad("random initial data needs energy ≥ 0 and cutoff > 0".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState<T> {
    pub t: T,
    pub u: SpectralVectorField<T>,
    pub step_index: u64,
    /// Step size used for the next step.
    pub dt: T,
    /// `max_x |u(x)|` from the latest transport evaluation.
    pub max_speed: T,
}

/// Per-mode integrating factors for one step size.
#[derive(Clone, Debug)]
struct Propagator<T> {
    dt: T,
    decay: Vec<T>,
    phi: Vec<T>,
    half_decay: Vec<T>,
    half_phi: Vec<T>,
}

impl<T: Real> Propagator<T> {
    fn new(lambda: &[T], dt: T) -> Self {
        let half = dt * T::lit(0.5);
        let factors = |h: T| -> (Vec<T>, Vec<T>) {
            lambda
                .iter()
                .map(|&l| ((-l * h).exp(), -(-l * h).exp_m1() / l))
                .unzip()
        };
        let (decay, phi) = factors(dt);
        let (half_decay, half_phi) = factors(half);
        Self {
            dt,
            decay,
            phi,
            half_decay,
            half_phi,
        }
    }
}

/// A configured simulation: force, damping rate, and the per-mode symbols.
#[derive(Debug)]
pub struct Solver<T: Real> {
    config: SimConfig<T>,
    force: SpectralVectorField<T>,
    norms: ForceNorms<T>,
    beta: T,
    fft: Fft3<T>,
    k2: Vec<T>,
    /// `|k|^α` (the hand-coded `|k|²` in the classical case).
    dissipation_symbol: Vec<T>,
    /// `λ(k) = ν|k|^α + β + ε|k|⁴`.
    lambda: Vec<T>,
    mollifier: Option<Vec<T>>,
    propagator: Option<Propagator<T>>,
    guard: T,
}

impl<T: Real> Solver<T> {
    /// Builds the lattice force and resolves β from its discrete norms.
    pub fn new(config: SimConfig<T>, profile: &ForceProfile<T>) -> Result<Self, SolverError> {
        let force = crate::forcing::build_force(profile, &config.grid)?;
        let fft = Fft3::new(config.grid.n());
        let norms = discrete_norms(&force, profile, &fft);
        Self::with_force(config, force, norms)
    }

    /// Uses a prebuilt force with the given norms (β is resolved from them).
    pub fn with_force(
        config: SimConfig<T>,
        force: SpectralVectorField<T>,
        norms: ForceNorms<T>,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        if force.grid() != &config.grid {
            return Err(SolverError::Config(
                "force lives on a different grid".into(),
            ));
        }
        let beta = damping_beta(config.damping, &norms, config.nu, config.ell0)?;
        let k2 = config.grid.k_squared();
        let dissipation_symbol: Vec<T> = match config.alpha {
            None => k2.clone(),
            Some(a) => k2.iter().map(|&q| fractional_symbol(q, a)).collect(),
        };
        let lambda = dissipation_symbol
            .iter()
            .zip(&k2)
            .map(|(&s, &q)| config.nu * s + beta + config.epsilon * q * q)
            .collect();
        let mollifier = (config.delta > T::zero()).then(|| {
            let d2 = config.delta * config.delta;
            k2.iter().map(|&q| (-d2 * q).exp()).collect()
        });
        let mut solver = Self {
            fft: Fft3::new(config.grid.n()),
            config,
            force,
            norms,
            beta,
            k2,
            dissipation_symbol,
            lambda,
            mollifier,
            propagator: None,
            guard: T::infinity(),
        };
        solver.guard = solver.blowup_threshold(solver.initial_field().energy());
        Ok(solver)
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.config
    }

    pub fn force(&self) -> &SpectralVectorField<T> {
        &self.force
    }

    pub fn force_norms(&self) -> &ForceNorms<T> {
        &self.norms
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    pub fn dissipation_symbol(&self) -> &[T] {
        &self.dissipation_symbol
    }

    pub fn k_squared(&self) -> &[T] {
        &self.k2
    }

    pub fn linear_symbol(&self) -> &[T] {
        &self.lambda
    }

    /// `u₀` prescribed by the configuration, made real, dealiased and solenoidal.
    pub fn initial_field(&self) -> SpectralVectorField<T> {
        let grid = &self.config.grid;
        match &self.config.initial_condition {
            InitialCondition::Zero => SpectralVectorField::zeros(grid.clone()),
            InitialCondition::Explicit(u) => {
                let mut u = u.clone();
                admissible(&mut u);
                u
            }
            InitialCondition::RandomLowpass {
                seed,
                energy,
                cutoff,
            } => random_lowpass(grid, *seed, *energy, *cutoff),
        }
    }

    pub fn initial_state(&self) -> SolverState<T> {
        SolverState {
            t: T::zero(),
            u: self.initial_field(),
            step_index: 0,
            dt: self.config.dt,
            max_speed: T::zero(),
        }
    }

    /// `10³ · (‖u₀‖² + ‖f‖²_{Ḣ^{-1}}/(νβ))^{1/2}`, the square root of the
    /// Grönwall ceiling at `t = 0` scaled up, so it stays meaningful for `f = 0`.
    pub fn blowup_threshold(&self, u0_energy: T) -> T {
        let h = self.norms.h_neg1;
        T::lit(BLOWUP_FACTOR) * (u0_energy + h * h / (self.config.nu * self.beta)).sqrt()
    }

    /// Re-arms the blow-up guard for a state that did not start from the configured `u₀`.
    pub fn arm_guard(&mut self, u0_energy: T) {
        self.guard = self.blowup_threshold(u0_energy);
    }

    fn ensure_propagator(&mut self, dt: T) {
        if self.propagator.as_ref().map(|p| p.dt != dt).unwrap_or(true) {
            self.propagator = Some(Propagator::new(&self.lambda, dt));
        }
    }

    /// `P` of the dealiased skew-symmetric transport, plus `max|u|`.
    pub fn transport(&self, u: &SpectralVectorField<T>) -> (SpectralVectorField<T>, T) {
        transport::evaluate(u, self.mollifier.as_deref(), &self.fft)
    }

    /// Advances `state` by one step of the integrating-factor RK2 midpoint scheme.
    pub fn step(&mut self, state: &mut SolverState<T>) -> Result<(), SolverError> {
        let dt = state.dt;
        let enabled = self.config.transport == Transport::Enabled;
        self.ensure_propagator(dt);
        let prop = self.propagator.as_ref().expect("propagator just built");
        let next = if enabled {
            let (n0, speed) = self.transport(&state.u);
            state.max_speed = speed;
            let half = combine(&state.u, &self.force, &n0, &prop.half_decay, &prop.half_phi);
            let (n1, _) = self.transport(&half);
            combine(&state.u, &self.force, &n1, &prop.decay, &prop.phi)
        } else {
            linear_update(&state.u, &self.force, &prop.decay, &prop.phi)
        };
        state.u = next;
        state.t = state.t + dt;
        state.step_index += 1;
        if !state.u.is_finite() {
            return Err(SolverError::NonFinite {
                quantity: "velocity coefficient".into(),
                t: state.t.as_f64(),
            });
        }
        let norm = state.u.energy().sqrt();
        if norm > self.guard {
            return Err(SolverError::BlowUp {
                t: state.t.as_f64(),
                norm: norm.as_f64(),
                threshold: self.guard.as_f64(),
            });
        }
        if state.step_index.is_multiple_of(self.config.check_interval) {
            self.check_invariants(state)?;
        }
        if enabled && state.step_index.is_multiple_of(CFL_INTERVAL) {
            state.dt = self.next_dt(state.max_speed);
        }
        Ok(())
    }

    /// Functional form of [`Self::step`].
    pub fn step_imex(&mut self, state: &SolverState<T>) -> Result<SolverState<T>, SolverError> {
        let mut next = state.clone();
        self.step(&mut next)?;
        Ok(next)
    }

    /// `min(dt_max, cfl · h / max|u|)`.
    pub fn next_dt(&self, max_speed: T) -> T {
        match self.config.cfl {
            Some(cfl) if max_speed > T::zero() => self
                .config
                .dt
                .min(cfl * self.config.grid.spacing() / max_speed),
            _ => self.config.dt,
        }
    }

    /// Initial step size, honouring the CFL limit of `u₀`.
    pub fn initial_dt(&self, u0: &SpectralVectorField<T>) -> T {
        if self.config.transport == Transport::Disabled {
            return self.config.dt;
        }
        let speed = transport::max_speed(u0, &self.fft);
        self.next_dt(speed)
    }

    pub fn check_invariants(&self, state: &SolverState<T>) -> Result<(), SolverError> {
        let herm = state.u.hermitian_defect();
        if herm != T::zero() {
            return Err(SolverError::Invariant {
                step: state.step_index,
                what: "hermitian defect".into(),
                value: herm.as_f64(),
            });
        }
        let div = state.u.divergence_ratio();
        if div > T::lit(1e-10).max(T::epsilon() * T::lit(1e3)) {
            return Err(SolverError::Invariant {
                step: state.step_index,
                what: "relative divergence".into(),
                value: div.as_f64(),
            });
        }
        Ok(())
    }
}

fn combine<T: Real>(
    u: &SpectralVectorField<T>,
    f: &SpectralVectorField<T>,
    n: &SpectralVectorField<T>,
    decay: &[T],
    phi: &[T],
) -> SpectralVectorField<T> {
    let mut out = u.clone();
    for c in 0..3 {
        let fc = f.component(c);
        let nc = n.component(c);
        for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
            *z = z.scale(decay[idx]) + (fc[idx] - nc[idx]).scale(phi[idx]);
        }
    }
    out
}

fn linear_update<T: Real>(
    u: &SpectralVectorField<T>,
    f: &SpectralVectorField<T>,
    decay: &[T],
    phi: &[T],
) -> SpectralVectorField<T> {
    let mut out = u.clone();
    for c in 0..3 {
        let fc = f.component(c);
        for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
            *z = z.scale(decay[idx]) + fc[idx].scale(phi[idx]);
        }
    }
    out
}

/// Makes an arbitrary coefficient array a valid state: Hermitian, mean-free,
/// dealiased, divergence-free.
pub fn admissible<T: Real>(u: &mut SpectralVectorField<T>) {
    u.enforce_invariants();
    dealias_in_place(u);
    leray_in_place(u);
}

/// Seeded solenoidal random field supported in `0 < |k| < cutoff` with `‖u‖² = energy`.
pub fn random_lowpass<T: Real>(
    grid: &GridSpec<T>,
    seed: u64,
    energy: T,
    cutoff: T,
) -> SpectralVectorField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k2 = grid.k_squared();
    let c2 = cutoff * cutoff;
    let mut u = SpectralVectorField::zeros(grid.clone());
    for (idx, &q) in k2.iter().enumerate() {
        if q < c2 {
            let draws: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            u.set(
                idx,
                [0, 1, 2].map(|c| Complex::new(T::lit(draws[2 * c]), T::lit(draws[2 * c + 1]))),
            );
        }
    }
    admissible(&mut u);
    let e = u.energy();
    if e > T::zero() {
        u.scale((energy / e).sqrt());
    }
    u
}

/// Exact damped Stokes solution
/// `û(t) = e^{-(ν|k|²+β)t} û₀ + (1 - e^{-(ν|k|²+β)t})/(ν|k|²+β) f̂`.
pub fn stokes_exact<T: Real>(
    u0: &SpectralVectorField<T>,
    f: &SpectralVectorField<T>,
    nu: T,
    beta: T,
    t: T,
) -> SpectralVectorField<T> {
    let k2 = u0.grid().k_squared();
    let lambda: Vec<T> = k2.iter().map(|&q| nu * q + beta).collect();
    let decay: Vec<T> = lambda.iter().map(|&l| (-l * t).exp()).collect();
    let phi: Vec<T> = lambda.iter().map(|&l| -(-l * t).exp_m1() / l).collect();
    linear_update(u0, f, &decay, &phi)
}

/// Fixed point `f̂/(ν|k|² + β)` of the damped Stokes flow.
pub fn stokes_steady_state<T: Real>(
    f: &SpectralVectorField<T>,
    nu: T,
    beta: T,
) -> SpectralVectorField<T> {
    let k2 = f.grid().k_squared();
    let mut out = f.clone();
    for c in 0..3 {
        for (z, &q) in out.component_mut(c).iter_mut().zip(&k2) {
            *z = z.unscale(nu * q + beta);
        }
    }
    out
}

/// `e^{-βt}‖u₀‖² + ‖f‖²_{Ḣ^{-1}}/(νβ)`.
pub fn gronwall_ceiling<T: Real>(u0_norm: T, f_hneg1: T, nu: T, beta: T, t: T) -> T {
    (-beta * t).exp() * u0_norm * u0_norm + f_hneg1 * f_hneg1 / (nu * beta)
}
