//! Pseudo-spectral simulator and inequality auditor for the damped (and
//! fractional) incompressible Navier-Stokes and Stokes equations on a
//! periodic box.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the double-precision instantiation used by the
//! runner and the audit reports.

pub mod audit;
pub mod diagnostics;
pub mod forcing;
pub mod runner;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use scalar::Real;

pub type Grid = spectral::GridSpec<f64>;
pub type VectorField = spectral::SpectralVectorField<f64>;
pub type Transform = spectral::Fft3<f64>;
pub type Profile = forcing::ForceProfile<f64>;
pub type Norms = forcing::ForceNorms<f64>;
pub type Config = solver::SimConfig<f64>;
pub type State = solver::SolverState<f64>;
pub type Simulator = solver::Solver<f64>;
pub type Record = diagnostics::EnergyRecord<f64>;
pub type Ledger = diagnostics::DiagnosticsLedger<f64>;
pub type Averages = diagnostics::RunningAverages<f64>;

pub type Grid32 = spectral::GridSpec<f32>;
pub type VectorField32 = spectral::SpectralVectorField<f32>;
pub type Simulator32 = solver::Solver<f32>;
