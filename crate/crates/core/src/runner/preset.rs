//! Named parameter sets.
//!
//! All presets use n = 48 and a box `L = max(8ℓ₀, 12πℓ₀/c)`, the second term
//! putting six lattice shells inside the force support `|k| < c/ℓ₀`. Times are
//! in units of `1/β` with β estimated from the closed-form norms of the
//! projected force: step cap `0.05/β`, horizon `20/β`, burn-in `5/β`.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use super::config::{
    AuditParams, ExperimentConfig, GridParams, InitialSpec, Model, OutputParams, TimeParams,
};
use crate::audit::Regime;
use crate::forcing::{continuum_norms, damping_beta, DampingRule, ForceProfile};
use crate::solver::{DEFAULT_CFL, DEFAULT_CHECK_INTERVAL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresetError {
    #[error("unknown preset `{0}` (known: section5, theorem31_demo, fractional_demo, stokes_demo, appendixC_demo)")]
    Unknown(String),
    #[error("fractional_demo needs 3/7 < alpha < 3, got {0}")]
    Alpha(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PresetName {
    Section5,
    Theorem31Demo,
    FractionalDemo,
    StokesDemo,
    AppendixCDemo,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Section5,
        PresetName::Theorem31Demo,
        PresetName::FractionalDemo,
        PresetName::StokesDemo,
        PresetName::AppendixCDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Section5 => "section5",
            PresetName::Theorem31Demo => "theorem31_demo",
            PresetName::FractionalDemo => "fractional_demo",
            PresetName::StokesDemo => "stokes_demo",
            PresetName::AppendixCDemo => "appendixC_demo",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| PresetError::Unknown(s.to_string()))
    }
}

pub const PRESET_N: usize = 48;
pub const DEFAULT_FRACTIONAL_ALPHA: f64 = 1.5;

/// Box edge giving six lattice shells inside `|k| < c/ℓ₀`, and at least `8ℓ₀`.
pub fn preset_box(ell0: f64, c: f64) -> f64 {
    (8.0 * ell0).max(12.0 * PI * ell0 / c)
}

struct Recipe {
    name: &'static str,
    model: Model,
    nu: f64,
    amplitude: f64,
    ell0: f64,
    c: f64,
    damping: DampingRule<f64>,
    random_start: bool,
    regimes: Vec<Regime>,
}

fn assemble(r: Recipe) -> ExperimentConfig {
    let alpha = r.model.alpha().unwrap_or(2.0);
    let force = ForceProfile::ball(r.amplitude, r.ell0, r.c).with_alpha(alpha);
    let norms = continuum_norms(&force)
        .expect("preset profile is integrable")
        .projected();
    let beta = damping_beta(r.damping, &norms, r.nu, r.ell0).expect("preset damping is positive");
    let dual = if r.model.alpha().is_some() {
        norms.h_neg_alpha_half
    } else {
        norms.h_neg1
    };
    let initial = if r.random_start {
        InitialSpec::RandomLowpass {
            seed: 1,
            // A hundredth of the energy ceiling, confined to the forced band.
            energy: 0.01 * dual * dual / (r.nu * beta),
            cutoff: r.c / r.ell0,
        }
    } else {
        InitialSpec::Zero
    };
    ExperimentConfig {
        model: r.model,
        nu: r.nu,
        delta: 0.0,
        epsilon: 0.0,
        force,
        damping: r.damping,
        grid: GridParams {
            box_length: preset_box(r.ell0, r.c),
            n: PRESET_N,
        },
        time: TimeParams {
            dt_max: 0.05 / beta,
            cfl: Some(DEFAULT_CFL),
            t_end: 20.0 / beta,
            burn_in: 5.0 / beta,
            check_interval: DEFAULT_CHECK_INTERVAL,
            sample_every: 1,
        },
        initial,
        output: OutputParams {
            directory: PathBuf::from(r.name),
            checkpoint: true,
        },
        audit: AuditParams {
            regimes: r.regimes,
            ..AuditParams::default()
        },
    }
}

/// `alpha` only affects `fractional_demo` (default 1.5).
pub fn preset(name: PresetName, alpha: Option<f64>) -> Result<ExperimentConfig, PresetError> {
    let section5 = |name, model, random_start, regimes| Recipe {
        name,
        model,
        nu: 2f64.sqrt(),
        amplitude: 2f64.powf(2.5),
        ell0: 1.0,
        c: 0.5,
        damping: DampingRule::BetaFromForce,
        random_start,
        regimes,
    };
    let recipe = match name {
        PresetName::Section5 => section5(
            "section5",
            Model::Nse,
            true,
            vec![Regime::Classical, Regime::SmallGrashof],
        ),
        PresetName::StokesDemo => section5(
            "stokes_demo",
            Model::Stokes { alpha: None },
            false,
            vec![Regime::Stokes, Regime::SmallGrashof],
        ),
        PresetName::Theorem31Demo => Recipe {
            name: "theorem31_demo",
            model: Model::Nse,
            nu: 1.0,
            amplitude: 256.0,
            ell0: 4.0,
            c: 1.0,
            damping: DampingRule::BetaFromForce,
            random_start: true,
            regimes: vec![Regime::Classical],
        },
        PresetName::FractionalDemo => {
            let a = alpha.unwrap_or(DEFAULT_FRACTIONAL_ALPHA);
            if !(a > 3.0 / 7.0 && a < 3.0) {
                return Err(PresetError::Alpha(a));
            }
            let ell0: f64 = 4.0;
            // Geometric middle of the amplitude window of the fractional hypotheses.
            let lower = if a < 1.0 { 3.5 - a / 2.0 } else { a + 2.0 };
            let upper = 3.0 + 2.0 * a / 3.0;
            Recipe {
                name: "fractional_demo",
                model: Model::FractionalNse { alpha: a },
                nu: 1.0,
                amplitude: ell0.powf(0.5 * (lower + upper)),
                ell0,
                c: 1.0,
                damping: DampingRule::BetaFromForce,
                random_start: true,
                regimes: vec![Regime::Fractional],
            }
        }
        PresetName::AppendixCDemo => Recipe {
            name: "appendixC_demo",
            model: Model::Nse,
            nu: 1.0,
            amplitude: 1.0,
            ell0: 1.0,
            c: 1.0,
            damping: DampingRule::BetaFromViscosity,
            random_start: true,
            regimes: vec![Regime::AppendixC, Regime::Classical],
        },
    };
    Ok(assemble(recipe))
}
