//! One experiment from configuration to files on disk.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Model};
use crate::audit::{calibrate_appendix_c, AuditError, BoundReport, Group, Regime};
use crate::diagnostics::{
    finalize_averages, record, DiagnosticsError, DiagnosticsLedger, RunningAverages,
};
use crate::forcing::{continuum_norms, grashof, validate_conditions, ForcingError};
use crate::solver::{gronwall_ceiling, write_checkpoint, Solver, SolverError, SolverState};
use crate::spectral::CONVENTION;

pub const OUTPUT_ROOT_ENV: &str = "NSAUDIT_OUTPUT_ROOT";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const REPORT_FILE: &str = "report.json";
pub const META_FILE: &str = "run_meta.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
/// Slack on the ceiling entries.
pub const CEILING_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("blow-up: {0}")]
    BlowUp(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("cannot write {path}: {source}")]
    Disk {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::BlowUp(_) => 3,
            RunError::NonFinite(_) => 4,
            RunError::Disk { .. } => 5,
            RunError::Internal(_) => 1,
        }
    }

    fn disk(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
        move |source| RunError::Disk {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(m) => ConfigError::new(None, "model", m).into(),
            SolverError::Spectral(s) => ConfigError::new(None, "model", s.to_string()).into(),
            SolverError::Forcing(f) => f.into(),
            SolverError::BlowUp { .. } => RunError::BlowUp(e.to_string()),
            SolverError::NonFinite { .. } => RunError::NonFinite(e.to_string()),
            SolverError::Io(source) => RunError::Disk {
                path: PathBuf::new(),
                source,
            },
            SolverError::Invariant { .. } | SolverError::Checkpoint(_) => {
                RunError::Internal(e.to_string())
            }
        }
    }
}

impl From<ForcingError> for RunError {
    fn from(e: ForcingError) -> Self {
        let field = match e {
            ForcingError::SupportExceedsGrid { .. } | ForcingError::EmptySupport => "force.c",
            ForcingError::NonPositiveDamping(_) => "damping",
            _ => "force",
        };
        ConfigError::new(None, field, e.to_string()).into()
    }
}

impl From<DiagnosticsError> for RunError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::NonFinite { .. } => RunError::NonFinite(e.to_string()),
            DiagnosticsError::InsufficientHorizon { .. } | DiagnosticsError::TooFewRecords(_) => {
                ConfigError::new(None, "time.t_end", e.to_string()).into()
            }
        }
    }
}

impl From<AuditError> for RunError {
    fn from(e: AuditError) -> Self {
        RunError::Internal(format!("audit: {e}"))
    }
}

/// A configured run held in memory.
#[derive(Debug)]
pub struct Simulation {
    config: ExperimentConfig,
    solver: Solver<f64>,
    state: SolverState<f64>,
    ledger: DiagnosticsLedger<f64>,
    u0_norm: f64,
    /// Dual norm of the force matching the dissipation: `Ḣ^{-1}` or `Ḣ^{-α/2}`.
    dual: f64,
    worst_gronwall: f64,
}

impl Simulation {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self, RunError> {
        config.validate()?;
        let solver = Solver::new(config.sim_config()?, &config.force)?;
        let required = 10.0 / solver.beta();
        if config.time.t_end - config.time.burn_in < required {
            return Err(ConfigError::new(
                None,
                "time.t_end",
                format!("averaging window t_end - burn_in must be at least 10/β = {required}"),
            )
            .into());
        }
        let mut state = solver.initial_state();
        state.dt = solver.initial_dt(&state.u);
        let norms = solver.force_norms();
        let dual = if config.model.alpha().is_some() {
            norms.h_neg_alpha_half
        } else {
            norms.h_neg1
        };
        let mut ledger = DiagnosticsLedger::for_solver(&solver);
        let first = record(&state, &solver)?;
        let u0_norm = first.kinetic.sqrt();
        let worst = first.kinetic / gronwall_ceiling(u0_norm, dual, config.nu, solver.beta(), 0.0);
        ledger.push(first);
        Ok(Self {
            config: config.clone(),
            solver,
            state,
            ledger,
            u0_norm,
            dual,
            worst_gronwall: worst,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn solver(&self) -> &Solver<f64> {
        &self.solver
    }

    pub fn state(&self) -> &SolverState<f64> {
        &self.state
    }

    pub fn ledger(&self) -> &DiagnosticsLedger<f64> {
        &self.ledger
    }

    pub fn dual_norm(&self) -> f64 {
        self.dual
    }

    /// `max_t ‖u(t)‖² / gronwall_ceiling(t)` over every step so far.
    pub fn gronwall_worst_ratio(&self) -> f64 {
        self.worst_gronwall
    }

    /// Steps to `t_end`, shortening the last step to land on it.
    pub fn run(&mut self) -> Result<(), RunError> {
        self.advance_to(self.config.time.t_end)
    }

    pub fn advance_to(&mut self, until: f64) -> Result<(), RunError> {
        let eps = 1e-12 * until.abs().max(1.0);
        let every = self.config.time.sample_every;
        let (nu, beta) = (self.config.nu, self.solver.beta());
        while until - self.state.t > eps {
            let remaining = until - self.state.t;
            let last = self.state.dt >= remaining - eps;
            if last {
                self.state.dt = remaining;
            }
            self.solver.step(&mut self.state)?;
            let sample = last || self.state.step_index.is_multiple_of(every);
            let kinetic = if sample {
                let rec = record(&self.state, &self.solver)?;
                let k = rec.kinetic;
                self.ledger.push(rec);
                k
            } else {
                self.state.u.energy()
            };
            let ceiling = gronwall_ceiling(self.u0_norm, self.dual, nu, beta, self.state.t);
            self.worst_gronwall = self.worst_gronwall.max(kinetic / ceiling);
        }
        Ok(())
    }

    pub fn averages(&self) -> Result<RunningAverages<f64>, RunError> {
        Ok(finalize_averages(
            self.ledger.records(),
            self.config.time.burn_in,
            self.config.force.ell0,
            self.config.nu,
            self.solver.beta(),
        )?)
    }

    /// Entries for every configured regime, from this run's measured and exact quantities.
    pub fn report(&self, avg: &RunningAverages<f64>) -> Result<BoundReport, RunError> {
        let c = &self.config;
        let norms = self.solver.force_norms();
        let ell0 = c.force.ell0;
        let beta = self.solver.beta();
        let gr = grashof(norms, ell0, c.nu);
        let f = norms.averaged_force;
        let scale = self.dual * self.dual / (c.nu * beta);
        let residual_min = self
            .ledger
            .residuals()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let gr_continuum = grashof(&continuum_norms(&c.force)?, ell0, c.nu);
        let c_const = c
            .audit
            .c_const
            .unwrap_or_else(|| calibrate_appendix_c(&[(f, avg.velocity, gr, ell0)]));
        let available: Vec<(&str, f64)> = vec![
            ("F", f),
            ("U", avg.velocity),
            ("E", avg.dissipation_rate),
            ("E_alpha", avg.dissipation_rate),
            ("ell0", ell0),
            ("nu", c.nu),
            ("beta", beta),
            ("alpha", c.model.alpha().unwrap_or(2.0)),
            ("threshold", c.audit.threshold),
            ("Gr", gr),
            ("Gr_continuum", gr_continuum),
            ("Re", avg.reynolds),
            ("c_const", c_const),
            ("h_dual", self.dual),
            ("slack", CEILING_SLACK),
            ("gronwall_worst_ratio", self.worst_gronwall),
            ("residual_min", residual_min),
            ("residual_tolerance", c.audit.residual_tolerance * scale),
        ];
        let regimes = c.regimes();
        let mut groups: Vec<Group> = Vec::new();
        for r in &regimes {
            let law = match c.model {
                Model::FractionalNse { .. } | Model::Stokes { alpha: Some(_) } => {
                    Group::FractionalLaw
                }
                _ => Group::MainLaw,
            };
            let wanted: Vec<Group> = match r {
                Regime::Classical => vec![
                    Group::LemmaChain,
                    Group::MainLaw,
                    Group::Ceilings,
                    Group::EnergyInequality,
                ],
                Regime::Fractional => vec![
                    Group::LemmaChain,
                    Group::FractionalLaw,
                    Group::Ceilings,
                    Group::EnergyInequality,
                ],
                Regime::Stokes => vec![
                    Group::LemmaChain,
                    law,
                    Group::Ceilings,
                    Group::EnergyInequality,
                ],
                Regime::AppendixC => {
                    vec![Group::AppendixC, Group::Ceilings, Group::EnergyInequality]
                }
                Regime::SmallGrashof => vec![Group::SmallGrashof],
            };
            for g in wanted {
                if !groups.contains(&g) {
                    groups.push(g);
                }
            }
        }
        let mut report = BoundReport::new(regimes[0]);
        for g in groups {
            let inputs: Vec<(&str, f64)> = available
                .iter()
                .filter(|(k, _)| g.input_names().contains(k))
                .copied()
                .collect();
            report.add(g, &inputs)?;
        }
        Ok(report)
    }

    fn meta(
        &self,
        status: &str,
        message: Option<String>,
        wall: f64,
        avg: Option<&RunningAverages<f64>>,
    ) -> serde_json::Value {
        let c = &self.config;
        let norms = self.solver.force_norms();
        let alpha = match c.model {
            Model::FractionalNse { alpha } => Some(alpha),
            _ => None,
        };
        let conditions = validate_conditions(&c.force, norms, c.nu, alpha, c.audit.threshold).ok();
        json!({
            "status": status,
            "message": message,
            "config": c,
            "versions": { "nsaudit": env!("CARGO_PKG_VERSION") },
            "precision": "f64",
            "fourier_convention": CONVENTION,
            "wall_time_seconds": wall,
            "steps": self.state.step_index,
            "final_time": self.state.t,
            "beta": self.solver.beta(),
            "grashof": grashof(norms, c.force.ell0, c.nu),
            "force_norms": norms,
            "continuum_force_norms": continuum_norms(&c.force).ok(),
            "conditions": conditions,
            "averages": avg,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub report: BoundReport,
    pub averages: RunningAverages<f64>,
    pub steps: u64,
    pub wall_time_seconds: f64,
}

/// Root for relative output directories: `$NSAUDIT_OUTPUT_ROOT`, else the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    run_experiment_in(config, &output_root().join(&config.output.directory))
}

/// Runs `config` and writes its artifacts to `dir`. On a solver failure the
/// time series so far and the metadata (with the failure) are still written.
pub fn run_experiment_in(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let mut sim = Simulation::prepare(config)?;
    fs::create_dir_all(dir).map_err(RunError::disk(dir))?;
    let outcome = sim.run().and_then(|_| {
        let avg = sim.averages()?;
        let report = sim.report(&avg)?;
        Ok((avg, report))
    });
    let wall = start.elapsed().as_secs_f64();
    write_timeseries(&sim, dir)?;
    let (avg, report) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let status = match e.exit_code() {
                3 => "blow_up",
                4 => "non_finite",
                _ => "failed",
            };
            write_json(
                &dir.join(META_FILE),
                &sim.meta(status, Some(e.to_string()), wall, None),
            )?;
            return Err(e);
        }
    };
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.to_json()).map_err(RunError::disk(&path))?;
    write_json(
        &dir.join(META_FILE),
        &sim.meta("ok", None, wall, Some(&avg)),
    )?;
    if config.output.checkpoint {
        let path = dir.join(CHECKPOINT_FILE);
        let file = File::create(&path).map_err(RunError::disk(&path))?;
        let mut w = BufWriter::new(file);
        write_checkpoint(sim.state(), &mut w).map_err(|e| match e {
            SolverError::Io(source) => RunError::Disk {
                path: path.clone(),
                source,
            },
            other => other.into(),
        })?;
        w.flush().map_err(RunError::disk(&path))?;
    }
    Ok(RunOutcome {
        directory: dir.to_path_buf(),
        report,
        averages: avg,
        steps: sim.state().step_index,
        wall_time_seconds: wall,
    })
}

fn write_timeseries(sim: &Simulation, dir: &Path) -> Result<(), RunError> {
    let path = dir.join(TIMESERIES_FILE);
    let file = File::create(&path).map_err(RunError::disk(&path))?;
    let mut w = BufWriter::new(file);
    sim.ledger()
        .write_csv(&mut w)
        .map_err(RunError::disk(&path))?;
    w.flush().map_err(RunError::disk(&path))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).expect("metadata serializes");
    fs::write(path, text).map_err(RunError::disk(path))
}

#[derive(Debug)]
pub struct SweepEntry {
    pub config: PathBuf,
    pub directory: PathBuf,
    pub result: Result<RunOutcome, RunError>,
}

impl SweepEntry {
    pub fn exit_code(&self) -> i32 {
        self.result.as_ref().map_or_else(RunError::exit_code, |_| 0)
    }
}

pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.json";

/// Runs every `*.ini` in `config_dir` in parallel, each into `root/<file stem>`,
/// and writes a summary with the suite-wide calibrated constant `c`.
pub fn sweep(config_dir: &Path, root: &Path) -> Result<Vec<SweepEntry>, RunError> {
    let mut files: Vec<PathBuf> = fs::read_dir(config_dir)
        .map_err(RunError::disk(config_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ini"))
        .collect();
    files.sort();
    let entries: Vec<SweepEntry> = files
        .par_iter()
        .map(|path| {
            let stem = path.file_stem().unwrap_or_default();
            let directory = root.join(stem);
            let result = fs::read_to_string(path)
                .map_err(RunError::disk(path))
                .and_then(|text| ExperimentConfig::parse(&text).map_err(RunError::from))
                .and_then(|config| run_experiment_in(&config, &directory));
            SweepEntry {
                config: path.clone(),
                directory,
                result,
            }
        })
        .collect();
    let runs: Vec<(f64, f64, f64, f64)> = entries
        .iter()
        .filter_map(|e| e.result.as_ref().ok())
        .filter_map(|o| {
            let i = &o.report.inputs;
            Some((*i.get("F")?, *i.get("U")?, *i.get("Gr")?, *i.get("ell0")?))
        })
        .collect();
    let summary = json!({
        "runs": entries.iter().map(|e| json!({
            "config": e.config,
            "directory": e.directory,
            "exit_code": e.exit_code(),
            "error": e.result.as_ref().err().map(|x| x.to_string()),
        })).collect::<Vec<_>>(),
        "appendix_c_constant": (!runs.is_empty()).then(|| calibrate_appendix_c(&runs)),
    });
    fs::create_dir_all(root).map_err(RunError::disk(root))?;
    write_json(&root.join(SWEEP_SUMMARY_FILE), &summary)?;
    Ok(entries)
}
