//! Experiment description and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! [model]
//! kind = nse            # nse | fractional_nse | stokes
//! alpha = 1.5           # fractional_nse (required), stokes (optional)
//! nu = 1.0
//! delta = 0             # mollification width
//! epsilon = 0           # hyperviscosity
//! [force]
//! shape = ball          # ball | shell | custom
//! amplitude = 256       # ball, shell
//! inner = 0.1           # shell
//! outer = 0.2           # shell
//! radii = 0, 0.1, 0.2   # custom
//! values = 1, 1, 0      # custom
//! ell0 = 4
//! c = 1
//! [damping]
//! rule = beta_from_force   # beta_from_force | beta_from_viscosity | explicit
//! beta = 2.0               # explicit
//! [grid]
//! L = 150.8
//! n = 48
//! [time]
//! dt_max = 0.003
//! cfl = 0.25            # or `off`
//! t_end = 1.2
//! burn_in = 0.3
//! check_interval = 100
//! sample_every = 1
//! [initial]
//! kind = random_lowpass # zero | random_lowpass
//! seed = 1
//! energy = 0.5
//! cutoff = 0.25
//! [output]
//! directory = theorem31_demo
//! checkpoint = true
//! [audit]
//! regimes = classical   # classical, fractional, stokes, appendix_c, small_grashof
//! threshold = 10
//! residual_tolerance = 1e-3
//! c_const = 3.5         # optional
//! ```
//!
//! Defaults apply to `delta`, `epsilon`, `alpha` (stokes), `cfl` (0.25),
//! `check_interval`, `sample_every`, the whole `[initial]` section (zero),
//! `checkpoint` (false), and every `[audit]` key.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Regime;
use crate::forcing::{DampingRule, ForceProfile, ForceShape, DEFAULT_THRESHOLD};
use crate::solver::{InitialCondition, SimConfig, Transport, DEFAULT_CFL, DEFAULT_CHECK_INTERVAL};
use crate::spectral::GridSpec;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{field}: {message}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Nse,
    FractionalNse { alpha: f64 },
    Stokes { alpha: Option<f64> },
}

impl Model {
    /// Exponent of the dissipation, `None` for the classical Laplacian.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Model::Nse => None,
            Model::FractionalNse { alpha } => Some(alpha),
            Model::Stokes { alpha } => alpha,
        }
    }

    pub fn transport(&self) -> Transport {
        match self {
            Model::Stokes { .. } => Transport::Disabled,
            _ => Transport::Enabled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub box_length: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeParams {
    pub dt_max: f64,
    pub cfl: Option<f64>,
    pub t_end: f64,
    pub burn_in: f64,
    pub check_interval: u64,
    /// Steps between time-series records; the last step is always recorded.
    pub sample_every: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Zero,
    RandomLowpass { seed: u64, energy: f64, cutoff: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputParams {
    pub directory: PathBuf,
    pub checkpoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    /// Empty selects the regimes implied by the model and damping rule.
    pub regimes: Vec<Regime>,
    /// Factor `K` at which a "≫" ratio counts as large.
    pub threshold: f64,
    /// Allowed `-min R(t)`, relative to `h²/(νβ)`.
    pub residual_tolerance: f64,
    /// Constant in `F ≤ c (1/Gr + 1) U²/ℓ₀`; `None` uses the value
    /// calibrated on the run itself.
    pub c_const: Option<f64>,
}

pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-3;

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            regimes: Vec::new(),
            threshold: DEFAULT_THRESHOLD,
            residual_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
            c_const: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub nu: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// The profile's `alpha` always equals the model's exponent (2 if classical).
    pub force: ForceProfile<f64>,
    pub damping: DampingRule<f64>,
    pub grid: GridParams,
    pub time: TimeParams,
    pub initial: InitialSpec,
    pub output: OutputParams,
    pub audit: AuditParams,
}

impl ExperimentConfig {
    /// Regimes to report, defaulting from the model and damping rule.
    pub fn regimes(&self) -> Vec<Regime> {
        if !self.audit.regimes.is_empty() {
            return self.audit.regimes.clone();
        }
        let mut out = vec![match self.model {
            Model::Nse => Regime::Classical,
            Model::FractionalNse { .. } => Regime::Fractional,
            Model::Stokes { .. } => Regime::Stokes,
        }];
        if self.damping == DampingRule::BetaFromViscosity {
            out.push(Regime::AppendixC);
        }
        out
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>, ConfigError> {
        GridSpec::new(self.grid.box_length, self.grid.n)
            .map_err(|e| ConfigError::new(None, "grid", e.to_string()))
    }

    pub fn sim_config(&self) -> Result<SimConfig<f64>, ConfigError> {
        let grid = self.grid_spec()?;
        let mut sim = SimConfig::new(
            grid,
            self.nu,
            self.damping,
            self.force.ell0,
            self.time.dt_max,
            self.time.t_end,
        );
        sim.alpha = self.model.alpha();
        sim.delta = self.delta;
        sim.epsilon = self.epsilon;
        sim.cfl = self.time.cfl;
        sim.burn_in = self.time.burn_in;
        sim.transport = self.model.transport();
        sim.check_interval = self.time.check_interval;
        sim.initial_condition = match self.initial {
            InitialSpec::Zero => InitialCondition::Zero,
            InitialSpec::RandomLowpass {
                seed,
                energy,
                cutoff,
            } => InitialCondition::RandomLowpass {
                seed,
                energy,
                cutoff,
            },
        };
        Ok(sim)
    }

    /// Cross-field checks that need no force construction.
    pub fn validate(&self) -> Result<(), ConfigError> {
        validate(self, &BTreeMap::new())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table = Table::read(text)?;
        let config = table.build()?;
        validate(&config, &table.lines)?;
        Ok(config)
    }

    /// The file form; [`Self::parse`] reads it back exactly.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "[model]");
        match self.model {
            Model::Nse => {
                let _ = writeln!(w, "kind = nse");
            }
            Model::FractionalNse { alpha } => {
                let _ = writeln!(w, "kind = fractional_nse\nalpha = {alpha}");
            }
            Model::Stokes { alpha } => {
                let _ = writeln!(w, "kind = stokes");
                if let Some(a) = alpha {
                    let _ = writeln!(w, "alpha = {a}");
                }
            }
        }
        let _ = writeln!(
            w,
            "nu = {}\ndelta = {}\nepsilon = {}",
            self.nu, self.delta, self.epsilon
        );
        let _ = writeln!(w, "\n[force]");
        match &self.force.shape {
            ForceShape::BallIndicator { amplitude } => {
                let _ = writeln!(w, "shape = ball\namplitude = {amplitude}");
            }
            ForceShape::Shell {
                amplitude,
                inner,
                outer,
            } => {
                let _ = writeln!(
                    w,
                    "shape = shell\namplitude = {amplitude}\ninner = {inner}\nouter = {outer}"
                );
            }
            ForceShape::CustomRadial { radii, values } => {
                let _ = writeln!(
                    w,
                    "shape = custom\nradii = {}\nvalues = {}",
                    join(radii),
                    join(values)
                );
            }
        }
        let _ = writeln!(w, "ell0 = {}\nc = {}", self.force.ell0, self.force.c);
        let _ = writeln!(w, "\n[damping]");
        match self.damping {
            DampingRule::BetaFromForce => {
                let _ = writeln!(w, "rule = beta_from_force");
            }
            DampingRule::BetaFromViscosity => {
                let _ = writeln!(w, "rule = beta_from_viscosity");
            }
            DampingRule::Explicit(b) => {
                let _ = writeln!(w, "rule = explicit\nbeta = {b}");
            }
        }
        let _ = writeln!(
            w,
            "\n[grid]\nL = {}\nn = {}",
            self.grid.box_length, self.grid.n
        );
        let t = &self.time;
        let cfl = t.cfl.map_or("off".to_string(), |c| c.to_string());
        let _ = writeln!(
            w,
            "\n[time]\ndt_max = {}\ncfl = {cfl}\nt_end = {}\nburn_in = {}\ncheck_interval = {}\nsample_every = {}",
            t.dt_max, t.t_end, t.burn_in, t.check_interval, t.sample_every
        );
        let _ = writeln!(w, "\n[initial]");
        match self.initial {
            InitialSpec::Zero => {
                let _ = writeln!(w, "kind = zero");
            }
            InitialSpec::RandomLowpass {
                seed,
                energy,
                cutoff,
            } => {
                let _ = writeln!(
                    w,
                    "kind = random_lowpass\nseed = {seed}\nenergy = {energy}\ncutoff = {cutoff}"
                );
            }
        }
        let _ = writeln!(
            w,
            "\n[output]\ndirectory = {}\ncheckpoint = {}",
            self.output.directory.display(),
            self.output.checkpoint
        );
        let a = &self.audit;
        let _ = writeln!(w, "\n[audit]");
        if !a.regimes.is_empty() {
            let names: Vec<String> = a.regimes.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(w, "regimes = {}", names.join(", "));
        }
        let _ = writeln!(
            w,
            "threshold = {}\nresidual_tolerance = {}",
            a.threshold, a.residual_tolerance
        );
        if let Some(c) = a.c_const {
            let _ = writeln!(w, "c_const = {c}");
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

const KNOWN: &[(&str, &[&str])] = &[
    ("model", &["kind", "alpha", "nu", "delta", "epsilon"]),
    (
        "force",
        &[
            "shape",
            "amplitude",
            "inner",
            "outer",
            "radii",
            "values",
            "ell0",
            "c",
        ],
    ),
    ("damping", &["rule", "beta"]),
    ("grid", &["L", "n"]),
    (
        "time",
        &[
            "dt_max",
            "cfl",
            "t_end",
            "burn_in",
            "check_interval",
            "sample_every",
        ],
    ),
    ("initial", &["kind", "seed", "energy", "cutoff"]),
    ("output", &["directory", "checkpoint"]),
    (
        "audit",
        &["regimes", "threshold", "residual_tolerance", "c_const"],
    ),
];

/// Raw `section.key → (value, line)` table.
struct Table {
    values: BTreeMap<String, (String, usize)>,
    lines: BTreeMap<String, usize>,
}

impl Table {
    fn read(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        ConfigError::new(Some(line), content, "unterminated section header")
                    })?
                    .trim();
                let known = KNOWN.iter().find(|(s, _)| *s == name);
                section = Some(
                    known
                        .ok_or_else(|| ConfigError::new(Some(line), name, "unknown section"))?
                        .0,
                );
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(line), content, "expected `key = value`"))?;
            let key = key.trim();
            let sec = section
                .ok_or_else(|| ConfigError::new(Some(line), key, "key outside any section"))?;
            let field = format!("{sec}.{key}");
            let keys = KNOWN
                .iter()
                .find(|(s, _)| *s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(ConfigError::new(Some(line), field, "unknown key"));
            }
            if values.contains_key(&field) {
                return Err(ConfigError::new(Some(line), field, "duplicate key"));
            }
            values.insert(field, (value.trim().to_string(), line));
        }
        let lines = values.iter().map(|(k, (_, l))| (k.clone(), *l)).collect();
        Ok(Self { values, lines })
    }

    fn raw(&self, field: &str) -> Option<(&str, usize)> {
        self.values.get(field).map(|(v, l)| (v.as_str(), *l))
    }

    fn require(&self, field: &str) -> Result<(&str, usize), ConfigError> {
        self.raw(field)
            .ok_or_else(|| ConfigError::new(None, field, "missing"))
    }

    fn parse_as<V: std::str::FromStr>(
        &self,
        field: &str,
        text: &str,
        line: usize,
    ) -> Result<V, ConfigError> {
        text.parse()
            .map_err(|_| ConfigError::new(Some(line), field, format!("cannot parse `{text}`")))
    }

    fn number(&self, field: &str) -> Result<f64, ConfigError> {
        let (v, l) = self.require(field)?;
        self.parse_as(field, v, l)
    }

    fn number_or(&self, field: &str, default: f64) -> Result<f64, ConfigError> {
        self.raw(field)
            .map_or(Ok(default), |(v, l)| self.parse_as(field, v, l))
    }

    fn integer_or<V: std::str::FromStr>(&self, field: &str, default: V) -> Result<V, ConfigError> {
        self.raw(field)
            .map_or(Ok(default), |(v, l)| self.parse_as(field, v, l))
    }

    fn list(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        let (v, l) = self.require(field)?;
        v.split(',')
            .map(|x| self.parse_as(field, x.trim(), l))
            .collect()
    }

    /// Rejects a key that has no meaning for the chosen variant.
    fn forbid(&self, field: &str, why: &str) -> Result<(), ConfigError> {
        match self.raw(field) {
            Some((_, l)) => Err(ConfigError::new(Some(l), field, format!("not used {why}"))),
            None => Ok(()),
        }
    }

    fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let (kind, kind_line) = self.require("model.kind")?;
        let model = match kind {
            "nse" => {
                self.forbid("model.alpha", "by kind = nse")?;
                Model::Nse
            }
            "fractional_nse" => Model::FractionalNse {
                alpha: self.number("model.alpha")?,
            },
            "stokes" => Model::Stokes {
                alpha: self
                    .raw("model.alpha")
                    .map(|_| self.number("model.alpha"))
                    .transpose()?,
            },
            other => {
                return Err(ConfigError::new(
                    Some(kind_line),
                    "model.kind",
                    format!("unknown model `{other}`"),
                ))
            }
        };

        let (shape, shape_line) = self.require("force.shape")?;
        let shape = match shape {
            "ball" => {
                for k in ["inner", "outer", "radii", "values"] {
                    self.forbid(&format!("force.{k}"), "by shape = ball")?;
                }
                ForceShape::BallIndicator {
                    amplitude: self.number("force.amplitude")?,
                }
            }
            "shell" => {
                for k in ["radii", "values"] {
                    self.forbid(&format!("force.{k}"), "by shape = shell")?;
                }
                ForceShape::Shell {
                    amplitude: self.number("force.amplitude")?,
                    inner: self.number("force.inner")?,
                    outer: self.number("force.outer")?,
                }
            }
            "custom" => {
                for k in ["amplitude", "inner", "outer"] {
                    self.forbid(&format!("force.{k}"), "by shape = custom")?;
                }
                ForceShape::CustomRadial {
                    radii: self.list("force.radii")?,
                    values: self.list("force.values")?,
                }
            }
            other => {
                return Err(ConfigError::new(
                    Some(shape_line),
                    "force.shape",
                    format!("unknown shape `{other}`"),
                ))
            }
        };
        let force = ForceProfile {
            shape,
            ell0: self.number("force.ell0")?,
            c: self.number("force.c")?,
            alpha: model.alpha().unwrap_or(2.0),
        };

        let (rule, rule_line) = self.require("damping.rule")?;
        let damping = match rule {
            "beta_from_force" => {
                self.forbid("damping.beta", "by rule = beta_from_force")?;
                DampingRule::BetaFromForce
            }
            "beta_from_viscosity" => {
                self.forbid("damping.beta", "by rule = beta_from_viscosity")?;
                DampingRule::BetaFromViscosity
            }
            "explicit" => DampingRule::Explicit(self.number("damping.beta")?),
            other => {
                return Err(ConfigError::new(
                    Some(rule_line),
                    "damping.rule",
                    format!("unknown rule `{other}`"),
                ))
            }
        };

        let grid = GridParams {
            box_length: self.number("grid.L")?,
            n: {
                let (v, l) = self.require("grid.n")?;
                self.parse_as("grid.n", v, l)?
            },
        };

        let cfl = match self.raw("time.cfl") {
            None => Some(DEFAULT_CFL),
            Some(("off", _)) => None,
            Some((v, l)) => Some(self.parse_as("time.cfl", v, l)?),
        };
        let time = TimeParams {
            dt_max: self.number("time.dt_max")?,
            cfl,
            t_end: self.number("time.t_end")?,
            burn_in: self.number_or("time.burn_in", 0.0)?,
            check_interval: self.integer_or("time.check_interval", DEFAULT_CHECK_INTERVAL)?,
            sample_every: self.integer_or("time.sample_every", 1u64)?,
        };

        let initial = match self.raw("initial.kind") {
            None | Some(("zero", _)) => {
                for k in ["seed", "energy", "cutoff"] {
                    self.forbid(&format!("initial.{k}"), "by a zero initial field")?;
                }
                InitialSpec::Zero
            }
            Some(("random_lowpass", _)) => InitialSpec::RandomLowpass {
                seed: {
                    let (v, l) = self.require("initial.seed")?;
                    self.parse_as("initial.seed", v, l)?
                },
                energy: self.number("initial.energy")?,
                cutoff: self.number("initial.cutoff")?,
            },
            Some((other, l)) => {
                return Err(ConfigError::new(
                    Some(l),
                    "initial.kind",
                    format!("unknown initial field `{other}`"),
                ))
            }
        };

        let (dir, _) = self.require("output.directory")?;
        let output = OutputParams {
            directory: PathBuf::from(dir),
            checkpoint: match self.raw("output.checkpoint") {
                None => false,
                Some((v, l)) => self.parse_as("output.checkpoint", v, l)?,
            },
        };

        let regimes = match self.raw("audit.regimes") {
            None => Vec::new(),
            Some((v, l)) => v
                .split(',')
                .map(|r| {
                    parse_regime(r.trim()).ok_or_else(|| {
                        ConfigError::new(
                            Some(l),
                            "audit.regimes",
                            format!("unknown regime `{}`", r.trim()),
                        )
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        let audit = AuditParams {
            regimes,
            threshold: self.number_or("audit.threshold", DEFAULT_THRESHOLD)?,
            residual_tolerance: self
                .number_or("audit.residual_tolerance", DEFAULT_RESIDUAL_TOLERANCE)?,
            c_const: self
                .raw("audit.c_const")
                .map(|_| self.number("audit.c_const"))
                .transpose()?,
        };

        Ok(ExperimentConfig {
            model,
            nu: self.number("model.nu")?,
            delta: self.number_or("model.delta", 0.0)?,
            epsilon: self.number_or("model.epsilon", 0.0)?,
            force,
            damping,
            grid,
            time,
            initial,
            output,
            audit,
        })
    }
}

pub fn parse_regime(s: &str) -> Option<Regime> {
    Some(match s {
        "classical" => Regime::Classical,
        "fractional" => Regime::Fractional,
        "stokes" => Regime::Stokes,
        "appendix_c" => Regime::AppendixC,
        "small_grashof" => Regime::SmallGrashof,
        _ => return None,
    })
}

fn validate(c: &ExperimentConfig, lines: &BTreeMap<String, usize>) -> Result<(), ConfigError> {
    let err = |field: &str, message: String| {
        Err(ConfigError::new(lines.get(field).copied(), field, message))
    };
    let positive = |field: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            err(field, format!("must be positive and finite, got {v}"))
        }
    };
    positive("model.nu", c.nu)?;
    if let Some(a) = c.model.alpha() {
        if !(a > 0.0 && a < 4.0) {
            return err("model.alpha", format!("must lie in (0, 4), got {a}"));
        }
    }
    if !(c.delta >= 0.0) {
        return err(
            "model.delta",
            format!("must be non-negative, got {}", c.delta),
        );
    }
    if !(c.epsilon >= 0.0) {
        return err(
            "model.epsilon",
            format!("must be non-negative, got {}", c.epsilon),
        );
    }
    positive("force.ell0", c.force.ell0)?;
    positive("force.c", c.force.c)?;
    if let Err(e) = c.force.validate() {
        return err("force.shape", e.to_string());
    }
    if let DampingRule::Explicit(b) = c.damping {
        positive("damping.beta", b)?;
    }
    positive("grid.L", c.grid.box_length)?;
    let grid = match GridSpec::new(c.grid.box_length, c.grid.n) {
        Ok(g) => g,
        Err(e) => return err("grid.n", e.to_string()),
    };
    let cutoff = grid.dealias_radius();
    if c.force.radius() > cutoff {
        return err(
            "force.c",
            format!(
                "force cutoff c/ℓ₀ = {} exceeds the dealias cutoff {cutoff} of the grid",
                c.force.radius()
            ),
        );
    }
    positive("time.dt_max", c.time.dt_max)?;
    if let Some(cfl) = c.time.cfl {
        positive("time.cfl", cfl)?;
    }
    positive("time.t_end", c.time.t_end)?;
    if !(c.time.burn_in >= 0.0 && c.time.burn_in < c.time.t_end) {
        return err(
            "time.burn_in",
            format!(
                "must lie in [0, t_end = {}), got {}",
                c.time.t_end, c.time.burn_in
            ),
        );
    }
    if c.time.check_interval == 0 {
        return err("time.check_interval", "must be at least 1".into());
    }
    if c.time.sample_every == 0 {
        return err("time.sample_every", "must be at least 1".into());
    }
    if let InitialSpec::RandomLowpass { energy, cutoff, .. } = c.initial {
        if !(energy >= 0.0) {
            return err(
                "initial.energy",
                format!("must be non-negative, got {energy}"),
            );
        }
        positive("initial.cutoff", cutoff)?;
    }
    if c.output.directory.as_os_str().is_empty() {
        return err("output.directory", "must not be empty".into());
    }
    positive("audit.threshold", c.audit.threshold)?;
    if !(c.audit.residual_tolerance >= 0.0) {
        return err("audit.residual_tolerance", "must be non-negative".into());
    }
    if let Some(k) = c.audit.c_const {
        positive("audit.c_const", k)?;
    }
    for r in c.regimes() {
        match r {
            Regime::AppendixC if c.damping != DampingRule::BetaFromViscosity => {
                return err(
                    "audit.regimes",
                    "appendix_c needs rule = beta_from_viscosity".into(),
                );
            }
            Regime::Fractional => match c.model.alpha() {
                Some(a) if a > 3.0 / 7.0 && a < 3.0 => {}
                other => {
                    return err(
                        "audit.regimes",
                        format!("fractional needs 3/7 < alpha < 3, got {:?}", other),
                    )
                }
            },
            _ => {}
        }
    }
    Ok(())
}
