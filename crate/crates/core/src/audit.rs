//! Closed-form inequalities evaluated on measured and exact run quantities,
//! plus a brute-force sweep over the purely algebraic implications between
//! the hypotheses.
//!
//! Every entry is `lhs ≤ rhs` and is a pure function of the named inputs
//! stored next to it, so a saved report can be re-checked from its own numbers.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::DampingRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("input `{key}` recorded twice with different values ({old} and {new})")]
    ConflictingInput { key: String, old: f64, new: f64 },
    #[error("fractional exponent {0} outside the certified range (3/7, 3)")]
    AlphaOutOfRange(f64),
    #[error("this check needs the damping rule β = ν/ℓ₀²")]
    WrongDampingRule,
    #[error("unknown entry group `{0}`")]
    UnknownGroup(String),
    #[error("non-finite input `{0}`")]
    NonFinite(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Classical,
    /// The exponent is carried in the inputs under `alpha`.
    Fractional,
    Stokes,
    AppendixC,
    SmallGrashof,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Classical => "classical",
            Regime::Fractional => "fractional",
            Regime::Stokes => "stokes",
            Regime::AppendixC => "appendix_c",
            Regime::SmallGrashof => "small_grashof",
        };
        f.write_str(s)
    }
}

/// `lhs ≤ rhs`, with `margin = rhs - lhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    pub note: String,
}

/// Relative gap under which an entry is flagged as sitting on its equality edge.
pub const EDGE_TOLERANCE: f64 = 1e-12;

impl BoundEntry {
    fn new(name: String, lhs: f64, rhs: f64, note: impl Into<String>) -> Self {
        let margin = rhs - lhs;
        let mut note = note.into();
        if margin.abs() <= EDGE_TOLERANCE * lhs.abs().max(rhs.abs()) {
            if !note.is_empty() {
                note.push_str("; ");
            }
            note.push_str("equality edge");
        }
        Self {
            name,
            lhs,
            rhs,
            satisfied: lhs <= rhs,
            margin,
            note,
        }
    }
}

/// Families of entries, each computed from a fixed set of inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    LemmaChain,
    MainLaw,
    FractionalLaw,
    AppendixC,
    Ceilings,
    EnergyInequality,
    SmallGrashof,
}

impl Group {
    pub const ALL: [Group; 7] = [
        Group::LemmaChain,
        Group::MainLaw,
        Group::FractionalLaw,
        Group::AppendixC,
        Group::Ceilings,
        Group::EnergyInequality,
        Group::SmallGrashof,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Group::LemmaChain => "lemma_chain",
            Group::MainLaw => "main_law",
            Group::FractionalLaw => "fractional_law",
            Group::AppendixC => "appendix_c",
            Group::Ceilings => "ceilings",
            Group::EnergyInequality => "energy_inequality",
            Group::SmallGrashof => "small_grashof",
        }
    }

    /// Names of the inputs [`Self::evaluate`] reads.
    pub fn input_names(self) -> &'static [&'static str] {
        match self {
            Group::LemmaChain => &["F", "U", "ell0", "alpha", "threshold"],
            Group::MainLaw => &["U", "E", "ell0", "nu", "Gr"],
            Group::FractionalLaw => &["U", "E_alpha", "ell0", "nu", "Gr", "alpha"],
            Group::AppendixC => &["U", "E", "F", "ell0", "Gr", "Re", "c_const"],
            Group::Ceilings => &[
                "U",
                "E",
                "ell0",
                "nu",
                "beta",
                "h_dual",
                "slack",
                "gronwall_worst_ratio",
            ],
            Group::EnergyInequality => &["residual_min", "residual_tolerance"],
            Group::SmallGrashof => &["ell0", "nu", "Gr_continuum"],
        }
    }

    pub fn from_prefix(p: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.prefix() == p)
    }

    /// Entries of this group from `inputs`.
    pub fn evaluate(self, inputs: &BTreeMap<String, f64>) -> Result<Vec<BoundEntry>, AuditError> {
        let get = |k: &str| {
            inputs
                .get(k)
                .copied()
                .ok_or_else(|| AuditError::MissingInput(k.to_string()))
        };
        let name = |n: &str| format!("{}.{}", self.prefix(), n);
        Ok(match self {
            Group::LemmaChain => {
                let (f, u, ell0, alpha, k) = (
                    get("F")?,
                    get("U")?,
                    get("ell0")?,
                    get("alpha")?,
                    get("threshold")?,
                );
                let strong = if f >= k { "large" } else { "not large" };
                vec![
                    BoundEntry::new(
                        name("force_exceeds_one"),
                        1.0,
                        f,
                        format!("F = {f}; {strong} against K = {k}"),
                    ),
                    BoundEntry::new(name("force_below_velocity"), f, u, ""),
                    BoundEntry::new(
                        name("velocity_below_force_power"),
                        u,
                        f.powf(1.5) * ell0.powf(alpha - 1.0),
                        "rhs = F^{3/2} ℓ₀^{α-1}",
                    ),
                ]
            }
            Group::MainLaw => {
                let (u, e, ell0, nu, gr) =
                    (get("U")?, get("E")?, get("ell0")?, get("nu")?, get("Gr")?);
                let scale = u.powi(3) / ell0;
                let (lo, hi) = main_law_coefficients(ell0, nu, gr);
                vec![
                    BoundEntry::new(name("lower_sharp"), 0.5 * scale, e, "½ U³/ℓ₀ ≤ ℰ"),
                    BoundEntry::new(name("upper_sharp"), e, 10.1 * scale, "ℰ ≤ (101/10) U³/ℓ₀"),
                    BoundEntry::new(
                        name("lower_intermediate"),
                        lo * scale,
                        e,
                        format!("coefficient 1 - ℓ₀⁴/(ν²Gr) = {lo}"),
                    ),
                    BoundEntry::new(
                        name("upper_intermediate"),
                        e,
                        hi * scale,
                        format!("coefficient 10 + ℓ₀⁸/(10ν⁴Gr²) = {hi}"),
                    ),
                ]
            }
            Group::FractionalLaw => {
                let (u, e, ell0, nu, gr, alpha) = (
                    get("U")?,
                    get("E_alpha")?,
                    get("ell0")?,
                    get("nu")?,
                    get("Gr")?,
                    get("alpha")?,
                );
                check_certified_alpha(alpha)?;
                let scale = u.powi(3) / ell0.powf(alpha - 1.0);
                let (lo, hi) = fractional_law_coefficients(ell0, nu, gr, alpha);
                let hyp = ell0.powf(alpha + 2.0) / (nu * nu * gr);
                vec![
                    BoundEntry::new(name("lower_sharp"), 0.5 * scale, e, "½ U³/ℓ₀^{α-1} ≤ ℰ_α"),
                    BoundEntry::new(
                        name("upper_sharp"),
                        e,
                        401.0 / 40.0 * scale,
                        "ℰ_α ≤ (401/40) U³/ℓ₀^{α-1}",
                    ),
                    BoundEntry::new(name("hypothesis"), hyp, 0.5, "ℓ₀^{α+2}/(ν²Gr) ≤ ½"),
                    BoundEntry::new(
                        name("lower_intermediate"),
                        lo * scale,
                        e,
                        format!("coefficient 1 - ℓ₀^{{α+2}}/(ν²Gr) = {lo}"),
                    ),
                    BoundEntry::new(
                        name("upper_intermediate"),
                        e,
                        hi * scale,
                        format!("coefficient 10 + ℓ₀^{{2α+4}}/(10ν⁴Gr²) = {hi}"),
                    ),
                ]
            }
            Group::AppendixC => {
                let (u, e, f, ell0, gr, re, c) = (
                    get("U")?,
                    get("E")?,
                    get("F")?,
                    get("ell0")?,
                    get("Gr")?,
                    get("Re")?,
                    get("c_const")?,
                );
                vec![
                    BoundEntry::new(name("hypothesis"), 2.0 * gr, re, "2Gr ≤ Re"),
                    BoundEntry::new(name("dissipation_below_force_velocity"), e, f * u, "ℰ ≤ FU"),
                    BoundEntry::new(
                        name("force_bound"),
                        f,
                        c * (1.0 / gr + 1.0) * u * u / ell0,
                        format!("F ≤ c (1/Gr + 1) U²/ℓ₀ with calibrated c = {c}"),
                    ),
                ]
            }
            Group::Ceilings => {
                let (u, e, ell0, nu, beta, h, slack, worst) = (
                    get("U")?,
                    get("E")?,
                    get("ell0")?,
                    get("nu")?,
                    get("beta")?,
                    get("h_dual")?,
                    get("slack")?,
                    get("gronwall_worst_ratio")?,
                );
                let l3 = ell0.powi(3);
                vec![
                    BoundEntry::new(name("gronwall"), worst, 1.0 + slack, "max_t ‖u(t)‖² / (e^{-βt}‖u₀‖² + h²/(νβ)), h the dual norm of the dissipation"),
                    BoundEntry::new(name("velocity"), u * u, h * h / (nu * beta * l3) + slack, "U² ≤ h²/(νβℓ₀³)"),
                    BoundEntry::new(name("dissipation"), e, h * h / (nu * l3) + slack, "ℰ ≤ h²/(νℓ₀³)"),
                ]
            }
            Group::EnergyInequality => {
                let (rmin, tol) = (get("residual_min")?, get("residual_tolerance")?);
                vec![BoundEntry::new(
                    name("residual"),
                    -rmin,
                    tol,
                    "-min_t R(t) ≤ tolerance",
                )]
            }
            Group::SmallGrashof => {
                // Closed-form Grashof number of the unprojected profile, against
                // the rounded coefficients 3/4 and 1601/160.
                let (ell0, nu, gr) = (get("ell0")?, get("nu")?, get("Gr_continuum")?);
                let (lo, hi) = main_law_coefficients(ell0, nu, gr);
                vec![
                    BoundEntry::new(
                        name("hypothesis"),
                        ell0.powi(4) / (nu * nu * gr),
                        0.5,
                        "ℓ₀⁴/(ν²Gr) ≤ ½",
                    ),
                    BoundEntry::new(name("lower_coefficient"), 0.75, lo, "3/4 ≤ 1 - ℓ₀⁴/(ν²Gr)"),
                    BoundEntry::new(
                        name("upper_coefficient"),
                        hi,
                        1601.0 / 160.0,
                        "10 + ℓ₀⁸/(10ν⁴Gr²) ≤ 1601/160",
                    ),
                ]
            }
        })
    }
}

fn check_certified_alpha(alpha: f64) -> Result<(), AuditError> {
    if alpha > 3.0 / 7.0 && alpha < 3.0 {
        Ok(())
    } else {
        Err(AuditError::AlphaOutOfRange(alpha))
    }
}

/// `(1 - ℓ₀⁴/(ν²Gr), 10 + ℓ₀⁸/(10ν⁴Gr²))`.
pub fn main_law_coefficients(ell0: f64, nu: f64, gr: f64) -> (f64, f64) {
    let x = ell0.powi(4) / (nu * nu * gr);
    (1.0 - x, 10.0 + x * x / 10.0)
}

/// `(1 - ℓ₀^{α+2}/(ν²Gr), 10 + ℓ₀^{2α+4}/(10ν⁴Gr²))`.
pub fn fractional_law_coefficients(ell0: f64, nu: f64, gr: f64, alpha: f64) -> (f64, f64) {
    let x = ell0.powf(alpha + 2.0) / (nu * nu * gr);
    (1.0 - x, 10.0 + x * x / 10.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub entries: Vec<BoundEntry>,
    pub inputs: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            entries: Vec::new(),
            inputs: BTreeMap::new(),
        }
    }

    /// Records `inputs` and appends the entries of `group`.
    pub fn add(&mut self, group: Group, inputs: &[(&str, f64)]) -> Result<(), AuditError> {
        for &(k, v) in inputs {
            if !v.is_finite() {
                return Err(AuditError::NonFinite(k.to_string()));
            }
            match self.inputs.get(k) {
                Some(&old) if old.to_bits() != v.to_bits() => {
                    return Err(AuditError::ConflictingInput {
                        key: k.to_string(),
                        old,
                        new: v,
                    })
                }
                _ => {
                    self.inputs.insert(k.to_string(), v);
                }
            }
        }
        let entries = group.evaluate(&self.inputs)?;
        self.entries.extend(entries);
        Ok(())
    }

    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn single(group: Group, inputs: &[(&str, f64)]) -> Result<Vec<BoundEntry>, AuditError> {
    let map = inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    group.evaluate(&map)
}

/// `1 ≪ F ≤ U ≤ F^{3/2} ℓ₀^{α-1}`; "≫" is reported against `threshold`.
pub fn check_lemma_chain(f: f64, u: f64, ell0: f64, alpha: f64, threshold: f64) -> Vec<BoundEntry> {
    single(
        Group::LemmaChain,
        &[
            ("F", f),
            ("U", u),
            ("ell0", ell0),
            ("alpha", alpha),
            ("threshold", threshold),
        ],
    )
    .expect("all inputs supplied")
}

/// Sharp and Grashof-dependent forms of `c₁ U³/ℓ₀ ≤ ℰ ≤ c₂ U³/ℓ₀`.
pub fn check_main_law(u: f64, e: f64, ell0: f64, nu: f64, gr: f64) -> Vec<BoundEntry> {
    single(
        Group::MainLaw,
        &[("U", u), ("E", e), ("ell0", ell0), ("nu", nu), ("Gr", gr)],
    )
    .expect("all inputs supplied")
}

pub fn check_fractional_law(
    u: f64,
    e_alpha: f64,
    ell0: f64,
    nu: f64,
    gr: f64,
    alpha: f64,
) -> Result<Vec<BoundEntry>, AuditError> {
    single(
        Group::FractionalLaw,
        &[
            ("U", u),
            ("E_alpha", e_alpha),
            ("ell0", ell0),
            ("nu", nu),
            ("Gr", gr),
            ("alpha", alpha),
        ],
    )
}

#[allow(clippy::too_many_arguments)]
pub fn check_appendix_c(
    u: f64,
    e: f64,
    f: f64,
    ell0: f64,
    gr: f64,
    re: f64,
    c_const: f64,
    rule: DampingRule<f64>,
) -> Result<Vec<BoundEntry>, AuditError> {
    if rule != DampingRule::BetaFromViscosity {
        return Err(AuditError::WrongDampingRule);
    }
    single(
        Group::AppendixC,
        &[
            ("U", u),
            ("E", e),
            ("F", f),
            ("ell0", ell0),
            ("Gr", gr),
            ("Re", re),
            ("c_const", c_const),
        ],
    )
}

/// Smallest `c` with `F ≤ c (1/Gr + 1) U²/ℓ₀` on every run `(F, U, Gr, ℓ₀)`,
/// rounded up by a few ulps so re-evaluating the bound on the calibrating runs
/// cannot land one rounding step above.
pub fn calibrate_appendix_c(runs: &[(f64, f64, f64, f64)]) -> f64 {
    let c = runs
        .iter()
        .map(|&(f, u, gr, ell0)| f * ell0 / ((1.0 / gr + 1.0) * u * u))
        .fold(0.0, f64::max);
    c * (1.0 + 8.0 * f64::EPSILON)
}

/// Outcome of re-deriving a report's entries from its inputs.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Reverification {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl Reverification {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recomputes every entry from `report.inputs` and compares bit for bit.
pub fn reverify(report: &BoundReport) -> Reverification {
    let mut out = Reverification::default();
    let mut cache: BTreeMap<&str, Result<Vec<BoundEntry>, AuditError>> = BTreeMap::new();
    for entry in &report.entries {
        out.checked += 1;
        let prefix = entry.name.split('.').next().unwrap_or("");
        let Some(group) = Group::from_prefix(prefix) else {
            out.mismatches.push(format!(
                "{}: {}",
                entry.name,
                AuditError::UnknownGroup(prefix.to_string())
            ));
            continue;
        };
        let fresh = cache
            .entry(group.prefix())
            .or_insert_with(|| group.evaluate(&report.inputs));
        match fresh {
            Err(e) => out.mismatches.push(format!("{}: {e}", entry.name)),
            Ok(list) => match list.iter().find(|e| e.name == entry.name) {
                None => out
                    .mismatches
                    .push(format!("{}: not produced by its group", entry.name)),
                Some(again) => {
                    let same = again.lhs.to_bits() == entry.lhs.to_bits()
                        && again.rhs.to_bits() == entry.rhs.to_bits()
                        && again.satisfied == entry.satisfied
                        && again.margin.to_bits() == entry.margin.to_bits();
                    if !same {
                        out.mismatches.push(format!(
                            "{}: recorded ({}, {}, {}) but inputs give ({}, {}, {})",
                            entry.name,
                            entry.lhs,
                            entry.rhs,
                            entry.satisfied,
                            again.lhs,
                            again.rhs,
                            again.satisfied
                        ));
                    }
                }
            },
        }
    }
    out
}

/// Axes of the algebraic sweep, all log-spaced.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    /// `(min, max, count)` of ℓ₀; must stay ≥ 1.
    pub ell0: (f64, f64, usize),
    pub nu: (f64, f64, usize),
    /// `‖f‖` relative to `K` times the hypothesis power of ℓ₀.
    pub force_ratio: (f64, f64, usize),
    pub alphas: Vec<f64>,
    /// Reading of "≫" as a factor.
    pub threshold: f64,
}

impl Default for SweepGrid {
    /// 10 × 10 × 10 × 10 points, ν over three decades, the force ratio
    /// running through the hypothesis boundary at 1.
    fn default() -> Self {
        Self {
            ell0: (1.0, 100.0, 10),
            nu: (1e-2, 10.0, 10),
            force_ratio: (0.25, 128.0, 10),
            alphas: vec![0.5, 0.75, 0.9, 1.0, 1.25, 1.5, 2.0, 2.5, 2.75, 2.95],
            threshold: 2.0,
        }
    }
}

fn log_space((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub implication: String,
    pub point: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: usize,
    /// Points at which each implication's hypothesis held, in order (i)-(iv).
    pub hypotheses_held: [usize; 4],
    pub counterexamples: Vec<Counterexample>,
}

/// Relative slack on every conclusion, absorbing rounding at equality edges.
pub const SWEEP_SLACK: f64 = 1e-12;

/// Checks on every grid point:
/// (i) `‖f‖ ≥ K ℓ₀^{5/2} ⇒ ℓ₀⁴/(ν²Gr) ≤ ½`;
/// (ii) `‖f‖ ≥ ℓ₀^{5/2} ⇒ ℓ₀⁸/(ν⁴Gr²) ≤ 1`;
/// (iii) `F ≤ U ⇒ Gr ≤ (ℓ₀²/ν) Re`, with `U` a ratio times `F`;
/// (iv) `‖f‖ ≥ K ℓ₀^{p(α)} ⇒ ℓ₀^{α+2}/(ν²Gr) ≤ ½` and `ℓ₀^{2α+4}/(ν⁴Gr²) ≤ ¼`,
/// where `p = 2 - α/2` below α = 1 and `α + 1/2` from there on.
pub fn algebraic_regime_sweep(grid: &SweepGrid) -> SweepReport {
    let ells = log_space(grid.ell0);
    let nus = log_space(grid.nu);
    let ratios = log_space(grid.force_ratio);
    let k = grid.threshold;
    let mut points = Vec::new();
    for &ell0 in &ells {
        for &nu in &nus {
            for &r in &ratios {
                for &alpha in &grid.alphas {
                    points.push((ell0, nu, r, alpha));
                }
            }
        }
    }
    let results: Vec<([bool; 4], Vec<Counterexample>)> = points
        .par_iter()
        .map(|&(ell0, nu, r, alpha)| {
            let mut held = [false; 4];
            let mut bad = Vec::new();
            let point = |f: f64| -> BTreeMap<String, f64> {
                [
                    ("ell0", ell0),
                    ("nu", nu),
                    ("force_ratio", r),
                    ("alpha", alpha),
                    ("l2", f),
                    ("threshold", k),
                ]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b))
                .collect()
            };
            let mut check = |label: &str, lhs: f64, rhs: f64, f: f64| {
                if lhs > rhs * (1.0 + SWEEP_SLACK) {
                    bad.push(Counterexample {
                        implication: label.to_string(),
                        point: point(f),
                        lhs,
                        rhs,
                    });
                }
            };
            let gr = |f: f64| f * ell0.powf(1.5) / (nu * nu);

            let f = r * k * ell0.powf(2.5);
            if f >= k * ell0.powf(2.5) {
                held[0] = true;
                check("(i)", ell0.powi(4) / (nu * nu * gr(f)), 0.5, f);
            }
            if f >= ell0.powf(2.5) {
                held[1] = true;
                check("(ii)", ell0.powi(8) / (nu.powi(4) * gr(f).powi(2)), 1.0, f);
            }
            let force_avg = f / ell0.powf(1.5);
            let u = r * force_avg;
            if force_avg <= u {
                held[2] = true;
                let re = u * ell0 / nu;
                check("(iii)", gr(f), ell0 * ell0 / nu * re, f);
            }
            let p = if alpha < 1.0 {
                2.0 - alpha / 2.0
            } else {
                alpha + 0.5
            };
            let f = r * k * ell0.powf(p);
            if f >= k * ell0.powf(p) {
                held[3] = true;
                let x = ell0.powf(alpha + 2.0) / (nu * nu * gr(f));
                check("(iv).hypothesis", x, 0.5, f);
                check("(iv).upper_coefficient", x * x, 0.25, f);
            }
            (held, bad)
        })
        .collect();
    let mut held = [0usize; 4];
    let mut counterexamples = Vec::new();
    for (h, bad) in results {
        for i in 0..4 {
            held[i] += h[i] as usize;
        }
        counterexamples.extend(bad);
    }
    SweepReport {
        points: points.len(),
        hypotheses_held: held,
        counterexamples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn small_grashof_coefficients() {
        let gr = (4.0 * PI / 3.0).sqrt();
        let (lo, hi) = main_law_coefficients(1.0, 2f64.sqrt(), gr);
        assert!((lo - (1.0 - 1.0 / (2.0 * gr))).abs() < 1e-15);
        assert!((lo - 0.7557).abs() < 1e-4);
        assert!((hi - (10.0 + 3.0 / (160.0 * PI))).abs() < 1e-13);
        assert!((hi - 10.00597).abs() < 1e-5);
        // The rounded Grashof number 2 gives 1601/160.
        let (_, rounded) = main_law_coefficients(1.0, 2f64.sqrt(), 2.0);
        assert!((rounded - 1601.0 / 160.0).abs() < 1e-13);
    }

    #[test]
    fn small_grashof_group_pins_exact_coefficients() {
        let mut r = BoundReport::new(Regime::SmallGrashof);
        r.add(
            Group::SmallGrashof,
            &[
                ("ell0", 1.0),
                ("nu", 2f64.sqrt()),
                ("Gr_continuum", (4.0 * PI / 3.0).sqrt()),
            ],
        )
        .unwrap();
        assert!(r.all_satisfied());
        assert!((r.entry("small_grashof.lower_coefficient").unwrap().rhs - 0.7557).abs() < 1e-4);
        assert!((r.entry("small_grashof.upper_coefficient").unwrap().lhs - 10.00597).abs() < 1e-5);
    }

    #[test]
    fn unit_inputs_satisfy_both_sharp_bounds() {
        let e = check_main_law(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(
            e.iter()
                .find(|x| x.name == "main_law.lower_sharp")
                .unwrap()
                .satisfied
        );
        assert!(
            e.iter()
                .find(|x| x.name == "main_law.upper_sharp")
                .unwrap()
                .satisfied
        );
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn lemma_chain_small_grashof_window() {
        let f = 2.0 * (4.0 * PI / 3.0).sqrt();
        let e = check_lemma_chain(f, 6.0, 1.0, 2.0, 10.0);
        assert_eq!(e.len(), 3);
        assert!(e.iter().all(|x| x.satisfied));
        assert!((e[2].rhs - f.powf(1.5)).abs() < 1e-12);
        assert!(e[0].note.contains("not large"));
        let low = check_lemma_chain(f, 3.0, 1.0, 2.0, 10.0);
        assert!(!low[1].satisfied);
    }

    #[test]
    fn lemma_chain_equality_edges_are_flagged() {
        // F = U = F^{3/2} ℓ₀ with ℓ₀ = F^{-1/2}.
        let f = 4.0;
        let e = check_lemma_chain(f, f, f.powf(-0.5), 2.0, 10.0);
        assert!(e[1].note.contains("equality edge"));
        assert!(e[2].note.contains("equality edge"));
        assert!(e[1].satisfied && e[2].satisfied);
    }

    #[test]
    fn fractional_reduces_to_classical_at_two() {
        let (u, e, ell0, nu, gr) = (2.0, 9.0, 1.7, 0.8, 40.0);
        let classical = check_main_law(u, e, ell0, nu, gr);
        let frac = check_fractional_law(u, e, ell0, nu, gr, 2.0).unwrap();
        for n in ["lower_sharp", "lower_intermediate", "upper_intermediate"] {
            let a = classical
                .iter()
                .find(|x| x.name == format!("main_law.{n}"))
                .unwrap();
            let b = frac
                .iter()
                .find(|x| x.name == format!("fractional_law.{n}"))
                .unwrap();
            assert_eq!(a.lhs, b.lhs, "{n}");
            assert_eq!(a.rhs, b.rhs, "{n}");
        }
        assert_eq!(
            main_law_coefficients(ell0, nu, gr),
            fractional_law_coefficients(ell0, nu, gr, 2.0)
        );
    }

    #[test]
    fn fractional_hypothesis_at_unit_length() {
        let nu = 2f64.sqrt();
        let gr = 3.0;
        let e = check_fractional_law(1.0, 1.0, 1.0, nu, gr, 1.5).unwrap();
        let h = e
            .iter()
            .find(|x| x.name == "fractional_law.hypothesis")
            .unwrap();
        assert!((h.lhs - 1.0 / (nu * nu * gr)).abs() < 1e-15);
        // α = 1: the length scale drops out of U³/ℓ₀^{α-1}.
        let one = check_fractional_law(2.0, 1.0, 5.0, nu, gr, 1.0).unwrap();
        assert_eq!(one[0].lhs, 0.5 * 8.0);
        assert!(check_fractional_law(1.0, 1.0, 1.0, nu, gr, 3.0).is_err());
        assert!(check_fractional_law(1.0, 1.0, 1.0, nu, gr, 0.3).is_err());
    }

    #[test]
    fn appendix_c_requires_viscous_damping() {
        assert_eq!(
            check_appendix_c(
                1.0,
                1.0,
                1.0,
                1.0,
                1.0,
                3.0,
                1.0,
                DampingRule::BetaFromForce
            ),
            Err(AuditError::WrongDampingRule)
        );
        let e = check_appendix_c(
            2.0,
            3.0,
            1.5,
            1.0,
            1.0,
            3.0,
            1.0,
            DampingRule::BetaFromViscosity,
        )
        .unwrap();
        assert_eq!(e.len(), 3);
        assert!(e[0].satisfied);
        assert!(e[1].satisfied);
    }

    #[test]
    fn calibration_is_tight() {
        let runs = [(1.0, 2.0, 3.0, 1.0), (2.0, 1.0, 1.0, 2.0)];
        let c = calibrate_appendix_c(&runs);
        for &(f, u, gr, ell0) in &runs {
            let e = check_appendix_c(u, 0.0, f, ell0, gr, 1e9, c, DampingRule::BetaFromViscosity)
                .unwrap();
            assert!(e[2].satisfied);
        }
        let e = check_appendix_c(
            1.0,
            0.0,
            2.0,
            2.0,
            1.0,
            1e9,
            c,
            DampingRule::BetaFromViscosity,
        )
        .unwrap();
        assert!(e[2].note.contains("equality edge"));
    }

    #[test]
    fn report_round_trips_and_reverifies() {
        let mut r = BoundReport::new(Regime::Classical);
        r.add(
            Group::LemmaChain,
            &[
                ("F", 3.0),
                ("U", 4.0),
                ("ell0", 2.0),
                ("alpha", 2.0),
                ("threshold", 10.0),
            ],
        )
        .unwrap();
        r.add(
            Group::MainLaw,
            &[
                ("U", 4.0),
                ("E", 20.0),
                ("ell0", 2.0),
                ("nu", 0.5),
                ("Gr", 30.0),
            ],
        )
        .unwrap();
        let json = r.to_json();
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(reverify(&back).is_clean());
        assert_eq!(reverify(&back).checked, 7);

        let mut tampered = back.clone();
        tampered.entries[0].rhs += 1.0;
        assert_eq!(reverify(&tampered).mismatches.len(), 1);
        let mut tampered = back;
        tampered.inputs.insert("U".into(), 5.0);
        assert!(!reverify(&tampered).is_clean());
    }

    #[test]
    fn declared_inputs_suffice() {
        for g in Group::ALL {
            let inputs = g
                .input_names()
                .iter()
                .map(|k| (k.to_string(), 1.5))
                .collect();
            let entries = g.evaluate(&inputs).unwrap();
            assert!(entries.iter().all(|e| e.name.starts_with(g.prefix())));
            for k in g.input_names() {
                let mut fewer = inputs.clone();
                fewer.remove(*k);
                assert_eq!(
                    g.evaluate(&fewer),
                    Err(AuditError::MissingInput(k.to_string()))
                );
            }
        }
    }

    #[test]
    fn conflicting_inputs_are_rejected() {
        let mut r = BoundReport::new(Regime::Classical);
        r.add(
            Group::EnergyInequality,
            &[("residual_min", -1e-9), ("residual_tolerance", 1e-6)],
        )
        .unwrap();
        assert!(r.all_satisfied());
        assert!(matches!(
            r.add(
                Group::EnergyInequality,
                &[("residual_min", 0.0), ("residual_tolerance", 1e-6)]
            ),
            Err(AuditError::ConflictingInput { .. })
        ));
        assert!(matches!(
            r.add(Group::MainLaw, &[]),
            Err(AuditError::MissingInput(_))
        ));
    }

    #[test]
    fn default_sweep_is_clean() {
        let s = algebraic_regime_sweep(&SweepGrid::default());
        assert_eq!(s.points, 10_000);
        assert!(
            s.counterexamples.is_empty(),
            "{:?}",
            &s.counterexamples[..s.counterexamples.len().min(3)]
        );
        assert!(s.hypotheses_held.iter().all(|&h| h > 0 && h < 10_000));
    }

    #[test]
    fn sweep_detects_a_too_weak_threshold() {
        let grid = SweepGrid {
            threshold: 1.0,
            ..SweepGrid::default()
        };
        let s = algebraic_regime_sweep(&grid);
        assert!(s.counterexamples.iter().any(|c| c.implication == "(i)"));
    }

    #[test]
    fn boundary_point_of_first_implication_is_exactly_half() {
        let (ell0, nu) = (3.0f64, 0.7f64);
        let f = 2.0 * ell0.powf(2.5);
        let gr = f * ell0.powf(1.5) / (nu * nu);
        assert!((ell0.powi(4) / (nu * nu * gr) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn amplitude_scaling_identities(l2 in 0.1f64..1e3, hneg in 0.1f64..1e3, lam in 0.1f64..10.0,
                                        ell0 in 1.0f64..10.0, nu in 0.1f64..2.0) {
            let m2 = |l: f64, h: f64| ell0.powf(9.0 / 8.0) * h / (nu.sqrt() * l.powf(7.0 / 4.0));
            let gr = |l: f64| l * ell0.powf(1.5) / (nu * nu);
            let f = |l: f64| l / ell0.powf(1.5);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            prop_assert!(rel(f(lam * l2), lam * f(l2)) < 1e-13);
            prop_assert!(rel(gr(lam * l2), lam * gr(l2)) < 1e-13);
            prop_assert!(rel(m2(lam * l2, lam * hneg), lam.powf(-0.75) * m2(l2, hneg)) < 1e-13);
        }

        #[test]
        fn margin_sign_matches_flag(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3) {
            let e = BoundEntry::new("x".into(), lhs, rhs, "");
            prop_assert_eq!(e.satisfied, e.margin >= 0.0);
        }
    }
}
