//! One PASS/FAIL line per acceptance criterion, at the stated tolerances.
//! Exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;

use nsaudit::audit::{
    algebraic_regime_sweep, check_fractional_law, check_main_law, main_law_coefficients, SweepGrid,
};
use nsaudit::diagnostics::{appendix_a_ceiling, velocity_ceiling};
use nsaudit::forcing::{
    continuum_norms, grashof, validate_conditions, DampingRule, ForceProfile, DEFAULT_THRESHOLD,
};
use nsaudit::runner::{preset, preset_box, InitialSpec, Model, PresetName, Simulation};
use nsaudit::solver::{
    random_lowpass, stokes_exact, stokes_steady_state, transport_term, SimConfig, Solver, Transport,
};
use nsaudit::spectral::{sobolev_norm, Fft3, GridSpec, SpectralVectorField};

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn section5_profile() -> ForceProfile<f64> {
    ForceProfile::ball(2f64.powf(2.5), 1.0, 0.5)
}

/// Closed-form norms of the small-Grashof force.
fn ac1() -> Outcome {
    let n = continuum_norms(&section5_profile()).unwrap();
    let nu = 2f64.sqrt();
    let l2 = 2.0 * (4.0 * PI / 3.0).sqrt();
    let h = 8.0 * PI.sqrt();
    let gr_exact = (4.0 * PI / 3.0).sqrt();
    let gr = grashof(&n, 1.0, nu);
    let cond = validate_conditions(&section5_profile(), &n, nu, None, DEFAULT_THRESHOLD).unwrap();
    let m2 = cond.margin("m2").unwrap().ratio;
    let checks = [
        rel(n.l2, l2) <= 1e-10,
        rel(n.h_neg1, h) <= 1e-10,
        rel(gr, gr_exact) <= 1e-10,
        (m2 - 1.0).abs() <= 0.01,
    ];
    Outcome {
        pass: checks.iter().all(|&c| c),
        detail: format!(
            "‖f‖ rel err {:.1e}, ‖f‖_Ḣ⁻¹ rel err {:.1e}, Gr rel err {:.1e}, m₂ = {m2:.6} (|m₂-1| = {:.4} vs 0.01)",
            rel(n.l2, l2),
            rel(n.h_neg1, h),
            rel(gr, gr_exact),
            (m2 - 1.0).abs()
        ),
    }
}

fn stokes_config(n: usize, dt: f64, t_end: f64) -> (SimConfig<f64>, ForceProfile<f64>) {
    let grid = GridSpec::new(preset_box(1.0, 0.5), n).unwrap();
    let mut cfg = SimConfig::new(
        grid,
        2f64.sqrt(),
        DampingRule::BetaFromForce,
        1.0,
        dt,
        t_end,
    );
    cfg.transport = Transport::Disabled;
    (cfg, section5_profile())
}

/// Integrating-factor steps against the closed-form damped Stokes flow.
fn ac2() -> Outcome {
    let (mut cfg, profile) = stokes_config(32, 1.0, 1.0);
    let probe = Solver::new(cfg.clone(), &profile).unwrap();
    let beta = probe.beta();
    cfg.dt = 0.05 / beta;
    cfg.cfl = None;
    let u0 = random_lowpass(&cfg.grid, 11, 5.0, 1.0);
    cfg.initial_condition = nsaudit::solver::InitialCondition::Explicit(u0.clone());
    let mut solver = Solver::new(cfg.clone(), &profile).unwrap();
    let mut state = solver.initial_state();
    let mut worst: f64 = 0.0;
    let steps = 10_000;
    for s in 1..=steps {
        solver.step(&mut state).unwrap();
        if s % 500 == 0 {
            let exact = stokes_exact(&u0, solver.force(), cfg.nu, beta, state.t);
            worst = worst.max(state.u.relative_distance(&exact));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!(
            "max relative L² error over {steps} steps (sampled every 500) = {worst:.2e}"
        ),
    }
}

/// `max_t |R(t)|` of a damped Stokes run started from rest over `20/β`, and the scale `h²/(νβ)`.
fn stokes_residual(beta_dt: f64) -> (f64, f64) {
    let mut c = preset(PresetName::StokesDemo, None).unwrap();
    c.grid.n = 32;
    c.audit.regimes = vec![];
    c.time.burn_in = 0.0;
    let beta = Simulation::prepare(&c).unwrap().solver().beta();
    c.time.dt_max = beta_dt / beta;
    let mut sim = Simulation::prepare(&c).unwrap();
    sim.run().unwrap();
    let worst = sim
        .ledger()
        .residuals()
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let scale = sim.dual_norm().powi(2) / (c.nu * beta);
    (worst, scale)
}

/// Energy equality of the Stokes flow and second-order quadrature.
fn ac3() -> Outcome {
    let beta_dt = 1e-3;
    let (r1, scale) = stokes_residual(beta_dt);
    let (r2, _) = stokes_residual(beta_dt / 2.0);
    let ratio = r1 / r2;
    let bound = 1e-8 * scale;
    Outcome {
        pass: r2 <= bound && r1 <= bound && (ratio - 4.0).abs() <= 0.3 * 4.0,
        detail: format!(
            "βdt = {beta_dt}: max|R| = {r1:.3e}, βdt/2: {r2:.3e}, bound 1e-8·h²/(νβ) = {bound:.3e}, halving ratio {ratio:.3}"
        ),
    }
}

/// `⟨transport(u), u⟩ = 0` on random dealiased fields.
fn ac4() -> Outcome {
    let grid = GridSpec::<f64>::new(2.0 * PI, 32).unwrap();
    let fft = Fft3::new(32);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let u = random_lowpass(&grid, seed, 1.0, 1e9);
        let t = transport_term(&u, 0.0, &fft);
        let scale = u.energy().sqrt() * sobolev_norm(&u, 1.0);
        worst = worst.max(t.inner(&u).abs() / scale);
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max |⟨T(u),u⟩|/(‖u‖‖u‖_Ḣ¹) over 100 fields = {worst:.2e}"),
    }
}

/// Direct evaluation of `P ½[(u·∇)u + ∇·(u⊗u)]` by summing over all kept mode pairs.
fn convolution_oracle(u: &SpectralVectorField<f64>) -> SpectralVectorField<f64> {
    let grid = u.grid().clone();
    let dk = grid.dk();
    let factor = (2.0 * PI).powf(-1.5) * dk.powi(3);
    let kept: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.keeps(grid.lattice(i)))
        .collect();
    let mut out = SpectralVectorField::zeros(grid.clone());
    let index_of = |m: [i64; 3]| {
        grid.flat(
            grid.storage_index(m[0]),
            grid.storage_index(m[1]),
            grid.storage_index(m[2]),
        )
    };
    for &ip in &kept {
        let mp = grid.lattice(ip);
        let p = grid.wavevector(ip);
        let up = u.at(ip);
        for &iq in &kept {
            let mq = grid.lattice(iq);
            let m = [mp[0] + mq[0], mp[1] + mq[1], mp[2] + mq[2]];
            if !grid.keeps(m) {
                continue;
            }
            let q = grid.wavevector(iq);
            let uq = u.at(iq);
            let k = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            let target = index_of(m);
            let mut v = out.at(target);
            // (u·∇)u: u_j(p) · i q_j u_i(q); ∇·(u⊗u): i k_j u_j(p) u_i(q).
            let a: Complex<f64> = (0..3).map(|j| up[j] * q[j]).sum();
            let b: Complex<f64> = (0..3).map(|j| up[j] * k[j]).sum();
            for i in 0..3 {
                v[i] += Complex::<f64>::i() * (a + b) * uq[i] * (0.5 * factor);
            }
            out.set(target, v);
        }
    }
    nsaudit::spectral::leray_project(&out)
}

fn ac5() -> Outcome {
    let grid = GridSpec::<f64>::new(2.0 * PI, 8).unwrap();
    let fft = Fft3::new(8);
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let u = random_lowpass(&grid, 100 + seed, 3.0, 1e9);
        let fast = transport_term(&u, 0.0, &fft);
        let slow = convolution_oracle(&u);
        let mut diff = fast.clone();
        diff.axpy(-1.0, &slow);
        worst = worst.max(diff.max_abs() / slow.max_abs());
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max relative coefficient difference over 20 fields on 8³ = {worst:.2e}"),
    }
}

/// Ceilings on the full damped run of the large-length-scale preset.
fn ac6() -> Outcome {
    let c = preset(PresetName::Theorem31Demo, None).unwrap();
    let mut sim = Simulation::prepare(&c).unwrap();
    if let Err(e) = sim.run() {
        return Outcome {
            pass: false,
            detail: format!("run failed: {e}"),
        };
    }
    let avg = sim.averages().unwrap();
    let norms = sim.solver().force_norms();
    let beta = sim.solver().beta();
    let slack = 1e-6;
    let g = sim.gronwall_worst_ratio();
    let vc = velocity_ceiling(norms, c.nu, beta, c.force.ell0);
    let ec = appendix_a_ceiling(norms, c.nu, c.force.ell0);
    let u2 = avg.velocity * avg.velocity;
    Outcome {
        pass: g <= 1.0 + slack && u2 <= vc + slack && avg.dissipation_rate <= ec + slack,
        detail: format!(
            "{} steps to t = {:.4}: max ‖u‖²/ceiling = {g:.4}, U² = {u2:.4e} ≤ {vc:.4e}, ℰ = {:.4e} ≤ {ec:.4e}",
            sim.state().step_index,
            sim.state().t,
            avg.dissipation_rate
        ),
    }
}

fn ac7() -> Outcome {
    let s = algebraic_regime_sweep(&SweepGrid::default());
    Outcome {
        pass: s.points == 10_000 && s.counterexamples.is_empty(),
        detail: format!(
            "{} points, hypotheses held {:?}, {} counterexamples{}",
            s.points,
            s.hypotheses_held,
            s.counterexamples.len(),
            s.counterexamples
                .first()
                .map(|c| format!(", first: {c:?}"))
                .unwrap_or_default()
        ),
    }
}

/// α = 2 fractional run against the classical run, bit for bit.
fn ac8() -> Outcome {
    let mut classical = preset(PresetName::Section5, None).unwrap();
    classical.grid.n = 24;
    classical.grid.box_length = 30.0;
    let mut fractional = classical.clone();
    fractional.model = Model::FractionalNse { alpha: 2.0 };
    fractional.force.alpha = 2.0;
    let mut a = Simulation::prepare(&classical).unwrap();
    let mut b = Simulation::prepare(&fractional).unwrap();
    let until = 2.0 / a.solver().beta();
    a.advance_to(until).unwrap();
    b.advance_to(until).unwrap();
    let same_records = a.ledger().records() == b.ledger().records();
    let same_state = a.state() == b.state();
    let steps = a.state().step_index;
    let (u, e, ell0, nu, gr) = (0.7, 0.3, 1.0, 2f64.sqrt(), 2.0);
    let main = check_main_law(u, e, ell0, nu, gr);
    let frac = check_fractional_law(u, e, ell0, nu, gr, 2.0).unwrap();
    let coincide = ["lower_sharp", "lower_intermediate", "upper_intermediate"]
        .iter()
        .all(|n| {
            let x = main
                .iter()
                .find(|m| m.name == format!("main_law.{n}"))
                .unwrap();
            let y = frac
                .iter()
                .find(|m| m.name == format!("fractional_law.{n}"))
                .unwrap();
            x.lhs == y.lhs && x.rhs == y.rhs
        });
    Outcome {
        pass: same_records && same_state && coincide && steps > 0,
        detail: format!("{steps} steps: records identical {same_records}, final state identical {same_state}, coefficients coincide {coincide}"),
    }
}

/// Kolmogorov bounds on the exact steady Stokes state of the small-Grashof force.
fn ac9() -> Outcome {
    let tol = 0.01;
    let c = preset(PresetName::StokesDemo, None).unwrap();
    let sim = Simulation::prepare(&c).unwrap();
    let solver = sim.solver();
    let (nu, beta, ell0) = (c.nu, solver.beta(), c.force.ell0);
    let us = stokes_steady_state(solver.force(), nu, beta);
    let l3 = ell0.powi(3);
    let u = (us.energy() / l3).sqrt();
    let e = nu * sobolev_norm(&us, 1.0).powi(2) / l3;
    let ratio = e / (u.powi(3) / ell0);
    let (lo, hi) = main_law_coefficients(1.0, 2f64.sqrt(), (4.0 * PI / 3.0).sqrt());
    let coefficients_match = (lo - 0.75).abs() <= 0.01 && (hi - 1601.0 / 160.0).abs() <= 1e-3;
    let lower = 0.75 * (1.0 - tol) * u.powi(3) / ell0 <= e;
    let upper = e <= 10.1 * u.powi(3) / ell0;
    Outcome {
        pass: lower && upper && coefficients_match,
        detail: format!(
            "β = {beta:.4}, U = {u:.5}, ℰ = {e:.5}, ℰℓ₀/U³ = {ratio:.4} (need ≥ {:.4}: {lower}; ≤ 10.1: {upper}); coefficients {lo:.5}, {hi:.5} vs 3/4, 1601/160: {coefficients_match}",
            0.75 * (1.0 - tol)
        ),
    }
}

/// The turbulent regime itself is out of reach; the substitute property suite
/// is the set of criteria above plus the reported (ungated) lemma-chain margins.
fn ac10() -> Outcome {
    let mut c = preset(PresetName::Theorem31Demo, None).unwrap();
    c.grid.n = 24;
    c.initial = InitialSpec::Zero;
    let mut sim = Simulation::prepare(&c).unwrap();
    sim.run().unwrap();
    let report = sim.report(&sim.averages().unwrap()).unwrap();
    let chain: Vec<String> = report
        .entries
        .iter()
        .filter(|e| e.name.starts_with("lemma_chain."))
        .map(|e| format!("{} margin {:.3e}", e.name, e.margin))
        .collect();
    let residual = report
        .entry("energy_inequality.residual")
        .map(|e| e.satisfied)
        .unwrap_or(false);
    Outcome {
        pass: chain.len() == 3 && residual,
        detail: format!(
            "turbulent regime (Gr ≫ 1, ℓ₀ ≫ 1) not reproducible at desk scale; substitutes: energy inequality direction {residual}, lemma chain reported [{}]",
            chain.join("; ")
        ),
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "small-Grashof closed forms", ac1),
        ("AC2", "Stokes oracle", ac2),
        ("AC3", "Stokes energy equality", ac3),
        ("AC4", "transport neutrality", ac4),
        ("AC5", "convolution oracle", ac5),
        ("AC6", "ceiling monitors", ac6),
        ("AC7", "algebraic sweep", ac7),
        ("AC8", "fractional reduction", ac8),
        ("AC9", "Stokes Kolmogorov law at small Gr", ac9),
        ("AC10", "turbulent regime substitute", ac10),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC"))
        .collect();
    let mut failed = 0;
    for (id, title, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{id} {} {title}: {} [{:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
