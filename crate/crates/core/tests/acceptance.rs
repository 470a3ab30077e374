//! Acceptance gate: runs every exit criterion, prints one PASS/FAIL line per
//! criterion and exits with status 1 if any of them fails.
//!
//! Runtime budgets are part of the criteria and are checked against the
//! wall-clock time of each block.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use curved_coupling::harness::{run_batch, summarize, validate_moments, Backend, ExperimentConfig, Mode};
use curved_coupling::kendall::{KendallParams, Outcome, StoppingRecord};
use curved_coupling::lie_group::wrap_fiber;
use curved_coupling::sde::{
    CouplingBackend, CouplingState, GaussianNoise, NoiseSource, ReducedState, Strategy, ZeroNoise,
};
use curved_coupling::surface::Surface;
use curved_coupling::verify::{run_suite, triangle_z_check, Suite, SuiteReport, TolProfile};

const SEED: u64 = 7;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn run(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = v.passed && in_time;
    println!(
        "{} criterion {id:>2} {title}: {} [{:.2}s of {:.0}s{}]",
        if ok { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    ok
}

fn suite_detail(reports: &[SuiteReport]) -> Verdict {
    let checks: Vec<_> = reports.iter().flat_map(|r| r.checks.iter()).collect();
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({:.3e} > {:.1e})", c.name, c.error, c.tolerance))
        .collect();
    let worst = checks
        .iter()
        .map(|c| if c.tolerance > 0.0 { c.error / c.tolerance } else { c.error })
        .fold(0.0, f64::max);
    if failing.is_empty() {
        verdict(true, format!("{} checks, worst error/tolerance {worst:.3}", checks.len()))
    } else {
        verdict(false, format!("failing: {}", failing.join("; ")))
    }
}

/// Zero-noise reduced path of `strategy` from `R = 1` (k = 1) up to `t_end`,
/// returning the distance at every step.
fn zero_noise_path(strategy: Strategy, t_end: f64, dt: f64) -> Vec<f64> {
    let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
    let n = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(s.distance());
    for _ in 0..n {
        let inc = ZeroNoise.increments(dt);
        CouplingBackend::step(&mut s, strategy, &inc, dt).unwrap();
        out.push(s.distance());
    }
    out
}

fn synchronous_closed_form() -> Verdict {
    let path = zero_noise_path(Strategy::Synchronous, 1.0, 1e-4);
    let exact = 2.0 * ((-0.5f64).exp() * 0.5f64.sin()).asin();
    let err = (path.last().unwrap() - exact).abs();
    verdict(err < 5e-3, format!("R(1) = {:.6}, closed form {exact:.6}, error {err:.2e}", path.last().unwrap()))
}

fn perverse_closed_form() -> Verdict {
    let dt = 1e-4;
    let path = zero_noise_path(Strategy::Perverse, 20.0, dt);
    let exact = 2.0 * ((-0.5f64).exp() * 0.5f64.cos()).acos();
    let r1 = path[(1.0 / dt).round() as usize];
    let err = (r1 - exact).abs();
    let monotone = path.windows(2).all(|w| w[1] >= w[0]);
    let gap = PI - path.last().unwrap();
    verdict(
        err < 5e-3 && monotone && gap < 1e-3,
        format!("R(1) = {r1:.6}, closed form {exact:.6}, error {err:.2e}; monotone {monotone}; pi - R(20) = {gap:.2e}"),
    )
}

fn fixed_distance() -> Verdict {
    let dt = 1e-4;
    let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
    let mut noise = GaussianNoise::new(SEED, 0);
    let bits = 1.0f64.to_bits();
    let mut constant = true;
    for _ in 0..1_000_000 {
        let inc = noise.increments(dt);
        CouplingBackend::step(&mut s, Strategy::FixedDistance, &inc, dt).unwrap();
        constant &= s.distance().to_bits() == bits;
    }

    let trials = 10_000u64;
    let steps = (1.0 / dt).round() as usize;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for i in 0..trials {
        let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
        let mut noise = GaussianNoise::new(SEED, 1 + i);
        for _ in 0..steps {
            let inc = noise.increments(dt);
            CouplingBackend::step(&mut s, Strategy::FixedDistance, &inc, dt).unwrap();
        }
        sum += s.area();
        sum2 += s.area() * s.area();
    }
    let n = trials as f64;
    let var = (sum2 - sum * sum / n) / (n - 1.0);
    let exact = 4.0 * 0.5f64.sin().powi(2);
    let rel = (var - exact).abs() / exact;
    verdict(
        constant && rel < 0.05,
        format!("R bit-constant over 1e6 steps: {constant}; Var(A_1) = {var:.4}, target {exact:.4}, rel. error {rel:.3}"),
    )
}

fn qv_slope<B: CouplingBackend>(mut make: impl FnMut() -> B, trials: u64, steps: usize, dt: f64) -> f64 {
    let mut qv = 0.0;
    for i in 0..trials {
        let mut s = make();
        let mut noise = GaussianNoise::new(SEED, i);
        for _ in 0..steps {
            let r = s.distance();
            let inc = noise.increments(dt);
            s.step(Strategy::Reflection, &inc, dt).unwrap();
            qv += (s.distance() - r).powi(2);
        }
    }
    qv / (trials as f64 * steps as f64 * dt)
}

fn reflection_qv() -> Verdict {
    let (trials, steps, dt) = (10_000, 100, 1e-4);
    let surface = Surface::new(1.0).unwrap();
    let manifold = qv_slope(|| CouplingState::at_distance(surface, 1.0, 0.0).unwrap(), trials, steps, dt);
    let reduced = qv_slope(|| ReducedState::new(1.0, 1.0, 0.0).unwrap(), trials, steps, dt);
    let ok = (manifold / 4.0 - 1.0).abs() < 0.05 && (reduced / 4.0 - 1.0).abs() < 0.05;
    verdict(ok, format!("QV slope of R over t in [0, 0.01] from R=1: surface {manifold:.4}, reduced {reduced:.4} (target 4)"))
}

fn triangle_z() -> Verdict {
    let rep = triangle_z_check(1000, SEED);
    let n = rep.n_pairs as f64;
    let ok = rep.max_area_error < 1e-9
        && rep.max_area_error_general < 1e-9
        && rep.sign_matches == rep.n_pairs;
    verdict(
        ok,
        format!(
            "max | |z| - Heron area | = {:.2e} (fibers zero), {:.2e} (general); sign z = sign sin(theta_x - theta_y) on {}/{} pairs; sign z = -sign(theta_x - theta_y) on {:.3} of pairs",
            rep.max_area_error,
            rep.max_area_error_general,
            rep.sign_matches,
            rep.n_pairs,
            rep.opposite_sign_matches as f64 / n
        ),
    )
}

fn generator() -> Verdict {
    let rep = run_suite(Suite::Generator, TolProfile::Default, SEED);
    let zs: Vec<String> = rep.checks.iter().map(|c| format!("{:.2}", c.error)).collect();
    verdict(rep.passed(), format!("|z| = [{}] for 3 test functions (1e6 samples, dt = 1e-4)", zs.join(", ")))
}

fn survival_tail(records: &[StoppingRecord], t_max: f64) -> String {
    let n = records.len() as f64;
    [25.0, 100.0, 400.0]
        .iter()
        .filter(|&&t| t < t_max)
        .map(|&t| {
            let p = records
                .iter()
                .filter(|r| r.outcome != Outcome::Coupled || r.tau > t)
                .count() as f64
                / n;
            format!("P(tau>{t})={p:.3} (sqrt(t)P={:.2})", t.sqrt() * p)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn successful_coupling() -> Verdict {
    let cfg = ExperimentConfig {
        k: 1.0,
        mode: Mode::Kendall,
        backend: Backend::Reduced,
        r0: 1.0,
        a0: 0.0,
        n_trials: 500,
        seed: SEED,
        params: KendallParams::default(),
        ..ExperimentConfig::default()
    };
    let records = run_batch(&cfg).unwrap();
    let s = summarize(&records, &cfg.params);
    let coupled_small_area = records
        .iter()
        .filter(|r| r.outcome == Outcome::Coupled)
        .all(|r| r.final_a.abs() <= cfg.params.kappa * cfg.params.delta_r.powi(2));
    verdict(
        s.coupled == s.n_trials && s.sandwich_violations == 0 && coupled_small_area,
        format!(
            "coupled {}/{} (timed out {}, hit eta {}), sandwich violations {}, |A| <= kappa delta^2 on coupled: {coupled_small_area}; {}",
            s.coupled,
            s.n_trials,
            s.timed_out,
            s.hit_eta,
            s.sandwich_violations,
            survival_tail(&records, cfg.params.t_max)
        ),
    )
}

fn wrapped_variant() -> Verdict {
    // The default levels violate 2π/(π−η)² < κ−ε; κ = 1.5 is the smallest
    // round level satisfying it for ε = 0.25, η = 0.3.
    let default_rejected = KendallParams {
        wrapped: true,
        ..KendallParams::default()
    }
    .validate(1.0)
    .is_err();
    let params = KendallParams {
        kappa: 1.5,
        ..KendallParams::default()
    };
    let base = ExperimentConfig {
        n_trials: 1000,
        seed: SEED,
        params,
        ..ExperimentConfig::default()
    };
    let wrapped_cfg = ExperimentConfig {
        params: KendallParams {
            wrapped: true,
            ..params
        },
        ..base
    };
    let plain = run_batch(&base).unwrap();
    let wrapped = run_batch(&wrapped_cfg).unwrap();
    let censored = |rs: &[StoppingRecord]| {
        rs.iter().map(|r| r.tau.min(params.t_max)).sum::<f64>() / rs.len() as f64
    };
    let (m_plain, m_wrapped) = (censored(&plain), censored(&wrapped));
    let sw = summarize(&wrapped, &wrapped_cfg.params);
    let sp = summarize(&plain, &base.params);
    let invariant = wrapped.iter().all(|r| {
        r.final_a > -2.0 * PI
            && r.final_a <= 2.0 * PI
            && (r.outcome != Outcome::Coupled
                || wrap_fiber(r.final_a).abs() <= params.kappa * params.delta_r.powi(2))
    });
    let ok = default_rejected && m_wrapped <= m_plain && invariant && sw.sandwich_violations == 0;
    verdict(
        ok,
        format!(
            "kappa = 1.5: mean min(tau, T_max) wrapped {m_wrapped:.2} vs unwrapped {m_plain:.2} (coupled {}/{} vs {}/{}); default levels rejected in wrapped mode: {default_rejected}; wrapped area in (-2pi, 2pi] and coupled |A| <= kappa delta^2: {invariant}; sandwich violations {}",
            sw.coupled, sw.n_trials, sp.coupled, sp.n_trials, sw.sandwich_violations
        ),
    )
}

fn backend_moments() -> Verdict {
    let grid = [0.5, 1.0, 2.0];
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    for backend in [Backend::Reduced, Backend::Manifold] {
        for strategy in Strategy::ALL {
            let rep = validate_moments(backend, strategy, 1.0, &grid, 100_000, 1e-4, SEED).unwrap();
            for c in &rep.checks {
                for (name, m) in c.all() {
                    count += 1;
                    if m.z.abs() > worst.0 {
                        worst = (m.z.abs(), format!("{backend:?}/{strategy}/R={}/{name}", c.r));
                    }
                }
            }
        }
    }
    verdict(
        worst.0 <= 3.0,
        format!("{count} one-step statistics, max |z| = {:.2} at {}", worst.0, worst.1),
    )
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        run(1, "synchronous closed form", s(1), synchronous_closed_form),
        run(2, "perverse closed form", s(1), perverse_closed_form),
        run(3, "fixed distance", s(60), fixed_distance),
        run(4, "reflection quadratic variation", s(60), reflection_qv),
        run(5, "distance Hessian oracle", s(10), || {
            suite_detail(&[run_suite(Suite::Hessian, TolProfile::Default, SEED)])
        }),
        run(6, "swept-area oracle", s(30), || {
            suite_detail(&[run_suite(Suite::Area, TolProfile::Default, SEED)])
        }),
        run(7, "Lie-group identities", s(10), || {
            suite_detail(&[
                run_suite(Suite::Bch, TolProfile::Default, SEED),
                run_suite(Suite::Fields, TolProfile::Default, SEED),
            ])
        }),
        run(8, "triangle area and fiber coordinate", s(10), triangle_z),
        run(9, "generator check", s(120), generator),
        run(10, "successful coupling", s(600), successful_coupling),
        run(11, "wrapped variant", s(600), wrapped_variant),
        run(12, "reduced vs surface one-step moments", s(300), backend_moments),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
