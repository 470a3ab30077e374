//! `curved-coupling` command-line driver.
//!
//! Subcommands:
//!
//! * `simulate` — batches of one named coupling strategy;
//! * `kendall` — batches of the switching controller (`--wrapped` for the
//!   SU(2) variant reading the area modulo 4π);
//! * `verify` — the oracle suites;
//! * `moments` — one-step moment validation of a backend;
//! * `diagnose` — the proxy-equivalence diagnostic on SU(2) or SL(2,ℝ).
//!
//! Exit codes: 0 on success, 1 when a check fails (or a run cannot
//! complete), 2 on a usage error (unknown flag, invalid parameter).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use curved_coupling::harness::export::{
    write_records_csv, write_summary_json, write_survival_csv, write_trace_csv,
};
use curved_coupling::harness::{
    default_grid, equivalence_diagnostic, run_batch_with_paths, summarize, survival_curve,
    validate_moments, Backend, ExperimentConfig, Mode,
};
use curved_coupling::kendall::KendallParams;
use curved_coupling::lie_group::GroupKind;
use curved_coupling::sde::Strategy;
use curved_coupling::verify::{run_suite, Suite, TolProfile};
use curved_coupling::CouplingError;

const SEED_ENV: &str = "CURVED_COUPLING_SEED";

#[derive(Parser, Debug)]
#[command(name = "curved-coupling", version, about = "Co-adapted couplings on constant-curvature surfaces and their group lifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run batches of a single coupling strategy.
    Simulate(SimulateArgs),
    /// Run batches of the switching controller.
    Kendall(KendallArgs),
    /// Run the oracle suites.
    Verify(VerifyArgs),
    /// Validate one-step moments of a backend.
    Moments(MomentsArgs),
    /// Compare the Carnot-Carathéodory proxy with geometric functionals.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Curvature of the base surface (default 1, or that of --group).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Group whose base surface is used (su2: k = 1, sl2: k = -1).
    #[arg(long, value_parser = parse_group)]
    group: Option<GroupKind>,
    /// Integrator: reduced (R, A) diffusion or the full surface pair.
    #[arg(long, default_value = "reduced", value_parser = parse_backend)]
    backend: Backend,
    /// Initial distance.
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    /// Initial area.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a0: f64,
    /// Time step.
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// Time horizon.
    #[arg(long, default_value_t = 500.0)]
    t_max: f64,
    /// Number of trials.
    #[arg(long, default_value_t = 500)]
    trials: u64,
    /// Master seed (overridden by CURVED_COUPLING_SEED when set).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Upper switching level for |A|/R².
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Hysteresis of the switching rule.
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Safety margin from the cut locus.
    #[arg(long, default_value_t = 0.3)]
    eta: f64,
    /// Coupling radius for the distance.
    #[arg(long, default_value_t = 1e-3)]
    delta_r: f64,
    /// Time spacing of dumped path rows.
    #[arg(long, default_value_t = 0.01)]
    path_every: f64,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one path file per trial under <out>/paths/.
    #[arg(long)]
    dump_paths: bool,
    /// Print the resolved configuration as JSON before running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Coupling strategy.
    #[arg(long, default_value = "reflection", value_parser = parse_strategy)]
    strategy: Strategy,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct KendallArgs {
    /// Read the area modulo 4π (SU(2) over the unit sphere only).
    #[arg(long)]
    wrapped: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Sample-size profile: default or quick.
    #[arg(long, default_value = "default", value_parser = parse_profile)]
    tol_profile: TolProfile,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory for verify.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// Strategy name or `all`.
    #[arg(long, default_value = "all")]
    strategy: String,
    #[arg(long, default_value = "reduced", value_parser = parse_backend)]
    backend: Backend,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    k: f64,
    /// Comma-separated separations.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    r: Vec<f64>,
    /// One-step samples per separation.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest accepted |z|.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, default_value = "su2", value_parser = parse_group)]
    group: GroupKind,
    /// Number of random pairs.
    #[arg(long, default_value_t = 10_000)]
    pairs: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    print_config: bool,
}

fn parse_group(s: &str) -> Result<GroupKind, String> {
    match s {
        "su2" => Ok(GroupKind::Su2),
        "sl2" => Ok(GroupKind::Sl2),
        _ => Err(format!("unknown group '{s}' (expected su2 or sl2)")),
    }
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    match s {
        "reduced" => Ok(Backend::Reduced),
        "manifold" => Ok(Backend::Manifold),
        _ => Err(format!("unknown backend '{s}' (expected reduced or manifold)")),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

fn parse_profile(s: &str) -> Result<TolProfile, String> {
    s.parse::<TolProfile>().map_err(|e| e.to_string())
}

/// Why a command did not succeed.
enum Failure {
    /// Bad flags or parameters: exit 2.
    Usage(String),
    /// A check failed or a run could not complete: exit 1.
    Failed(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<CouplingError>() {
            Some(c) if is_usage(c) => Failure::Usage(format!("{e:#}")),
            _ => Failure::Failed(format!("{e:#}")),
        }
    }
}

impl From<CouplingError> for Failure {
    fn from(e: CouplingError) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

fn is_usage(e: &CouplingError) -> bool {
    match e {
        CouplingError::InvalidParameter(_) | CouplingError::UnsupportedCurvature { .. } => true,
        CouplingError::Trial { source, .. } => is_usage(source),
        _ => false,
    }
}

type Outcome = Result<(), Failure>;

fn resolve_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(flag),
    }
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).context("serialising configuration")?;
    println!("{text}");
    Ok(())
}

fn resolve_run(run: &RunArgs, mode: Mode, wrapped: bool) -> Result<ExperimentConfig, Failure> {
    let k = match (run.k, run.group) {
        (Some(k), Some(g)) if k != g.base_curvature() => {
            return Err(Failure::Usage(format!(
                "--k {k} contradicts --group {g} (base curvature {})",
                g.base_curvature()
            )))
        }
        (Some(k), _) => k,
        (None, Some(g)) => g.base_curvature(),
        (None, None) => 1.0,
    };
    let cfg = ExperimentConfig {
        k,
        mode,
        backend: run.backend,
        r0: run.r0,
        a0: run.a0,
        n_trials: run.trials,
        seed: resolve_seed(run.seed)?,
        jobs: run.jobs,
        params: KendallParams {
            kappa: run.kappa,
            epsilon: run.epsilon,
            eta: run.eta,
            delta_r: run.delta_r,
            dt: run.dt,
            t_max: run.t_max,
            wrapped,
        },
        path_every: run.path_every,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_artifacts(out: &Path, cfg: &ExperimentConfig, run: &RunArgs, trials: &[curved_coupling::harness::TrialResult]) -> Outcome {
    let records: Vec<_> = trials.iter().map(|t| t.record).collect();
    let summary = summarize(&records, &cfg.params);
    write_records_csv(&out.join("records.csv"), &records)?;
    let curve = survival_curve(&records, &default_grid(&records, 200))?;
    write_survival_csv(&out.join("survival.csv"), &curve)?;
    write_summary_json(&out.join("summary.json"), cfg, &summary)?;
    if run.dump_paths {
        for (i, t) in trials.iter().enumerate() {
            write_trace_csv(&out.join("paths").join(format!("trace_{i:05}.csv")), &t.path)?;
        }
    }
    Ok(())
}

fn batch(run: &RunArgs, mode: Mode, wrapped: bool) -> Outcome {
    let cfg = resolve_run(run, mode, wrapped)?;
    if run.print_config {
        print_json(&cfg)?;
    }
    let keep_paths = run.dump_paths && run.out.is_some();
    let trials = run_batch_with_paths(&cfg, keep_paths)?;
    let records: Vec<_> = trials.iter().map(|t| t.record).collect();
    let s = summarize(&records, &cfg.params);
    println!(
        "trials {}  coupled {}  hit_eta {}  timed_out {}  mean_tau_coupled {:.6}  max_tau_coupled {:.6}",
        s.n_trials, s.coupled, s.hit_eta, s.timed_out, s.mean_tau_coupled, s.max_tau_coupled
    );
    if matches!(mode, Mode::Kendall) {
        println!(
            "restarts {}  mean_switches {:.3}  sandwich_violations {}  pooled_contraction_rate {:.6}",
            s.total_restarts, s.mean_switches, s.sandwich_violations, s.pooled_contraction_rate
        );
    }
    if let Some(out) = &run.out {
        write_artifacts(out, &cfg, run, &trials)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyConfig<'a> {
    suites: &'a [Suite],
    tol_profile: TolProfile,
    seed: u64,
}

fn verify(args: &VerifyArgs) -> Outcome {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse::<Suite>()?]
    };
    let seed = resolve_seed(args.seed)?;
    if args.print_config {
        print_json(&VerifyConfig {
            suites: &suites,
            tol_profile: args.tol_profile,
            seed,
        })?;
    }
    let mut reports = Vec::new();
    for suite in suites {
        let rep = run_suite(suite, args.tol_profile, seed);
        for c in &rep.checks {
            println!(
                "{} [{}] {}: error {:.3e} (tolerance {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                suite,
                c.name,
                c.error,
                c.tolerance
            );
        }
        reports.push(rep);
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).context("creating output directory")?;
        let f = std::fs::File::create(out.join("verify.json")).context("creating verify.json")?;
        serde_json::to_writer_pretty(f, &reports).context("writing verify.json")?;
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.suite.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Failed(format!("failing suites: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct MomentsConfig<'a> {
    strategies: &'a [Strategy],
    backend: Backend,
    k: f64,
    r: &'a [f64],
    samples: u64,
    dt: f64,
    seed: u64,
    z_max: f64,
}

fn moments(args: &MomentsArgs) -> Outcome {
    let strategies: Vec<Strategy> = if args.strategy == "all" {
        Strategy::ALL.iter().copied().filter(|s| s.control(1.0, args.k).is_ok()).collect()
    } else {
        vec![args.strategy.parse::<Strategy>()?]
    };
    if args.samples < 2 || !(args.dt > 0.0) || args.r.is_empty() {
        return Err(Failure::Usage("moments needs --samples ≥ 2, --dt > 0 and a non-empty --r".into()));
    }
    let seed = resolve_seed(args.seed)?;
    if args.print_config {
        print_json(&MomentsConfig {
            strategies: &strategies,
            backend: args.backend,
            k: args.k,
            r: &args.r,
            samples: args.samples,
            dt: args.dt,
            seed,
            z_max: args.z_max,
        })?;
    }
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for s in strategies {
        let rep = validate_moments(args.backend, s, args.k, &args.r, args.samples, args.dt, seed)?;
        for c in &rep.checks {
            let zs: Vec<String> = c.all().iter().map(|(n, m)| format!("{n} {:+.2}", m.z)).collect();
            println!("{} R={}: {}", s, c.r, zs.join("  "));
        }
        worst = worst.max(rep.max_abs_z());
        reports.push(rep);
    }
    println!("max |z| = {worst:.3}");
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).context("creating output directory")?;
        let f = std::fs::File::create(out.join("moments.json")).context("creating moments.json")?;
        serde_json::to_writer_pretty(f, &reports).context("writing moments.json")?;
    }
    if worst > args.z_max {
        Err(Failure::Failed(format!("max |z| = {worst:.3} exceeds {}", args.z_max)))
    } else {
        Ok(())
    }
}

fn diagnose(args: &DiagnoseArgs) -> Outcome {
    let seed = resolve_seed(args.seed)?;
    if args.print_config {
        print_json(&serde_json::json!({ "group": args.group, "pairs": args.pairs, "seed": seed }))?;
    }
    let rep = equivalence_diagnostic(args.group, args.pairs, seed)?;
    println!(
        "{}: proxy/(R²+|A|) in [{:.6}, {:.6}]  proxy/(R²+√|A|) in [{:.6}, {:.6}]",
        rep.kind, rep.ratio_area.min, rep.ratio_area.max, rep.ratio_sqrt_area.min, rep.ratio_sqrt_area.max
    );
    println!(
        "max fiber mismatch {:.3e}  max distance mismatch {:.3e}",
        rep.max_fiber_mismatch, rep.max_distance_mismatch
    );
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).context("creating output directory")?;
        let f = std::fs::File::create(out.join("diagnose.json")).context("creating diagnose.json")?;
        serde_json::to_writer_pretty(f, &rep).context("writing diagnose.json")?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Simulate(a) => batch(&a.run, Mode::Strategy(a.strategy), false),
        Command::Kendall(a) => batch(&a.run, Mode::Kendall, a.wrapped),
        Command::Verify(a) => verify(a),
        Command::Moments(a) => moments(a),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
