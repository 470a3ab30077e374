//! Batch Monte Carlo orchestration.
//!
//! Trials are independent: trial `i` of an experiment with master seed `s`
//! draws its noise from the ChaCha8 stream `(s, i)` and owns its state, so
//! results are bit-reproducible and do not depend on the number of worker
//! threads or on scheduling order.

pub mod equivalence;
pub mod export;
pub mod moment_check;
pub mod survival;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::kendall::{
    run_successful, KendallParams, Outcome, PathAudit, StoppingRecord, TraceRecorder, TraceRow,
};
use crate::sde::{
    CouplingBackend, CouplingState, GaussianNoise, NoiseSource, ReducedState, StepEvent, Strategy,
};
use crate::surface::{injectivity_radius, Surface};

pub use equivalence::{equivalence_diagnostic, EquivalenceReport};
pub use moment_check::{validate_moments, MomentCheck, MomentReport, MomentZ};
pub use survival::{default_grid, survival_curve, tv_upper_bound, SurvivalCurve};

/// Which integrator drives the coupled pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// The reduced `(R, A)` diffusion.
    Reduced,
    /// Both points on the embedded surface.
    Manifold,
}

/// What each trial runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One named coupling for the whole run.
    Strategy(Strategy),
    /// The switching controller with restarts.
    Kendall,
}

/// Full description of a batch experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: f64,
    pub mode: Mode,
    pub backend: Backend,
    pub r0: f64,
    pub a0: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// Worker threads; `0` uses all available cores.
    pub jobs: usize,
    /// Controller parameters; `dt`, `t_max`, `delta_r` and `eta` also govern
    /// single-strategy runs.
    pub params: KendallParams,
    /// Time spacing of recorded path rows (when paths are requested).
    pub path_every: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            mode: Mode::Kendall,
            backend: Backend::Reduced,
            r0: 1.0,
            a0: 0.0,
            n_trials: 500,
            seed: 7,
            jobs: 0,
            params: KendallParams::default(),
            path_every: 0.01,
        }
    }
}

impl ExperimentConfig {
    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CouplingError::InvalidParameter(m));
        if self.n_trials < 1 {
            return bad("n_trials must be at least 1".into());
        }
        if !self.k.is_finite() {
            return bad(format!("curvature must be finite, got {}", self.k));
        }
        let p = &self.params;
        if !(p.dt > 0.0 && p.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", p.dt));
        }
        if !(p.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", p.t_max));
        }
        if !(self.path_every > 0.0) {
            return bad(format!("path spacing must be positive, got {}", self.path_every));
        }
        if !self.a0.is_finite() {
            return bad(format!("initial area must be finite, got {}", self.a0));
        }
        let limit = injectivity_radius(self.k);
        if !(self.r0 > 0.0 && self.r0 < limit) {
            return bad(format!("r0 must lie in (0, i(M) = {limit}), got {}", self.r0));
        }
        match self.mode {
            Mode::Kendall => p.validate(self.k),
            Mode::Strategy(s) => {
                if !(p.delta_r > 0.0) {
                    return bad(format!("delta_r must be positive, got {}", p.delta_r));
                }
                if self.k > 0.0 && !(p.eta > 0.0 && p.eta < limit) {
                    return bad(format!("eta must lie in (0, i(M)), got {}", p.eta));
                }
                s.control(self.r0, self.k).map(|_| ())
            }
        }
    }

    fn initial_state(&self) -> Result<Box<dyn TrialState>> {
        Ok(match self.backend {
            Backend::Reduced => Box::new(ReducedState::new(self.k, self.r0, self.a0)?),
            Backend::Manifold => Box::new(CouplingState::at_distance(
                Surface::new(self.k)?,
                self.r0,
                self.a0,
            )?),
        })
    }
}

/// Object-safe union of the two backends.
trait TrialState: CouplingBackend + Send {}
impl<T: CouplingBackend + Send> TrialState for T {}

/// One row of a recorded path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub t: f64,
    pub r: f64,
    pub a: f64,
    pub w: f64,
    pub phase: &'static str,
    pub switch_count: u64,
}

impl From<TraceRow> for PathRow {
    fn from(t: TraceRow) -> Self {
        Self {
            t: t.t,
            r: t.r,
            a: t.a,
            w: t.w,
            phase: t.phase.name(),
            switch_count: t.switch_count,
        }
    }
}

/// The outcome of one trial, with its path when requested.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub record: StoppingRecord,
    pub path: Vec<PathRow>,
}

/// Runs a single named coupling until `R ≤ δ_R` (`Coupled`: the projected
/// motions have met), `R ≥ i(M) − η` (`HitEta`, positive curvature only) or
/// `T_max` (`TimedOut`).
pub fn run_strategy<B: CouplingBackend + ?Sized>(
    state: &mut B,
    strategy: Strategy,
    params: &KendallParams,
    noise: &mut dyn NoiseSource,
    mut path: Option<(&mut Vec<PathRow>, f64)>,
) -> Result<StoppingRecord> {
    let k = state.curvature();
    let r_stop = injectivity_radius(k) - params.eta;
    let mut audit = PathAudit::default();
    let mut next_row = 0.0;
    let mut record_row = |s: &B, force: bool| {
        if let Some((rows, every)) = path.as_mut() {
            if force || s.time() >= next_row {
                let (r, a) = (s.distance(), s.area());
                rows.push(PathRow {
                    t: s.time(),
                    r,
                    a,
                    w: a / (r * r),
                    phase: strategy.name(),
                    switch_count: 0,
                });
                while next_row <= s.time() {
                    next_row += *every;
                }
            }
        }
    };
    let outcome = loop {
        let r = state.distance();
        record_row(state, false);
        if r <= params.delta_r {
            break Outcome::Coupled;
        }
        if k > 0.0 && r >= r_stop {
            break Outcome::HitEta;
        }
        if state.time() >= params.t_max {
            break Outcome::TimedOut;
        }
        let inc = noise.increments(params.dt);
        if state.step(strategy, &inc, params.dt)? != StepEvent::Interior {
            audit.boundary_events += 1;
        }
    };
    record_row(state, true);
    Ok(StoppingRecord {
        outcome,
        tau: state.time(),
        phase_switch_count: 0,
        final_r: state.distance(),
        final_a: state.area(),
        restarts: 0,
        audit,
        diagnostics: Default::default(),
    })
}

/// Runs trial `index` of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, index: u64, keep_path: bool) -> Result<TrialResult> {
    let wrap = |e: CouplingError| CouplingError::Trial {
        index,
        source: Box::new(e),
    };
    let mut state = cfg.initial_state().map_err(wrap)?;
    let mut noise = GaussianNoise::new(cfg.seed, index);
    let mut path = Vec::new();
    let record = match cfg.mode {
        Mode::Strategy(s) => {
            let sink = keep_path.then_some((&mut path, cfg.path_every));
            run_strategy(state.as_mut(), s, &cfg.params, &mut noise, sink)
        }
        Mode::Kendall => {
            let mut trace = TraceRecorder::new(cfg.path_every);
            let rec = run_successful(
                state.as_mut(),
                &cfg.params,
                &mut noise,
                keep_path.then_some(&mut trace),
            );
            path.extend(trace.rows.into_iter().map(PathRow::from));
            rec
        }
    }
    .map_err(wrap)?;
    Ok(TrialResult { record, path })
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CouplingError::InvalidParameter(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Runs all trials of `cfg` in parallel, returning them in trial order.
pub fn run_batch_with_paths(cfg: &ExperimentConfig, keep_paths: bool) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    in_pool(cfg.jobs, || {
        (0..cfg.n_trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, i, keep_paths))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Runs all trials of `cfg` in parallel and returns their stopping records.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<Vec<StoppingRecord>> {
    Ok(run_batch_with_paths(cfg, false)?
        .into_iter()
        .map(|t| t.record)
        .collect())
}

/// Aggregate statistics of a batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_trials: u64,
    pub coupled: u64,
    pub hit_eta: u64,
    pub timed_out: u64,
    pub fraction_coupled: f64,
    /// Mean of `tau` over coupled trials (NaN when none coupled).
    pub mean_tau_coupled: f64,
    pub max_tau_coupled: f64,
    pub mean_switches: f64,
    pub mean_restarts: f64,
    pub total_restarts: u64,
    /// Trials violating the threshold sandwich at tolerance 0.05.
    pub sandwich_violations: u64,
    pub max_entry_dev_fixed: f64,
    pub max_entry_dev_reflection: f64,
    pub max_w_reflection: f64,
    pub fixed_sign_flips: u64,
    pub boundary_events: u64,
    /// Pooled `Σ Δlog R / Σ σ` over reflection phases.
    pub pooled_contraction_rate: f64,
}

/// Tolerance used for the threshold sandwich in summaries.
pub const SANDWICH_TOLERANCE: f64 = 0.05;

/// Summarises a batch (the merge is order independent).
pub fn summarize(records: &[StoppingRecord], params: &KendallParams) -> BatchSummary {
    let n = records.len() as u64;
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count() as u64;
    let coupled: Vec<f64> = records
        .iter()
        .filter(|r| r.outcome == Outcome::Coupled)
        .map(|r| r.tau)
        .collect();
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (s, c) = it.fold((0.0, 0u64), |(s, c), x| (s + x, c + 1));
        s / c as f64
    };
    let max_of = |f: &dyn Fn(&PathAudit) -> f64| {
        records.iter().map(|r| f(&r.audit)).fold(0.0, f64::max)
    };
    let (dk, sig) = records.iter().fold((0.0, 0.0), |(a, b), r| {
        (
            a + r.diagnostics.log_r_change_reflection,
            b + r.diagnostics.sigma_reflection,
        )
    });
    BatchSummary {
        n_trials: n,
        coupled: coupled.len() as u64,
        hit_eta: count(Outcome::HitEta),
        timed_out: count(Outcome::TimedOut),
        fraction_coupled: coupled.len() as f64 / n as f64,
        mean_tau_coupled: mean(&mut coupled.iter().copied()),
        max_tau_coupled: coupled.iter().copied().fold(f64::NAN, f64::max),
        mean_switches: mean(&mut records.iter().map(|r| r.phase_switch_count as f64)),
        mean_restarts: mean(&mut records.iter().map(|r| r.restarts as f64)),
        total_restarts: records.iter().map(|r| r.restarts).sum(),
        sandwich_violations: records
            .iter()
            .filter(|r| !r.audit.sandwich_holds(params, SANDWICH_TOLERANCE))
            .count() as u64,
        max_entry_dev_fixed: max_of(&|a| a.max_entry_dev_fixed),
        max_entry_dev_reflection: max_of(&|a| a.max_entry_dev_reflection),
        max_w_reflection: max_of(&|a| a.max_w_reflection),
        fixed_sign_flips: records.iter().map(|r| r.audit.fixed_sign_flips).sum(),
        boundary_events: records.iter().map(|r| r.audit.boundary_events).sum(),
        pooled_contraction_rate: dk / sig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            n_trials: 8,
            params: KendallParams {
                t_max: 50.0,
                ..KendallParams::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn batch_is_independent_of_worker_count() {
        let cfg = small(Mode::Kendall);
        let a = run_batch(&ExperimentConfig { jobs: 1, ..cfg }).unwrap();
        let b = run_batch(&ExperimentConfig { jobs: 3, ..cfg }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_matches_direct_run() {
        let cfg = ExperimentConfig {
            n_trials: 1,
            ..small(Mode::Kendall)
        };
        let batch = run_batch(&cfg).unwrap();
        let mut s = ReducedState::new(cfg.k, cfg.r0, cfg.a0).unwrap();
        let mut n = GaussianNoise::new(cfg.seed, 0);
        let direct = run_successful(&mut s, &cfg.params, &mut n, None).unwrap();
        assert_eq!(batch[0], direct);
    }

    #[test]
    fn strategy_runs_stop_correctly() {
        let cfg = ExperimentConfig {
            params: KendallParams {
                t_max: 10.0,
                ..KendallParams::default()
            },
            ..small(Mode::Strategy(Strategy::Perverse))
        };
        for r in run_batch(&cfg).unwrap() {
            assert_eq!(r.outcome, Outcome::HitEta);
            assert!(r.final_r >= std::f64::consts::PI - cfg.params.eta);
        }
        let cfg = ExperimentConfig {
            mode: Mode::Strategy(Strategy::FixedDistance),
            ..cfg
        };
        for r in run_batch(&cfg).unwrap() {
            assert_eq!(r.outcome, Outcome::TimedOut);
            assert_eq!(r.final_r, 1.0);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = ExperimentConfig {
            n_trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            k: -1.0,
            mode: Mode::Strategy(Strategy::FixedDistance),
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
