//! Switching controller that couples both the distance and the swept area.
//!
//! The controller alternates two couplings according to the normalised area
//! `W = A/R²`:
//!
//! * **Reflection** drives the distance towards zero; it is used while
//!   `|W| < κ`.
//! * **Fixed distance** freezes the distance and lets the area diffuse; it is
//!   used from the moment `|W| ≥ κ` until `|W| ≤ κ − ε`.
//!
//! A run stops when the pair couples (`R ≤ δ_R` during reflection, with
//! `|A| ≤ κ δ_R²`), when the distance reaches `i(M) − η`, or at `T_max`.
//! [`run_successful`] adds the restart loop: after hitting `i(M) − η` it
//! returns to the initial distance with synchronous coupling, cancels the area
//! with fixed-distance coupling, and starts again.  In wrapped mode the area is
//! read modulo `4π` in `(−2π, 2π]`, which on SU(2) is the true fiber
//! coordinate.
//!
//! # Time stepping
//!
//! Steps are Euler–Maruyama steps of length at most `dt`, shortened when
//! needed so that a single step cannot jump across a switching level: in the
//! intrinsic clock `dσ = 4 dt / R²` the increment of `W` has bounded
//! variance, and the step is chosen so that its standard deviation is at most
//! a sixth of the distance to the active level (with a floor), and, during
//! reflection, so that the relative change of `R` has standard deviation at
//! most two percent.  This keeps the
//! threshold overshoot far below `√dt` even when `R` is of order `δ_R`, where
//! a fixed step would make `W` jump by `O(√dt/R)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::lie_group::wrap_fiber;
use crate::sde::{CouplingBackend, NoiseSource, StepEvent, Strategy};
use crate::surface::injectivity_radius;

/// Tolerance used for "A = 0" when starting a run and when cancelling the
/// area with fixed-distance coupling.
pub const AREA_TOLERANCE: f64 = 1e-6;

/// The step is chosen so that one step moves `W` by at most this fraction of
/// the distance to the active level (one standard deviation).
const LEVEL_RESOLUTION: f64 = 1.0 / 6.0;
/// Smallest distance to a level used by the step rule.
const LEVEL_GAP_FLOOR: f64 = 0.01;
/// Largest reflection step in the intrinsic clock `dσ = 4 dt / R²`; the
/// relative change of `R` per step then has standard deviation `√dσ = 0.02`,
/// which keeps the nonlinear response of `W = A/R²` to `ΔR` small.
const SIGMA_STEP_MAX: f64 = 4e-4;

/// Parameters of the switching controller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KendallParams {
    /// Upper switching level `κ` for `|A|/R²`.
    pub kappa: f64,
    /// Hysteresis `ε`: fixed distance stops at `κ − ε`.
    pub epsilon: f64,
    /// Safety margin `η` from the cut locus.
    pub eta: f64,
    /// Distance below which reflection declares coupling.
    pub delta_r: f64,
    /// Maximal time step.
    pub dt: f64,
    /// Time horizon.
    pub t_max: f64,
    /// Read the area modulo `4π`.
    pub wrapped: bool,
}

impl Default for KendallParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            epsilon: 0.25,
            eta: 0.3,
            delta_r: 1e-3,
            dt: 1e-4,
            t_max: 500.0,
            wrapped: false,
        }
    }
}

impl KendallParams {
    /// Checks the parameters against curvature `k`.
    pub fn validate(&self, k: f64) -> Result<()> {
        let bad = |msg: String| Err(CouplingError::InvalidParameter(msg));
        if !(k > 0.0 && k.is_finite()) {
            return bad(format!("the switching controller needs k > 0, got {k}"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.epsilon < self.kappa) {
            return bad("epsilon must be < kappa".to_string());
        }
        let limit = injectivity_radius(k);
        if !(self.eta > 0.0 && 2.0 * self.eta < limit) {
            return bad(format!("eta must lie in (0, i(M)/2), got {}", self.eta));
        }
        if !(self.delta_r > 0.0 && self.delta_r < limit - 2.0 * self.eta) {
            return bad(format!("delta_r must lie in (0, i(M) - 2 eta), got {}", self.delta_r));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.wrapped {
            if k != 1.0 {
                return bad(format!("wrapped mode needs k = 1, got {k}"));
            }
            if !(self.kappa < 2.0 * PI) {
                return bad("wrapped mode needs kappa < 2 pi".to_string());
            }
            let floor = 2.0 * PI / (PI - self.eta).powi(2);
            if !(floor < self.kappa - self.epsilon) {
                return bad(format!(
                    "wrapped mode needs 2 pi / (pi - eta)^2 = {floor:.6} < kappa - epsilon = {:.6}",
                    self.kappa - self.epsilon
                ));
            }
        }
        Ok(())
    }

    /// The area as seen by the controller (wrapped into `(−2π, 2π]` if requested).
    pub fn effective_area(&self, a: f64) -> f64 {
        if self.wrapped {
            wrap_fiber(a)
        } else {
            a
        }
    }
}

/// The two controller phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Reflection,
    FixedDistance,
}

impl Phase {
    pub fn strategy(self) -> Strategy {
        match self {
            Phase::Reflection => Strategy::Reflection,
            Phase::FixedDistance => Strategy::FixedDistance,
        }
    }
}

/// The time-changed quantities along a recorded trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    /// `σ = ∫ 4/R² dt` (trapezoidal rule between trace rows).
    pub sigma: f64,
    /// `K_σ = log R`.
    pub k_sigma: f64,
    /// `W_σ = A/R²`.
    pub w_sigma: f64,
    /// `∫ N dσ`: the part of `σ` spent in reflection.
    pub reflection_sigma: f64,
}

/// `σ`, `K_σ`, `W_σ` and `∫N dσ` along a trace.  A step between two rows is
/// attributed to the segment of the earlier row.
pub fn diagnostics_series(rows: &[TraceRow]) -> Vec<SeriesPoint> {
    let mut out = Vec::with_capacity(rows.len());
    let (mut sigma, mut refl) = (0.0, 0.0);
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            let prev = &rows[i - 1];
            let d = 0.5 * (4.0 / (prev.r * prev.r) + 4.0 / (row.r * row.r)) * (row.t - prev.t);
            sigma += d;
            if prev.phase == Segment::Reflection {
                refl += d;
            }
        }
        out.push(SeriesPoint {
            t: row.t,
            sigma,
            k_sigma: row.r.ln(),
            w_sigma: row.a / (row.r * row.r),
            reflection_sigma: refl,
        });
    }
    out
}

/// Label of a path segment in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Reflection,
    FixedDistance,
    /// Synchronous return towards the initial distance after a restart.
    Synchronous,
    /// Perverse preconditioning away from `R = 0`.
    Perverse,
    /// Fixed-distance coupling cancelling the area before a (re)start.
    AreaReset,
}

impl From<Phase> for Segment {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Reflection => Segment::Reflection,
            Phase::FixedDistance => Segment::FixedDistance,
        }
    }
}

impl Segment {
    pub fn name(self) -> &'static str {
        match self {
            Segment::Reflection => "reflection",
            Segment::FixedDistance => "fixed_distance",
            Segment::Synchronous => "synchronous",
            Segment::Perverse => "perverse",
            Segment::AreaReset => "area_reset",
        }
    }
}

/// Hysteresis rule: reflection → fixed distance iff `|W| ≥ κ`,
/// fixed distance → reflection iff `|W| ≤ κ − ε`.
pub fn phase_transition(phase: Phase, w_abs: f64, params: &KendallParams) -> Phase {
    match phase {
        Phase::Reflection if w_abs >= params.kappa => Phase::FixedDistance,
        Phase::FixedDistance if w_abs <= params.kappa - params.epsilon => Phase::Reflection,
        p => p,
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Coupled,
    HitEta,
    TimedOut,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Coupled => "coupled",
            Outcome::HitEta => "hit_eta",
            Outcome::TimedOut => "timed_out",
        }
    }
}

/// Per-path record of the switching levels actually observed, used to check
/// the threshold sandwich: at every entry into fixed distance `|W| ≈ κ`, at
/// every entry into reflection `|W| ≈ κ − ε`, `|W|` never exceeds `κ` by more
/// than the overshoot during reflection, and `W` keeps its sign during a
/// fixed-distance phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathAudit {
    pub entries_fixed: u64,
    pub entries_reflection: u64,
    /// `max | |W| − κ |` over entries into fixed distance.
    pub max_entry_dev_fixed: f64,
    /// `max | |W| − (κ − ε) |` over entries into reflection.
    pub max_entry_dev_reflection: f64,
    /// Largest `|W|` seen while in reflection.
    pub max_w_reflection: f64,
    /// Sign changes of `W` within fixed-distance phases.
    pub fixed_sign_flips: u64,
    /// Steps that hit a distance buffer.
    pub boundary_events: u64,
}

impl PathAudit {
    /// Whether all sandwich invariants hold within `tol`.
    ///
    /// Sign persistence during fixed distance is not required in wrapped
    /// mode: there the representative `Ã` jumps between `±2π`, and the phase
    /// ends at either signed bound.
    pub fn sandwich_holds(&self, params: &KendallParams, tol: f64) -> bool {
        self.max_entry_dev_fixed <= tol
            && self.max_entry_dev_reflection <= tol
            && self.max_w_reflection <= params.kappa + tol
            && (params.wrapped || self.fixed_sign_flips == 0)
    }
}

/// Time-change diagnostics: `σ = ∫ 4/R² dt`, and the drift of `K = log R`
/// per unit of reflection time, which should be at most `−1/4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sigma_total: f64,
    pub sigma_reflection: f64,
    /// Total change of `log R` accumulated during reflection phases.
    pub log_r_change_reflection: f64,
    /// Time spent in fixed-distance phases.
    pub time_fixed: f64,
    /// Number of integration steps.
    pub steps: u64,
}

impl Diagnostics {
    /// `ΔK / ∫N dσ` (NaN before any reflection).
    pub fn contraction_rate(&self) -> f64 {
        self.log_r_change_reflection / self.sigma_reflection
    }
}

/// Summary of one controlled path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRecord {
    pub outcome: Outcome,
    pub tau: f64,
    pub phase_switch_count: u64,
    pub final_r: f64,
    pub final_a: f64,
    pub restarts: u64,
    pub audit: PathAudit,
    pub diagnostics: Diagnostics,
}

/// One row of a phase trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub r: f64,
    pub a: f64,
    pub w: f64,
    pub phase: Segment,
    pub switch_count: u64,
}

/// Records trace rows at a fixed time spacing, plus every phase change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecorder {
    pub every: f64,
    next_t: f64,
    pub rows: Vec<TraceRow>,
}

impl TraceRecorder {
    pub fn new(every: f64) -> Self {
        Self {
            every,
            next_t: 0.0,
            rows: Vec::new(),
        }
    }

    fn offer(&mut self, row: TraceRow, force: bool) {
        if force || row.t >= self.next_t {
            self.rows.push(row);
            while self.next_t <= row.t {
                self.next_t += self.every;
            }
        }
    }
}

/// Mutable bookkeeping shared by the phases of one path.
struct Run<'a> {
    params: KendallParams,
    switches: u64,
    restarts: u64,
    audit: PathAudit,
    diag: Diagnostics,
    trace: Option<&'a mut TraceRecorder>,
}

impl Run<'_> {
    fn record<B: CouplingBackend + ?Sized>(&mut self, state: &B, segment: Segment, force: bool) {
        if let Some(tr) = self.trace.as_deref_mut() {
            let r = state.distance();
            let a = self.params.effective_area(state.area());
            tr.offer(
                TraceRow {
                    t: state.time(),
                    r,
                    a,
                    w: a / (r * r),
                    phase: segment,
                    switch_count: self.switches,
                },
                force,
            );
        }
    }

    fn finish<B: CouplingBackend + ?Sized>(&mut self, state: &B, outcome: Outcome) -> StoppingRecord {
        self.record(state, Segment::Reflection, true);
        StoppingRecord {
            outcome,
            tau: state.time(),
            phase_switch_count: self.switches,
            final_r: state.distance(),
            final_a: self.params.effective_area(state.area()),
            restarts: self.restarts,
            audit: self.audit,
            diagnostics: self.diag,
        }
    }
}

/// Step length for the controller at distance `r`, normalised area `w`.
pub fn controller_step(r: f64, w: f64, phase: Phase, k: f64, params: &KendallParams) -> f64 {
    let x = 0.5 * k.sqrt() * r;
    // Variance rate of W in the clock dσ = 4 dt / R².
    let (v_sigma, gap) = match phase {
        Phase::Reflection => (
            0.25 * (x.tan() / x).powi(2) + 4.0 * w * w,
            params.kappa - w.abs(),
        ),
        Phase::FixedDistance => (
            0.25 * (x.sin() / x).powi(2),
            w.abs() - (params.kappa - params.epsilon),
        ),
    };
    let gap = gap.max(LEVEL_GAP_FLOOR);
    let mut d_sigma = (LEVEL_RESOLUTION * gap).powi(2) / v_sigma;
    if phase == Phase::Reflection {
        // Under fixed distance W is linear in the Gaussian increment of A, so
        // only the level rule (and the cap `dt`) applies.
        d_sigma = d_sigma.min(SIGMA_STEP_MAX);
    }
    params.dt.min(0.25 * d_sigma * r * r)
}

/// One Kendall run from the current state until coupling, `i(M) − η`, or `T_max`.
fn switching_loop<B: CouplingBackend + ?Sized>(
    state: &mut B,
    noise: &mut dyn NoiseSource,
    run: &mut Run<'_>,
) -> Result<Outcome> {
    let p = run.params;
    let k = state.curvature();
    let r_stop = injectivity_radius(k) - p.eta;
    let mut phase = Phase::Reflection;
    let mut first = true;
    loop {
        let r = state.distance();
        let a = p.effective_area(state.area());
        let w = a / (r * r);
        if r >= r_stop {
            return Ok(Outcome::HitEta);
        }
        if phase == Phase::Reflection {
            run.audit.max_w_reflection = run.audit.max_w_reflection.max(w.abs());
            if r <= p.delta_r && a.abs() <= p.kappa * p.delta_r * p.delta_r {
                return Ok(Outcome::Coupled);
            }
        }
        let next = phase_transition(phase, w.abs(), &p);
        if next != phase {
            match next {
                Phase::FixedDistance => {
                    run.audit.entries_fixed += 1;
                    run.audit.max_entry_dev_fixed =
                        run.audit.max_entry_dev_fixed.max((w.abs() - p.kappa).abs());
                }
                Phase::Reflection => {
                    run.audit.entries_reflection += 1;
                    run.audit.max_entry_dev_reflection = run
                        .audit
                        .max_entry_dev_reflection
                        .max((w.abs() - (p.kappa - p.epsilon)).abs());
                }
            }
            if !first {
                run.switches += 1;
            }
            phase = next;
            run.record(state, phase.into(), true);
        } else {
            run.record(state, phase.into(), first);
        }
        first = false;
        if state.time() >= p.t_max {
            return Ok(Outcome::TimedOut);
        }

        let dt = controller_step(r, w, phase, k, &p);
        let inc = noise.increments(dt);
        let event = state.step(phase.strategy(), &inc, dt)?;
        if event != StepEvent::Interior {
            run.audit.boundary_events += 1;
        }
        run.diag.steps += 1;
        let d_sigma = 4.0 * dt / (r * r);
        run.diag.sigma_total += d_sigma;
        match phase {
            Phase::Reflection => {
                run.diag.sigma_reflection += d_sigma;
                run.diag.log_r_change_reflection += (state.distance() / r).ln();
            }
            Phase::FixedDistance => {
                run.diag.time_fixed += dt;
                let w_new = p.effective_area(state.area());
                if w_new * a < 0.0 {
                    run.audit.fixed_sign_flips += 1;
                }
            }
        }
    }
}

/// Fixed-distance coupling until `|A| ≤ AREA_TOLERANCE` (or `T_max`).
///
/// Under fixed distance the area is a Brownian motion with constant rate
/// `4 sin²(√kR/2)/k`; steps are shortened in proportion to `|A|` so that the
/// level is approached without overshoot.  Returns whether the level was
/// reached before `T_max`.
fn cancel_area<B: CouplingBackend + ?Sized>(
    state: &mut B,
    noise: &mut dyn NoiseSource,
    run: &mut Run<'_>,
) -> Result<bool> {
    let p = run.params;
    let k = state.curvature();
    let r = state.distance();
    let rate = 4.0 * (0.5 * k.sqrt() * r).sin().powi(2) / k;
    loop {
        let a = p.effective_area(state.area());
        if a.abs() <= AREA_TOLERANCE {
            run.record(state, Segment::AreaReset, true);
            return Ok(true);
        }
        if state.time() >= p.t_max {
            return Ok(false);
        }
        let dt = p.dt.min((LEVEL_RESOLUTION * a).powi(2) / rate);
        let inc = noise.increments(dt);
        state.step(Strategy::FixedDistance, &inc, dt)?;
        run.diag.steps += 1;
        run.diag.time_fixed += dt;
        run.record(state, Segment::AreaReset, false);
    }
}

fn check_start<B: CouplingBackend + ?Sized>(state: &B, params: &KendallParams) -> Result<()> {
    let k = state.curvature();
    params.validate(k)?;
    let r = state.distance();
    let limit = injectivity_radius(k) - params.eta;
    if !(r > 0.0 && r < limit) {
        return Err(CouplingError::InvalidParameter(format!(
            "initial distance {r} must lie in (0, i(M) - eta = {limit})"
        )));
    }
    let a = params.effective_area(state.area());
    if a.abs() > AREA_TOLERANCE {
        return Err(CouplingError::InvalidParameter(format!(
            "initial area {a} must vanish (|A| <= {AREA_TOLERANCE})"
        )));
    }
    Ok(())
}

/// A single switching run (no restart) from `(R₀, A₀ ≈ 0)`.
pub fn run_to_tau<B: CouplingBackend + ?Sized>(
    state: &mut B,
    params: &KendallParams,
    noise: &mut dyn NoiseSource,
    trace: Option<&mut TraceRecorder>,
) -> Result<StoppingRecord> {
    check_start(state, params)?;
    let mut run = Run {
        params: *params,
        switches: 0,
        restarts: 0,
        audit: PathAudit::default(),
        diag: Diagnostics::default(),
        trace,
    };
    let outcome = switching_loop(state, noise, &mut run)?;
    Ok(run.finish(state, outcome))
}

/// Switching runs with restarts until coupling or `T_max`.
///
/// Preconditioning: a distance at or below the lower buffer is first
/// increased with perverse coupling, and a distance at or beyond
/// `i(M) − 2η` is first decreased with synchronous coupling, in both cases to
/// the midpoint `(i(M) − 2η)/2`; a non-zero initial area is then cancelled
/// with fixed-distance coupling.  After every run ending at `i(M) − η`, the
/// distance is brought back to its (preconditioned) initial value with
/// synchronous coupling and the area is cancelled again.
pub fn run_successful<B: CouplingBackend + ?Sized>(
    state: &mut B,
    params: &KendallParams,
    noise: &mut dyn NoiseSource,
    trace: Option<&mut TraceRecorder>,
) -> Result<StoppingRecord> {
    let k = state.curvature();
    params.validate(k)?;
    let mut run = Run {
        params: *params,
        switches: 0,
        restarts: 0,
        audit: PathAudit::default(),
        diag: Diagnostics::default(),
        trace,
    };
    let limit = injectivity_radius(k);
    let r0 = state.distance();
    let a0 = params.effective_area(state.area());
    if r0 <= params.delta_r && a0.abs() <= params.kappa * params.delta_r * params.delta_r {
        return Ok(run.finish(state, Outcome::Coupled));
    }
    let mid = 0.5 * (limit - 2.0 * params.eta);
    if r0 <= crate::sde::reduced::distance_floor(k) {
        state.advance_perverse_to(mid, params.dt, noise)?;
        run.record(state, Segment::Perverse, true);
    } else if r0 >= limit - 2.0 * params.eta {
        state.advance_synchronous_to(mid, params.dt, noise)?;
        run.record(state, Segment::Synchronous, true);
    }
    let r_start = state.distance();
    if !cancel_area(state, noise, &mut run)? {
        return Ok(run.finish(state, Outcome::TimedOut));
    }
    loop {
        let outcome = switching_loop(state, noise, &mut run)?;
        if outcome != Outcome::HitEta {
            return Ok(run.finish(state, outcome));
        }
        run.restarts += 1;
        state.advance_synchronous_to(r_start, params.dt, noise)?;
        run.record(state, Segment::Synchronous, true);
        if state.time() >= params.t_max || !cancel_area(state, noise, &mut run)? {
            return Ok(run.finish(state, Outcome::TimedOut));
        }
    }
}

/// [`run_successful`] with the area read modulo `4π` (SU(2) only).
pub fn run_wrapped<B: CouplingBackend + ?Sized>(
    state: &mut B,
    params: &KendallParams,
    noise: &mut dyn NoiseSource,
    trace: Option<&mut TraceRecorder>,
) -> Result<StoppingRecord> {
    let p = KendallParams {
        wrapped: true,
        ..*params
    };
    run_successful(state, &p, noise, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{GaussianNoise, ReducedState};

    #[test]
    fn series_on_a_fixed_distance_segment() {
        let rows: Vec<TraceRow> = (0..5)
            .map(|i| TraceRow {
                t: 0.1 * i as f64,
                r: 0.5,
                a: 0.01 * i as f64,
                w: 0.04 * i as f64,
                phase: Segment::FixedDistance,
                switch_count: 0,
            })
            .collect();
        let s = diagnostics_series(&rows);
        assert!(s.windows(2).all(|w| w[1].sigma > w[0].sigma));
        assert!(s.iter().all(|p| p.k_sigma == 0.5f64.ln() && p.reflection_sigma == 0.0));
        assert_close!(s[4].sigma, 16.0 * 0.4, 1e-12);
    }

    #[test]
    fn hysteresis_rule() {
        let p = KendallParams::default();
        assert_eq!(phase_transition(Phase::Reflection, 0.99, &p), Phase::Reflection);
        assert_eq!(phase_transition(Phase::Reflection, 1.0, &p), Phase::FixedDistance);
        assert_eq!(phase_transition(Phase::FixedDistance, 0.8, &p), Phase::FixedDistance);
        assert_eq!(phase_transition(Phase::FixedDistance, 0.75, &p), Phase::Reflection);
    }

    #[test]
    fn parameter_validation() {
        let p = KendallParams {
            epsilon: 2.0,
            ..KendallParams::default()
        };
        let err = p.validate(1.0).unwrap_err().to_string();
        assert!(err.contains("epsilon must be < kappa"), "{err}");
        assert!(KendallParams::default().validate(-1.0).is_err());
        let wrapped = KendallParams {
            wrapped: true,
            ..KendallParams::default()
        };
        assert!(wrapped.validate(1.0).is_err());
        let wrapped = KendallParams {
            kappa: 1.5,
            ..wrapped
        };
        assert!(wrapped.validate(1.0).is_ok());
    }

    #[test]
    fn controller_step_respects_cap_and_scales_with_r() {
        let p = KendallParams::default();
        assert!(controller_step(1.0, 0.0, Phase::Reflection, 1.0, &p) <= p.dt);
        let small = controller_step(1e-3, 0.0, Phase::Reflection, 1.0, &p);
        assert!(small <= 0.25 * SIGMA_STEP_MAX * 1e-6 * (1.0 + 1e-12));
    }

    #[test]
    fn coupled_runs_satisfy_area_bound() {
        let p = KendallParams {
            t_max: 200.0,
            ..KendallParams::default()
        };
        for i in 0..20 {
            let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
            let mut n = GaussianNoise::new(99, i);
            let rec = run_successful(&mut s, &p, &mut n, None).unwrap();
            if rec.outcome == Outcome::Coupled {
                assert!(rec.final_r <= p.delta_r);
                assert!(rec.final_a.abs() <= p.kappa * p.delta_r * p.delta_r);
            }
            assert!(rec.audit.sandwich_holds(&p, 0.05), "{:?}", rec.audit);
        }
    }

    #[test]
    fn already_coupled_start() {
        let mut s = ReducedState::new(1.0, 1e-4, 0.0).unwrap();
        let mut n = GaussianNoise::new(1, 0);
        let rec = run_successful(&mut s, &KendallParams::default(), &mut n, None).unwrap();
        assert_eq!(rec.outcome, Outcome::Coupled);
        assert_eq!(rec.tau, 0.0);
    }
}
