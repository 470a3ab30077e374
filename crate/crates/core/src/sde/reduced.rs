//! Euler–Maruyama scheme for the reduced `(R, A)` diffusion.

use serde::{Deserialize, Serialize};

use super::control::{ControlPair, Increments, Strategy};
use super::moments::{moments, perverse_duration, synchronous_area_variance, synchronous_duration};
use super::noise::NoiseSource;
use super::{CouplingBackend, StepEvent};
use crate::error::{CouplingError, Result};
use crate::surface::{half_tan, injectivity_radius};

/// Relative size of the buffers kept away from `R = 0` and `R = i(M)`.
pub const BOUNDARY_BUFFER: f64 = 1e-6;

/// Lower clamp for the distance on a surface of curvature `k`.
pub fn distance_floor(k: f64) -> f64 {
    let scale = if k == 0.0 { 1.0 } else { 1.0 / k.abs().sqrt() };
    BOUNDARY_BUFFER * scale
}

/// Upper clamp for the distance (infinite when `k ≤ 0`).
pub fn distance_ceiling(k: f64) -> f64 {
    injectivity_radius(k) * (1.0 - BOUNDARY_BUFFER)
}

/// State `(R, A, t)` of the reduced system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub r: f64,
    pub a: f64,
    pub t: f64,
    k: f64,
    /// Number of steps whose distance had to be clamped.
    pub clamp_events: u64,
}

impl ReducedState {
    /// Starts at distance `r` with swept area `a` at time zero.
    pub fn new(k: f64, r: f64, a: f64) -> Result<Self> {
        if !(r.is_finite() && a.is_finite() && k.is_finite()) {
            return Err(CouplingError::NonFinite("reduced initial state"));
        }
        if !(r >= 0.0 && r <= injectivity_radius(k)) {
            return Err(CouplingError::InvalidParameter(format!(
                "initial distance {r} outside [0, i(M)]"
            )));
        }
        Ok(Self {
            r,
            a,
            t: 0.0,
            k,
            clamp_events: 0,
        })
    }

    /// One Euler–Maruyama step under the control `ctrl`.
    ///
    /// `ΔR = (dV₁ − dU₁) + drift_R dt` and
    /// `ΔA = tan(√kR/2)/√k (dU₂ + dV₂) + drift_A dt`, with coefficients frozen
    /// at the pre-step distance.  The new distance is clamped into
    /// `[floor, ceiling]` and any clamp is reported.
    pub fn step(&mut self, ctrl: &ControlPair, inc: &Increments, dt: f64) -> StepEvent {
        let m = moments(ctrl, self.r, self.k);
        let dv = ctrl.apply(inc);
        let ta = half_tan(self.k, self.r);
        let r_new = self.r + ((dv[0] - inc.du[0]) + m.drift_r * dt);
        self.a += ta * (inc.du[1] + dv[1]) + m.drift_a * dt;
        self.t += dt;
        let (lo, hi) = (distance_floor(self.k), distance_ceiling(self.k));
        if r_new < lo {
            self.r = lo;
            self.clamp_events += 1;
            StepEvent::Floor
        } else if r_new > hi {
            self.r = hi;
            self.clamp_events += 1;
            StepEvent::Ceiling
        } else {
            self.r = r_new;
            StepEvent::Interior
        }
    }
}

impl CouplingBackend for ReducedState {
    fn distance(&self) -> f64 {
        self.r
    }

    fn area(&self) -> f64 {
        self.a
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn curvature(&self) -> f64 {
        self.k
    }

    fn step(&mut self, strategy: Strategy, inc: &Increments, dt: f64) -> Result<StepEvent> {
        let ctrl = strategy.control(self.r, self.k)?;
        Ok(ReducedState::step(self, &ctrl, inc, dt))
    }

    /// Exact: `R` follows its closed form and `A` receives a Gaussian
    /// increment with the closed-form variance.
    fn advance_synchronous_to(
        &mut self,
        target: f64,
        _dt: f64,
        noise: &mut dyn NoiseSource,
    ) -> Result<()> {
        if target >= self.r {
            return Ok(());
        }
        let duration = synchronous_duration(self.r, target, self.k)?;
        let var = synchronous_area_variance(self.r, target, self.k)?;
        self.a += var.sqrt() * noise.standard_normal();
        self.t += duration;
        self.r = target;
        Ok(())
    }

    fn advance_perverse_to(
        &mut self,
        target: f64,
        _dt: f64,
        _noise: &mut dyn NoiseSource,
    ) -> Result<()> {
        if target <= self.r {
            return Ok(());
        }
        self.t += perverse_duration(self.r, target, self.k)?;
        self.r = target;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::noise::{GaussianNoise, ZeroNoise};

    #[test]
    fn fixed_distance_freezes_r_bitwise() {
        let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
        let mut noise = GaussianNoise::new(3, 0);
        for _ in 0..10_000 {
            let ctrl = Strategy::FixedDistance.control(s.r, 1.0).unwrap();
            let inc = noise.increments(1e-4);
            s.step(&ctrl, &inc, 1e-4);
            assert_eq!(s.r.to_bits(), 1f64.to_bits());
        }
    }

    #[test]
    fn zero_noise_synchronous_follows_closed_form() {
        let mut s = ReducedState::new(1.0, 1.0, 0.0).unwrap();
        let mut z = ZeroNoise;
        for _ in 0..10_000 {
            let inc = z.increments(1e-4);
            CouplingBackend::step(&mut s, Strategy::Synchronous, &inc, 1e-4).unwrap();
        }
        let exact = crate::sde::moments::synchronous_distance(1.0, 1.0, 1.0);
        assert!((s.r - exact).abs() < 1e-4);
    }

    #[test]
    fn clamps_are_reported() {
        let mut s = ReducedState::new(1.0, 1e-5, 0.0).unwrap();
        let ctrl = Strategy::Reflection.control(s.r, 1.0).unwrap();
        let inc = Increments {
            du: [0.01, 0.0],
            dw: [0.0, 0.0],
        };
        assert_eq!(s.step(&ctrl, &inc, 1e-4), StepEvent::Floor);
        assert_eq!(s.clamp_events, 1);
        assert!(s.r > 0.0);
    }
}
