//! Coupled Brownian motions on the embedded surface.
//!
//! Both points move along geodesics driven by the frame components of the
//! coupled increments; the swept area is advanced by its second-order Taylor
//! expansion at the pre-step configuration, `ΔA = dA(u, v) + ½ Hess A(u, v)`,
//! whose mean reproduces the Itô drift of the area.

use super::control::{ControlPair, Increments, Strategy};
use super::reduced::{distance_ceiling, distance_floor};
use super::{CouplingBackend, StepEvent};
use crate::error::{CouplingError, Result};
use crate::surface::{FrameComponents, Point, Polar, Surface};

/// A pair of points on the surface together with their swept area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingState {
    surface: Surface,
    pub x: Point,
    pub y: Point,
    pub a: f64,
    pub t: f64,
}

impl CouplingState {
    /// Starts from two points (which must lie on the surface) and area `a`.
    pub fn new(surface: Surface, x: Point, y: Point, a: f64) -> Result<Self> {
        for p in [&x, &y] {
            let residual = surface.surface_residual(p);
            if !(residual <= 1e-10) {
                return Err(CouplingError::OffSurface { residual });
            }
        }
        Ok(Self {
            surface,
            x,
            y,
            a,
            t: 0.0,
        })
    }

    /// Two points at distance `r` placed symmetrically about the pole on the
    /// meridian `θ = 0`/`θ = π`.
    pub fn at_distance(surface: Surface, r: f64, a: f64) -> Result<Self> {
        let x = surface.embed(Polar {
            phi: 0.5 * r,
            theta: std::f64::consts::PI,
        });
        let y = surface.embed(Polar {
            phi: 0.5 * r,
            theta: 0.0,
        });
        Self::new(surface, x, y, a)
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    /// One step: `x ← exp_x(dU₁ e1x + dU₂ e2x)`, `y ← exp_y(dV₁ e1y + dV₂ e2y)`.
    ///
    /// Fails when the pre-step configuration is outside the frame domain.  A
    /// post-step distance outside `(floor, ceiling)` is reported as a boundary
    /// event; the state is updated regardless.
    pub fn step(&mut self, ctrl: &ControlPair, inc: &Increments, dt: f64) -> Result<StepEvent> {
        let s = self.surface;
        let f = s.frames(&self.x, &self.y)?;
        let dv = ctrl.apply(inc);
        let c = FrameComponents { u: inc.du, v: dv };
        let ad = s.area_derivatives_in_frame(f.r, &c);
        let u = f.e1x * inc.du[0] + f.e2x * inc.du[1];
        let v = f.e1y * dv[0] + f.e2y * dv[1];
        self.x = s.exp(&self.x, &u);
        self.y = s.exp(&self.y, &v);
        self.a += ad.d_a + 0.5 * ad.hess_a;
        self.t += dt;
        let r = s.distance(&self.x, &self.y);
        if !r.is_finite() {
            return Err(CouplingError::NonFinite("manifold step"));
        }
        Ok(if r <= distance_floor(s.k()) {
            StepEvent::Floor
        } else if r >= distance_ceiling(s.k()) {
            StepEvent::Ceiling
        } else {
            StepEvent::Interior
        })
    }
}

impl CouplingBackend for CouplingState {
    fn distance(&self) -> f64 {
        self.surface.distance(&self.x, &self.y)
    }

    fn area(&self) -> f64 {
        self.a
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn curvature(&self) -> f64 {
        self.surface.k()
    }

    fn step(&mut self, strategy: Strategy, inc: &Increments, dt: f64) -> Result<StepEvent> {
        let ctrl = strategy.control(self.distance(), self.surface.k())?;
        CouplingState::step(self, &ctrl, inc, dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::noise::{GaussianNoise, NoiseSource};

    #[test]
    fn points_stay_on_surface() {
        for k in [1.0, -1.0, 0.0] {
            let s = Surface::new(k).unwrap();
            let mut st = CouplingState::at_distance(s, 1.0, 0.0).unwrap();
            let mut n = GaussianNoise::new(11, 0);
            for _ in 0..2000 {
                let inc = n.increments(1e-3);
                CouplingBackend::step(&mut st, Strategy::Reflection, &inc, 1e-3).unwrap();
            }
            assert!(s.surface_residual(&st.x) < 1e-12);
            assert!(s.surface_residual(&st.y) < 1e-12);
        }
    }

    #[test]
    fn synchronous_contracts_distance_on_sphere() {
        let s = Surface::new(1.0).unwrap();
        let mut st = CouplingState::at_distance(s, 1.0, 0.0).unwrap();
        let mut n = GaussianNoise::new(5, 1);
        for _ in 0..1000 {
            let inc = n.increments(1e-3);
            CouplingBackend::step(&mut st, Strategy::Synchronous, &inc, 1e-3).unwrap();
        }
        let exact = crate::sde::moments::synchronous_distance(1.0, 1.0, 1.0);
        assert!((st.distance() - exact).abs() < 0.02, "{}", st.distance());
    }

    #[test]
    fn out_of_domain_configuration_is_an_error() {
        let s = Surface::new(1.0).unwrap();
        let x = s.pole();
        let mut st = CouplingState::new(s, x, x, 0.0).unwrap();
        let ctrl = Strategy::Reflection.control(0.0, 1.0).unwrap();
        assert!(st.step(&ctrl, &Increments::default(), 1e-4).is_err());
    }
}
