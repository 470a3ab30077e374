//! Co-adapted couplings and their numerical integration.

pub mod control;
pub mod group_bm;
pub mod manifold;
pub mod moments;
pub mod noise;
pub mod reduced;

use serde::{Deserialize, Serialize};

pub use control::{ControlPair, Increments, Strategy};
pub use manifold::CouplingState;
pub use moments::{moments, MomentSet, StepMoments};
pub use noise::{GaussianNoise, NoiseSource, ZeroNoise};
pub use reduced::ReducedState;

use crate::error::Result;

/// Outcome of a single integration step with respect to the distance buffers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepEvent {
    /// The new distance lies strictly between the buffers.
    Interior,
    /// The new distance reached the lower buffer near `R = 0`.
    Floor,
    /// The new distance reached the upper buffer near the cut locus.
    Ceiling,
}

/// Common interface of the reduced and the surface-level integrators, used by
/// the switching controller.
pub trait CouplingBackend {
    /// Current distance `R`.
    fn distance(&self) -> f64;
    /// Current swept area `A`.
    fn area(&self) -> f64;
    /// Current time.
    fn time(&self) -> f64;
    /// Curvature of the underlying surface.
    fn curvature(&self) -> f64;
    /// One step under a named strategy evaluated at the current distance.
    fn step(&mut self, strategy: Strategy, inc: &Increments, dt: f64) -> Result<StepEvent>;

    /// Runs synchronous coupling until the distance has decreased to `target`.
    ///
    /// The default steps with `dt`; the reduced system overrides it with the
    /// exact closed form.
    fn advance_synchronous_to(
        &mut self,
        target: f64,
        dt: f64,
        noise: &mut dyn NoiseSource,
    ) -> Result<()> {
        while self.distance() > target {
            let inc = noise.increments(dt);
            self.step(Strategy::Synchronous, &inc, dt)?;
        }
        Ok(())
    }

    /// Runs perverse coupling until the distance has increased to `target`.
    ///
    /// The default steps with `dt`; the reduced system overrides it with the
    /// exact closed form (the area is constant under perverse coupling).
    fn advance_perverse_to(
        &mut self,
        target: f64,
        dt: f64,
        noise: &mut dyn NoiseSource,
    ) -> Result<()> {
        while self.distance() < target {
            let inc = noise.increments(dt);
            self.step(Strategy::Perverse, &inc, dt)?;
        }
        Ok(())
    }
}
