//! Co-adapted couplings of Brownian motions on constant-curvature surfaces
//! and of the horizontal Brownian motions on their three-dimensional lifts,
//! SU(2) over the sphere and SL(2,ℝ) over the hyperbolic plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`surface`] — closed-form geometry of the embedded sphere, hyperboloid
//!   and plane: exponential/log maps, parallel transport, oriented frames,
//!   distance and swept-area derivatives, geodesic triangle areas.
//! * [`lie_group`] — 2×2 matrix models of SU(2) and SL(2,ℝ), the cylindrical
//!   chart, projections onto the base surface, left-invariant horizontal
//!   fields and the subLaplacian.
//! * [`sde`] — control matrices for co-adapted couplings, analytic moments
//!   of the reduced `(R, A)` diffusion, seeded noise, Euler–Maruyama steppers
//!   for the reduced system and for the full pair of surface paths, and the
//!   chart diffusion on the groups.
//! * [`kendall`] — the switching controller alternating reflection and
//!   fixed-distance couplings, with restarts and a wrapped-area variant.
//! * [`harness`] — batch Monte Carlo runs, survival curves, moment
//!   validation, the proxy-equivalence diagnostic and CSV/JSON export.
//! * [`verify`] — independent oracles (finite differences, Gauss–Bonnet,
//!   Taylor-series matrix exponential) and the self-check suites behind the
//!   `verify` command.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!(
            (a - b).abs() <= $tol,
            "{} = {} vs {} = {} (tol {})",
            stringify!($a),
            a,
            stringify!($b),
            b,
            $tol
        );
    }};
}

pub mod error;
pub mod harness;
pub mod kendall;
pub mod lie_group;
pub mod sde;
pub mod surface;
pub mod verify;

pub use error::{CouplingError, Result};
