//! Horizontal Brownian motion on SU(2) and SL(2,ℝ) in the cylindrical chart.
//!
//! The generator is `½(X̄² + Ȳ²)`.  Matching its chart coefficients gives
//!
//! ```text
//! dφ = dB¹ + ½ cot φ dt,   dθ = dB² / sin φ,   dz = tan(φ/2) dB²      (SU(2))
//! dφ = dB¹ + ½ coth φ dt,  dθ = dB² / sinh φ,  dz = tanh(φ/2) dB²     (SL(2,ℝ))
//! ```

use serde::{Deserialize, Serialize};

use super::noise::NoiseSource;
use crate::error::{CouplingError, Result};
use crate::lie_group::{wrap_fiber, Cylindrical, GroupKind};
use crate::surface::wrap_angle;

/// Default distance kept from the chart singularities `φ = 0` and `φ = π`.
pub const CHART_BUFFER: f64 = 1e-6;

/// A sampled path in the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPath {
    pub points: Vec<Cylindrical>,
    /// Number of steps reflected off a chart buffer.
    pub reflections: u64,
}

/// One Euler–Maruyama step with Brownian increments `db` (no wrapping).
pub fn group_bm_step(p: &Cylindrical, kind: GroupKind, db: [f64; 2], dt: f64) -> Cylindrical {
    let (drift, inv_sin, fiber) = match kind {
        GroupKind::Su2 => (
            0.5 / p.phi.tan(),
            1.0 / p.phi.sin(),
            (0.5 * p.phi).tan(),
        ),
        GroupKind::Sl2 => (
            0.5 / p.phi.tanh(),
            1.0 / p.phi.sinh(),
            (0.5 * p.phi).tanh(),
        ),
    };
    Cylindrical::new(
        p.phi + db[0] + drift * dt,
        p.theta + inv_sin * db[1],
        p.z + fiber * db[1],
    )
}

/// Samples `n_steps` steps from `start`, reflecting `φ` off `buffer` (and off
/// `π − buffer` on SU(2)); `θ` and `z` are reduced to their chart ranges.
pub fn sample_group_bm(
    start: Cylindrical,
    kind: GroupKind,
    dt: f64,
    n_steps: usize,
    buffer: f64,
    noise: &mut dyn NoiseSource,
) -> Result<GroupPath> {
    let upper = match kind {
        GroupKind::Su2 => std::f64::consts::PI - buffer,
        GroupKind::Sl2 => f64::INFINITY,
    };
    if !(start.phi > 0.0 && start.phi < upper + buffer) {
        return Err(CouplingError::InvalidParameter(format!(
            "initial φ = {} outside the chart interior",
            start.phi
        )));
    }
    if !(dt > 0.0) {
        return Err(CouplingError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut p = start;
    let mut reflections = 0;
    points.push(p);
    let sqrt_dt = dt.sqrt();
    for _ in 0..n_steps {
        let db = [sqrt_dt * noise.standard_normal(), sqrt_dt * noise.standard_normal()];
        let mut q = group_bm_step(&p, kind, db, dt);
        if q.phi < buffer {
            q.phi = 2.0 * buffer - q.phi;
            reflections += 1;
        } else if q.phi > upper {
            q.phi = 2.0 * upper - q.phi;
            reflections += 1;
        }
        if !q.phi.is_finite() {
            return Err(CouplingError::NonFinite("group Brownian motion"));
        }
        q.theta = wrap_angle(q.theta);
        q.z = wrap_fiber(q.z);
        p = q;
        points.push(p);
    }
    Ok(GroupPath {
        points,
        reflections,
    })
}
