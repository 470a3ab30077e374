//! Analytic moments of the reduced `(R, A)` diffusion and closed-form
//! solutions of its deterministic regimes.
//!
//! Under a control `(K, K̂)` the distance `R` and the swept area `A` solve
//!
//! ```text
//! dR = dV₁ − dU₁ + (cos √kR − K₂₂) √k / sin √kR dt
//! dA = tan(√kR/2)/√k (dU₂ + dV₂) + (K₁₂ − K₂₁) / (2 cos²(√kR/2)) dt
//! ```
//!
//! (with hyperbolic functions for `k < 0`).

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::control::ControlPair;
use crate::error::{CouplingError, Result};
use crate::surface::{cs, half_tan, sn};

/// Drift and quadratic-variation rates of `(R, A)` per unit time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub drift_r: f64,
    pub qv_r: f64,
    pub drift_a: f64,
    pub qv_a: f64,
    pub cov_ra: f64,
}

/// Mean and covariance of a single increment `(ΔR, ΔA)` over a step `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMoments {
    pub mean_r: f64,
    pub var_r: f64,
    pub mean_a: f64,
    pub var_a: f64,
    pub cov_ra: f64,
}

/// Moments of the reduced diffusion at separation `r`.
pub fn moments(ctrl: &ControlPair, r: f64, k: f64) -> MomentSet {
    let (k11, k12, k21, k22) = (ctrl.k[0][0], ctrl.k[0][1], ctrl.k[1][0], ctrl.k[1][1]);
    let ta = half_tan(k, r);
    MomentSet {
        drift_r: (cs(k, r) - k22) / sn(k, r),
        qv_r: 2.0 * (1.0 - k11),
        drift_a: 0.5 * (k12 - k21) * (1.0 + k * ta * ta),
        qv_a: 2.0 * ta * ta * (1.0 + k22),
        cov_ra: ta * (k12 - k21),
    }
}

/// Moments of one Euler step of the reduced system: exactly `rate · dt`.
pub fn reduced_step_moments(ctrl: &ControlPair, r: f64, k: f64, dt: f64) -> StepMoments {
    let m = moments(ctrl, r, k);
    StepMoments {
        mean_r: m.drift_r * dt,
        var_r: m.qv_r * dt,
        mean_a: m.drift_a * dt,
        var_a: m.qv_a * dt,
        cov_ra: m.cov_ra * dt,
    }
}

/// Moments of one step of the surface-level scheme, to second order in `dt`.
///
/// That scheme moves both points along geodesics and updates the area by its
/// second-order Taylor expansion, so `ΔR` and `ΔA` are a linear plus a
/// quadratic form of the Gaussian vector `ζ = (dU₁, dU₂, dW₁, dW₂) ~ N(0, dt I)`.
/// The linear parts reproduce [`moments`]; the quadratic parts (the distance
/// and area Hessians) add `2 dt² tr(Q Q′)` to every (co)variance.  Remaining
/// discrepancies are `O(dt²)` in the means and `O(dt³)` in the degenerate
/// variances.
pub fn manifold_step_moments(ctrl: &ControlPair, r: f64, k: f64, dt: f64) -> StepMoments {
    let e1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let e2 = Vector4::new(0.0, 1.0, 0.0, 0.0);
    let a = Vector4::from(ctrl.row(0));
    let b = Vector4::from(ctrl.row(1));
    let sym = |m: Matrix4<f64>| (m + m.transpose()) * 0.5;

    let (snr, csr) = (sn(k, r), cs(k, r));
    let ta = half_tan(k, r);
    let kt2 = k * ta * ta;

    let lin_r = a - e1;
    let lin_a = (e2 + b) * ta;
    let q_r = ((e2 * e2.transpose() + b * b.transpose()) * (csr / snr)
        - sym(e2 * b.transpose()) * (2.0 / snr))
        * 0.5;
    let q_a = sym((e2 * a.transpose() - b * e1.transpose()) * (1.0 + kt2)
        + (b * a.transpose() - e2 * e1.transpose()) * kt2)
        * 0.5;

    let quad_cov = |p: &Matrix4<f64>, q: &Matrix4<f64>| 2.0 * dt * dt * (p * q).trace();
    StepMoments {
        mean_r: dt * q_r.trace(),
        var_r: dt * lin_r.dot(&lin_r) + quad_cov(&q_r, &q_r),
        mean_a: dt * q_a.trace(),
        var_a: dt * lin_a.dot(&lin_a) + quad_cov(&q_a, &q_a),
        cov_ra: dt * lin_r.dot(&lin_a) + quad_cov(&q_r, &q_a),
    }
}

/// Distance at time `t` under synchronous coupling:
/// `R_t = (2/√k) arcsin(e^{−kt/2} sin(√k R₀/2))` (hyperbolic analog for `k < 0`).
pub fn synchronous_distance(t: f64, r0: f64, k: f64) -> f64 {
    if k > 0.0 {
        let s = k.sqrt();
        2.0 / s * ((-0.5 * k * t).exp() * (0.5 * s * r0).sin()).asin()
    } else if k < 0.0 {
        let s = (-k).sqrt();
        2.0 / s * ((-0.5 * k * t).exp() * (0.5 * s * r0).sinh()).asinh()
    } else {
        r0
    }
}

/// Distance at time `t` under perverse coupling (`k > 0`):
/// `R_t = (2/√k) arccos(e^{−kt/2} cos(√k R₀/2))`.
pub fn perverse_distance(t: f64, r0: f64, k: f64) -> f64 {
    let s = k.sqrt();
    2.0 / s * ((-0.5 * k * t).exp() * (0.5 * s * r0).cos()).acos()
}

/// Time for synchronous coupling to bring the distance from `from` down to
/// `to` (`k > 0`, `0 < to ≤ from ≤ π/√k`).
pub fn synchronous_duration(from: f64, to: f64, k: f64) -> Result<f64> {
    check_positive_curvature(k)?;
    if !(to > 0.0 && to <= from) {
        return Err(CouplingError::InvalidParameter(format!(
            "synchronous coupling cannot move the distance from {from} to {to}"
        )));
    }
    let s = k.sqrt();
    Ok(2.0 / k * ((0.5 * s * from).sin() / (0.5 * s * to).sin()).ln())
}

/// Time for perverse coupling to bring the distance from `from` up to `to`
/// (`k > 0`, `0 ≤ from ≤ to < π/√k`).
pub fn perverse_duration(from: f64, to: f64, k: f64) -> Result<f64> {
    check_positive_curvature(k)?;
    let s = k.sqrt();
    if !(from >= 0.0 && from <= to && 0.5 * s * to < std::f64::consts::FRAC_PI_2) {
        return Err(CouplingError::InvalidParameter(format!(
            "perverse coupling cannot move the distance from {from} to {to}"
        )));
    }
    Ok(2.0 / k * ((0.5 * s * from).cos() / (0.5 * s * to).cos()).ln())
}

/// Variance accumulated by `A` while synchronous coupling moves the distance
/// from `from` down to `to`: `∫ 4 tan²(√kR/2)/k dt = (8/k²) ln(cos(√k to/2)/cos(√k from/2))`.
///
/// `A` is a driftless Gaussian martingale on such a segment because `R` is
/// deterministic there.
pub fn synchronous_area_variance(from: f64, to: f64, k: f64) -> Result<f64> {
    check_positive_curvature(k)?;
    let s = k.sqrt();
    Ok(8.0 / (k * k) * ((0.5 * s * to).cos() / (0.5 * s * from).cos()).ln())
}

fn check_positive_curvature(k: f64) -> Result<()> {
    if k > 0.0 {
        Ok(())
    } else {
        Err(CouplingError::InvalidParameter(format!(
            "closed-form segment requires k > 0, got {k}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::control::Strategy;

    #[test]
    fn synchronous_drift_is_minus_half_tangent() {
        for r in [0.3, 1.0, 2.0] {
            let c = Strategy::Synchronous.control(r, 1.0).unwrap();
            let m = moments(&c, r, 1.0);
            assert_close!(m.drift_r, -(0.5 * r).tan(), 1e-14);
            assert_close!(m.qv_r, 0.0, 0.0);
        }
    }

    #[test]
    fn fixed_distance_area_rate() {
        let c = Strategy::FixedDistance.control(1.0, 1.0).unwrap();
        let m = moments(&c, 1.0, 1.0);
        assert_close!(m.drift_r, 0.0, 0.0);
        assert_close!(m.qv_a, 4.0 * 0.5f64.sin().powi(2), 1e-14);
        assert_close!(m.qv_a, 0.919_395_388_263_720_6, 1e-13);
    }

    #[test]
    fn reflection_noise_has_driftless_distance() {
        let c = Strategy::ReflectionNoise.control(1.3, 1.0).unwrap();
        let m = moments(&c, 1.3, 1.0);
        assert_close!(m.drift_r, 0.0, 1e-15);
        assert_close!(m.qv_r, 4.0, 0.0);
    }

    #[test]
    fn closed_forms_invert_durations() {
        let t = synchronous_duration(2.5, 1.0, 1.0).unwrap();
        assert_close!(synchronous_distance(t, 2.5, 1.0), 1.0, 1e-13);
        let t = perverse_duration(0.2, 2.0, 1.0).unwrap();
        assert_close!(perverse_distance(t, 0.2, 1.0), 2.0, 1e-13);
        assert_close!(synchronous_distance(1.0, 1.0, 1.0), 0.590_097_070_082_630_5, 1e-13);
    }

    #[test]
    fn synchronous_area_variance_matches_quadrature() {
        let (from, to, k) = (2.8, 1.0, 1.0);
        let total = synchronous_duration(from, to, k).unwrap();
        let n = 200_000;
        let h = total / n as f64;
        let rate = |t: f64| {
            let r = synchronous_distance(t, from, k);
            4.0 * (0.5 * r).tan().powi(2) / k
        };
        let mut sum = 0.5 * (rate(0.0) + rate(total));
        for i in 1..n {
            sum += rate(i as f64 * h);
        }
        assert_close!(sum * h, synchronous_area_variance(from, to, k).unwrap(), 1e-6);
    }

    #[test]
    fn manifold_step_moments_reduce_to_rates() {
        for st in Strategy::ALL {
            let c = st.control(1.0, 1.0).unwrap();
            let m = moments(&c, 1.0, 1.0);
            let s = manifold_step_moments(&c, 1.0, 1.0, 1e-4);
            assert_close!(s.mean_r, m.drift_r * 1e-4, 1e-15);
            assert_close!(s.mean_a, m.drift_a * 1e-4, 1e-15);
            assert_close!(s.var_r, m.qv_r * 1e-4, 1e-7);
            assert_close!(s.var_a, m.qv_a * 1e-4, 1e-7);
            assert_close!(s.cov_ra, m.cov_ra * 1e-4, 1e-7);
        }
    }
}
