//! Comparison of the Carnot–Carathéodory proxy with geometric functionals.
//!
//! For random pairs `(x, y)` of group elements the proxy `φ² + |z|` of
//! `x⁻¹y` is compared with functionals built only from base-surface geometry
//! and the fiber coordinates of `x` and `y`:
//!
//! * `R` — the distance between the projections of `x` and `y`;
//! * `Ã` — the wrapped area `zʸ − zˣ ± 𝒜`, where `𝒜` is the area of the
//!   geodesic triangle formed by the pole and the two projections, with the
//!   orientation sign of that triangle.
//!
//! The report gives the range of `proxy / (R² + |Ã|)` and, because two
//! different powers of the area appear for SL(2,ℝ), also of
//! `proxy / (R² + √|Ã|)`.  Bounded, seed-stable ranges are the evidence of
//! equivalence; the constants themselves are not determined.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::lie_group::{
    cc_proxy, from_cylindrical, relative_cylindrical, to_cylindrical, wrap_fiber, Cylindrical,
    GroupElement, GroupKind,
};
use crate::sde::GaussianNoise;
use crate::surface::Surface;

/// Range of a ratio over the sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
}

impl RatioRange {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, v: f64) {
        if v.is_finite() {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
    }
}

/// Result of [`equivalence_diagnostic`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub kind: GroupKind,
    pub n_pairs: u64,
    /// `proxy / (R² + |Ã|)`.
    pub ratio_area: RatioRange,
    /// `proxy / (R² + √|Ã|)`.
    pub ratio_sqrt_area: RatioRange,
    /// Largest `|z(x⁻¹y) − Ã|` (mod 4π): how well the relative fiber
    /// coordinate is explained by the triangle area.
    pub max_fiber_mismatch: f64,
    /// Largest `|φ(x⁻¹y) − R|`.
    pub max_distance_mismatch: f64,
}

/// Orientation of the pole triangle as seen by the fiber coordinate (the
/// same on both groups).
fn orientation(theta_x: f64, theta_y: f64) -> f64 {
    (theta_x - theta_y).sin().signum()
}

/// Geometric functionals `(R, Ã)` of a pair.
pub fn geometric_pair_functionals(x: &GroupElement, y: &GroupElement) -> Result<(f64, f64)> {
    let kind = x.kind();
    let surface = Surface::new(kind.base_curvature())?;
    let (cx, cy) = (to_cylindrical(x).coords, to_cylindrical(y).coords);
    let (px, py) = (surface.embed(cx.polar()), surface.embed(cy.polar()));
    let r = surface.distance(&px, &py);
    let area = surface.triangle_area(&surface.pole(), &px, &py);
    let a = wrap_fiber(cy.z - cx.z + orientation(cx.theta, cy.theta) * area);
    Ok((r, a))
}

/// A random element with `φ` in `[lo, hi]`.
pub fn random_element(kind: GroupKind, noise: &mut GaussianNoise, lo: f64, hi: f64) -> GroupElement {
    let phi = lo + (hi - lo) * noise.uniform();
    let theta = 2.0 * PI * noise.uniform();
    let z = 4.0 * PI * noise.uniform() - 2.0 * PI;
    from_cylindrical(&Cylindrical::new(phi, theta, z), kind)
}

/// Samples `n_pairs` random pairs and reports the ratio ranges.
pub fn equivalence_diagnostic(kind: GroupKind, n_pairs: u64, seed: u64) -> Result<EquivalenceReport> {
    if n_pairs == 0 {
        return Err(CouplingError::InvalidParameter("n_pairs must be positive".into()));
    }
    let (lo, hi) = match kind {
        GroupKind::Su2 => (0.05, PI - 0.05),
        GroupKind::Sl2 => (0.05, 3.0),
    };
    let mut noise = GaussianNoise::new(seed, 0);
    let mut rep = EquivalenceReport {
        kind,
        n_pairs,
        ratio_area: RatioRange::empty(),
        ratio_sqrt_area: RatioRange::empty(),
        max_fiber_mismatch: 0.0,
        max_distance_mismatch: 0.0,
    };
    for _ in 0..n_pairs {
        let x = random_element(kind, &mut noise, lo, hi);
        let y = random_element(kind, &mut noise, lo, hi);
        let proxy = cc_proxy(&(x.inverse() * y));
        let rel = relative_cylindrical(&x, &y).coords;
        let (r, a) = geometric_pair_functionals(&x, &y)?;
        rep.ratio_area.push(proxy / (r * r + a.abs()));
        rep.ratio_sqrt_area.push(proxy / (r * r + a.abs().sqrt()));
        let mismatch = wrap_fiber(rel.z - a).abs();
        rep.max_fiber_mismatch = rep.max_fiber_mismatch.max(mismatch.min(4.0 * PI - mismatch));
        rep.max_distance_mismatch = rep.max_distance_mismatch.max((rel.phi - r).abs());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pair_has_zero_functionals() {
        for kind in [GroupKind::Su2, GroupKind::Sl2] {
            let x = from_cylindrical(&Cylindrical::new(0.7, 1.1, 0.4), kind);
            assert!(cc_proxy(&(x.inverse() * x)) < 1e-12);
            let (r, a) = geometric_pair_functionals(&x, &x).unwrap();
            assert!(r < 1e-7 && a.abs() < 1e-12, "{r} {a}");
        }
    }

    #[test]
    fn relative_fiber_is_explained_by_triangle_area() {
        for kind in [GroupKind::Su2, GroupKind::Sl2] {
            let rep = equivalence_diagnostic(kind, 2000, 4).unwrap();
            assert!(rep.max_fiber_mismatch < 1e-8, "{kind}: {rep:?}");
            assert!(rep.max_distance_mismatch < 1e-8, "{kind}: {rep:?}");
            // With Ã = z(x⁻¹y) and R = φ(x⁻¹y) the first ratio is one.
            assert!((rep.ratio_area.min - 1.0).abs() < 1e-6, "{rep:?}");
            assert!((rep.ratio_area.max - 1.0).abs() < 1e-6, "{rep:?}");
        }
    }

    #[test]
    fn zero_fiber_pairs_reduce_to_distance() {
        let kind = GroupKind::Su2;
        let x = GroupElement::identity(kind);
        let y = from_cylindrical(&Cylindrical::new(1.3, 0.2, 0.0), kind);
        assert_close!(cc_proxy(&(x.inverse() * y)), 1.3 * 1.3, 1e-12);
    }
}
