//! Constant-curvature surfaces in their standard embeddings.
//!
//! * `k > 0`: the sphere of radius `1/√k` in Euclidean ℝ³.
//! * `k < 0`: the upper sheet of the hyperboloid `⟨p,p⟩ = 1/k` in Minkowski
//!   space with bilinear form `(+,+,−)`.
//! * `k = 0`: the plane `{(x, y, 0)}`.
//!
//! All operations (exponential and logarithm maps, parallel transport,
//! distance, oriented frames) use closed forms in the embedding.  Points and
//! tangent vectors are plain [`nalgebra::Vector3`] values; tangent vectors at
//! a point `p` are ambient vectors orthogonal to `p` for the model bilinear
//! form.
//!
//! Orientation: at every point the frame `(e1, e2)` is direct when
//! `e2 = J e1`, where `J` is rotation by `+π/2` about the outward normal.
//! Near the pole `(0, 0, 1/√|k|)` this is counter-clockwise rotation seen
//! from above for all three models.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};

/// A point of the embedded surface.
pub type Point = Vector3<f64>;
/// An ambient vector tangent to the surface at some point.
pub type Tangent = Vector3<f64>;

/// Distance buffer used when constructing frames: pairs closer than this or
/// closer than this to the cut locus are rejected.
pub const FRAME_BUFFER: f64 = 1e-9;

/// Below this value of `|k| r²` the area coefficient uses its flat limit.
const FLAT_AREA_THRESHOLD: f64 = 1e-12;

/// Geodesic polar coordinates about the pole: `phi` is the distance to the
/// pole and `theta ∈ [0, 2π)` the angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub phi: f64,
    pub theta: f64,
}

/// Orthonormal direct frames at the two endpoints of a minimizing geodesic.
///
/// `e1x` points from `x` towards `y`; `(e1y, e2y)` is the parallel transport
/// of `(e1x, e2x)` along the geodesic, so `e1y` points away from `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FramePair {
    pub e1x: Tangent,
    pub e2x: Tangent,
    pub e1y: Tangent,
    pub e2y: Tangent,
    /// Geodesic distance between the endpoints.
    pub r: f64,
}

/// First and second derivatives of the distance along a pair of geodesics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceDerivs {
    /// `dρ(u, v) = v₁ − u₁`.
    pub d_rho: f64,
    /// `Hess ρ(u, v)`.
    pub hess: f64,
}

/// First and second derivatives of the swept area along a pair of geodesics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaDerivs {
    pub d_a: f64,
    pub hess_a: f64,
}

/// Frame components `(u₁, u₂)` and `(v₁, v₂)` of two tangent vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameComponents {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

/// A simply connected surface of constant Gaussian curvature `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    k: f64,
}

impl Surface {
    /// Builds the model surface of curvature `k`.
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(CouplingError::InvalidParameter(format!(
                "curvature must be finite, got {k}"
            )));
        }
        Ok(Self { k })
    }

    /// The curvature `k`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `√|k|`.
    pub fn sqrt_abs_k(&self) -> f64 {
        self.k.abs().sqrt()
    }

    /// Injectivity radius: `π/√k` for `k > 0`, `+∞` otherwise.
    pub fn injectivity_radius(&self) -> f64 {
        injectivity_radius(self.k)
    }

    /// Generalized sine `sin(√k r)/√k` (hyperbolic sine for `k < 0`, `r` for `k = 0`).
    pub fn sn(&self, r: f64) -> f64 {
        sn(self.k, r)
    }

    /// Generalized cosine `cos(√k r)` (hyperbolic cosine for `k < 0`, `1` for `k = 0`).
    pub fn cs(&self, r: f64) -> f64 {
        cs(self.k, r)
    }

    /// Generalized half tangent `tan(√k r/2)/√k`, with the flat limit `r/2`.
    pub fn half_tan(&self, r: f64) -> f64 {
        half_tan(self.k, r)
    }

    /// Length scale used to normalize coordinates: `√|k|`, or `1` on the plane.
    fn scale(&self) -> f64 {
        if self.k == 0.0 {
            1.0
        } else {
            self.sqrt_abs_k()
        }
    }

    /// The model bilinear form: Euclidean for `k ≥ 0`, Minkowski `(+,+,−)` for `k < 0`.
    pub fn inner(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        if self.k < 0.0 {
            a.x * b.x + a.y * b.y - a.z * b.z
        } else {
            a.dot(b)
        }
    }

    /// Model norm of a tangent vector.
    pub fn norm(&self, v: &Tangent) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// The pole `(0, 0, 1/√|k|)` (the origin of the plane when `k = 0`).
    pub fn pole(&self) -> Point {
        self.embed(Polar { phi: 0.0, theta: 0.0 })
    }

    /// Embeds geodesic polar coordinates about the pole.
    ///
    /// * sphere: `(sin φ̃ sin θ, −sin φ̃ cos θ, cos φ̃)/√k` with `φ̃ = √k φ`,
    /// * hyperboloid: `(sinh φ̃ cos θ, sinh φ̃ sin θ, cosh φ̃)/√|k|`,
    /// * plane: `(φ cos θ, φ sin θ, 0)`.
    pub fn embed(&self, c: Polar) -> Point {
        let s = self.scale();
        let pt = s * c.phi;
        if self.k > 0.0 {
            Vector3::new(pt.sin() * c.theta.sin(), -pt.sin() * c.theta.cos(), pt.cos()) / s
        } else if self.k < 0.0 {
            Vector3::new(pt.sinh() * c.theta.cos(), pt.sinh() * c.theta.sin(), pt.cosh()) / s
        } else {
            Vector3::new(c.phi * c.theta.cos(), c.phi * c.theta.sin(), 0.0)
        }
    }

    /// Inverse of [`Surface::embed`]; `theta` is returned in `[0, 2π)`.
    pub fn polar(&self, p: &Point) -> Polar {
        let s = self.scale();
        let h = p * s;
        let rho = h.x.hypot(h.y);
        let (phi, theta) = if self.k > 0.0 {
            (rho.atan2(h.z) / s, h.x.atan2(-h.y))
        } else if self.k < 0.0 {
            (rho.asinh() / s, h.y.atan2(h.x))
        } else {
            (rho, h.y.atan2(h.x))
        };
        Polar {
            phi,
            theta: wrap_angle(theta),
        }
    }

    /// Residual of the defining equation at `p` (zero on the surface).
    pub fn surface_residual(&self, p: &Point) -> f64 {
        if self.k == 0.0 {
            p.z.abs()
        } else {
            let s = self.scale();
            (self.inner(&(p * s), &(p * s)) - self.k.signum()).abs()
        }
    }

    /// Projects an ambient point back onto the surface (removes round-off drift).
    pub fn project(&self, p: &Point) -> Point {
        if self.k > 0.0 {
            p / (p.norm() * self.scale())
        } else if self.k < 0.0 {
            let q = -self.inner(p, p);
            p / (q.max(f64::MIN_POSITIVE).sqrt() * self.scale())
        } else {
            Vector3::new(p.x, p.y, 0.0)
        }
    }

    /// Projects an ambient vector onto the tangent plane at `p`.
    pub fn project_tangent(&self, p: &Point, v: &Vector3<f64>) -> Tangent {
        if self.k == 0.0 {
            return Vector3::new(v.x, v.y, 0.0);
        }
        v - p * (self.inner(p, v) / self.inner(p, p))
    }

    /// Geodesic distance, computed with cancellation-free formulas.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        if self.k > 0.0 {
            let s = self.scale();
            let (xh, yh) = (x * s, y * s);
            xh.cross(&yh).norm().atan2(xh.dot(&yh)) / s
        } else if self.k < 0.0 {
            let s = self.scale();
            let d = (y - x) * s;
            let chord = self.inner(&d, &d).max(0.0).sqrt();
            2.0 * (0.5 * chord).asinh() / s
        } else {
            (y - x).norm()
        }
    }

    /// Exponential map `exp_x(v)`.
    pub fn exp(&self, x: &Point, v: &Tangent) -> Point {
        let l = self.norm(v);
        if l == 0.0 {
            return *x;
        }
        let p = x * self.cs(l) + v * (self.sn(l) / l);
        self.project(&p)
    }

    /// Unit tangent at `x` pointing towards `y` (undefined when `x = y`).
    fn direction(&self, x: &Point, y: &Point) -> Tangent {
        let d = y - x;
        let w = self.project_tangent(x, &d);
        w / self.norm(&w)
    }

    /// Logarithm map `log_x(y)`: the initial velocity of the minimizing
    /// geodesic from `x` to `y` traversed in unit time.
    pub fn log(&self, x: &Point, y: &Point) -> Tangent {
        let r = self.distance(x, y);
        if r == 0.0 {
            return Vector3::zeros();
        }
        self.direction(x, y) * r
    }

    /// Parallel transport of `v ∈ T_x` to `T_y` along the minimizing geodesic.
    pub fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Tangent {
        if self.k == 0.0 {
            return *v;
        }
        let s = self.scale();
        let (xh, yh) = (x * s, y * s);
        let g = self.k.signum();
        let denom = g + self.inner(&xh, &yh);
        v - (xh + yh) * (self.inner(&yh, v) / denom)
    }

    /// Rotation by `+π/2` in the tangent plane at `x`.
    pub fn rotate(&self, x: &Point, v: &Tangent) -> Tangent {
        if self.k == 0.0 {
            return Vector3::z().cross(v);
        }
        let n = x * self.scale();
        let c = n.cross(v);
        if self.k < 0.0 {
            Vector3::new(c.x, c.y, -c.z)
        } else {
            c
        }
    }

    /// Builds the oriented frame pair along the geodesic from `x` to `y`.
    ///
    /// Fails when `r < 1e−9` or `r > i(M) − 1e−9`.
    pub fn frames(&self, x: &Point, y: &Point) -> Result<FramePair> {
        let r = self.distance(x, y);
        let limit = self.injectivity_radius();
        if !(r >= FRAME_BUFFER && r <= limit - FRAME_BUFFER) {
            return Err(CouplingError::OutOfDomain { r, limit });
        }
        let e1x = self.direction(x, y);
        let e2x = self.rotate(x, &e1x);
        let e1y = self.transport(x, y, &e1x);
        let e2y = self.transport(x, y, &e2x);
        Ok(FramePair {
            e1x,
            e2x,
            e1y,
            e2y,
            r,
        })
    }

    /// Components of `u ∈ T_x` and `v ∈ T_y` in the frames.
    pub fn components(&self, f: &FramePair, u: &Tangent, v: &Tangent) -> FrameComponents {
        FrameComponents {
            u: [self.inner(u, &f.e1x), self.inner(u, &f.e2x)],
            v: [self.inner(v, &f.e1y), self.inner(v, &f.e2y)],
        }
    }

    /// Derivatives of `t ↦ ρ(exp_x(tu), exp_y(tv))` at `t = 0`.
    pub fn distance_derivatives(
        &self,
        x: &Point,
        y: &Point,
        u: &Tangent,
        v: &Tangent,
    ) -> Result<DistanceDerivs> {
        let f = self.frames(x, y)?;
        let c = self.components(&f, u, v);
        Ok(self.distance_derivatives_in_frame(f.r, &c))
    }

    /// Distance derivatives from frame components at separation `r`.
    pub fn distance_derivatives_in_frame(&self, r: f64, c: &FrameComponents) -> DistanceDerivs {
        let [u1, u2] = c.u;
        let [v1, v2] = c.v;
        let sn = self.sn(r);
        DistanceDerivs {
            d_rho: v1 - u1,
            hess: ((u2 * u2 + v2 * v2) * self.cs(r) - 2.0 * u2 * v2) / sn,
        }
    }

    /// Derivatives of the swept area along `t ↦ (exp_x(tu), exp_y(tv))`.
    pub fn area_derivatives(
        &self,
        x: &Point,
        y: &Point,
        u: &Tangent,
        v: &Tangent,
    ) -> Result<AreaDerivs> {
        let f = self.frames(x, y)?;
        let c = self.components(&f, u, v);
        Ok(self.area_derivatives_in_frame(f.r, &c))
    }

    /// Area derivatives from frame components at separation `r`.
    pub fn area_derivatives_in_frame(&self, r: f64, c: &FrameComponents) -> AreaDerivs {
        let [u1, u2] = c.u;
        let [v1, v2] = c.v;
        let ta = self.half_tan(r);
        let kt2 = self.k * ta * ta;
        AreaDerivs {
            d_a: ta * (u2 + v2),
            hess_a: (u2 * v1 - v2 * u1) * (1.0 + kt2) + kt2 * (v2 * v1 - u2 * u1),
        }
    }

    /// Unsigned area of the geodesic triangle with vertices `p`, `x`, `y`.
    ///
    /// Uses the Heron-type half-angle relations
    /// `cos(𝒜/2) = (1 + cos a + cos b + cos c) / (4 cos(a/2) cos(b/2) cos(c/2))`
    /// and `sin(𝒜/2) = |det(p̂, x̂, ŷ)| / (4 cos(a/2) cos(b/2) cos(c/2))`
    /// (with hyperbolic cosines on the hyperboloid), combined through `atan2`
    /// so small and near-maximal triangles keep full precision.
    pub fn triangle_area(&self, p: &Point, x: &Point, y: &Point) -> f64 {
        if self.k == 0.0 {
            let (a, b) = (x - p, y - p);
            return 0.5 * (a.x * b.y - a.y * b.x).abs();
        }
        let s = self.scale();
        let (ph, xh, yh) = (p * s, x * s, y * s);
        let g = self.k.signum();
        let (ca, cb, cc) = (
            g * self.inner(&xh, &yh),
            g * self.inner(&ph, &yh),
            g * self.inner(&ph, &xh),
        );
        let det = nalgebra::Matrix3::from_columns(&[ph, xh, yh]).determinant();
        2.0 * det.abs().atan2(1.0 + ca + cb + cc) / self.k.abs()
    }

    /// The Heron-type value `cos(𝒜/2)` from side lengths (cosine form only).
    pub fn heron_cos_half_area(&self, a: f64, b: f64, c: f64) -> f64 {
        let s = self.sqrt_abs_k();
        let (a, b, c) = (s * a, s * b, s * c);
        if self.k > 0.0 {
            (1.0 + a.cos() + b.cos() + c.cos())
                / (4.0 * (a / 2.0).cos() * (b / 2.0).cos() * (c / 2.0).cos())
        } else {
            (1.0 + a.cosh() + b.cosh() + c.cosh())
                / (4.0 * (a / 2.0).cosh() * (b / 2.0).cosh() * (c / 2.0).cosh())
        }
    }
}

/// Injectivity radius of the model surface of curvature `k`.
pub fn injectivity_radius(k: f64) -> f64 {
    if k > 0.0 {
        PI / k.sqrt()
    } else {
        f64::INFINITY
    }
}

/// `sin(√k r)/√k`, `sinh(√−k r)/√−k`, or `r`.
pub fn sn(k: f64, r: f64) -> f64 {
    if k > 0.0 {
        let s = k.sqrt();
        (s * r).sin() / s
    } else if k < 0.0 {
        let s = (-k).sqrt();
        (s * r).sinh() / s
    } else {
        r
    }
}

/// `cos(√k r)`, `cosh(√−k r)`, or `1`.
pub fn cs(k: f64, r: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * r).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * r).cosh()
    } else {
        1.0
    }
}

/// `tan(√k r/2)/√k`, `tanh(√−k r/2)/√−k`, or `r/2` (also used when `|k| r² < 1e−12`).
pub fn half_tan(k: f64, r: f64) -> f64 {
    if k == 0.0 || k.abs() * r * r < FLAT_AREA_THRESHOLD {
        0.5 * r
    } else if k > 0.0 {
        let s = k.sqrt();
        (0.5 * s * r).tan() / s
    } else {
        let s = (-k).sqrt();
        (0.5 * s * r).tanh() / s
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let t = wrap_angle(theta);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_conventions() {
        let s = Surface::new(1.0).unwrap();
        let p = s.embed(Polar { phi: PI / 2.0, theta: 0.0 });
        assert!((p - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        let h = Surface::new(-1.0).unwrap();
        let q = h.embed(Polar { phi: 1.0, theta: 0.0 });
        assert!((q - Vector3::new(1f64.sinh(), 0.0, 1f64.cosh())).norm() < 1e-15);
        assert_close!(h.surface_residual(&q), 0.0, 1e-14);
    }

    #[test]
    fn injectivity_radii() {
        assert_close!(Surface::new(4.0).unwrap().injectivity_radius(), PI / 2.0, 1e-15);
        assert!(Surface::new(-1.0).unwrap().injectivity_radius().is_infinite());
        assert!(Surface::new(0.0).unwrap().injectivity_radius().is_infinite());
    }

    #[test]
    fn polar_round_trip_all_models() {
        for k in [2.0, 1.0, 0.0, -1.0, -0.5] {
            let s = Surface::new(k).unwrap();
            for &(phi, theta) in &[(0.3, 0.1), (1.2, 2.5), (0.7, 5.9)] {
                let c = s.polar(&s.embed(Polar { phi, theta }));
                assert_close!(c.phi, phi, 1e-12);
                assert_close!(c.theta, theta, 1e-12);
            }
        }
    }

    #[test]
    fn frames_reject_degenerate_pairs() {
        let s = Surface::new(1.0).unwrap();
        let x = s.pole();
        assert!(s.frames(&x, &x).is_err());
        let antipode = -x;
        assert!(s.frames(&x, &antipode).is_err());
    }

    #[test]
    fn small_curvature_matches_flat_formulas() {
        let flat = Surface::new(0.0).unwrap();
        let c = FrameComponents {
            u: [0.3, -0.8],
            v: [-0.4, 1.1],
        };
        for k in [1e-8, -1e-8] {
            let s = Surface::new(k).unwrap();
            for r in [0.1, 1.0, 5.0] {
                let (d, d0) = (s.distance_derivatives_in_frame(r, &c), flat.distance_derivatives_in_frame(r, &c));
                let (a, a0) = (s.area_derivatives_in_frame(r, &c), flat.area_derivatives_in_frame(r, &c));
                assert_close!(d.d_rho, d0.d_rho, 1e-6);
                assert_close!(d.hess, d0.hess, 1e-6);
                assert_close!(a.d_a, a0.d_a, 1e-6);
                assert_close!(a.hess_a, a0.hess_a, 1e-6);
            }
        }
        // Flat Hessian is (u₂ − v₂)²/r.
        assert_close!(flat.distance_derivatives_in_frame(2.0, &c).hess, 1.9f64.powi(2) / 2.0, 1e-15);
    }

    #[test]
    fn plane_hessian_vanishes_for_parallel_translation() {
        let s = Surface::new(0.0).unwrap();
        let c = FrameComponents {
            u: [0.2, 0.7],
            v: [0.2, 0.7],
        };
        let d = s.distance_derivatives_in_frame(1.3, &c);
        assert_close!(d.hess, 0.0, 1e-15);
        assert_close!(d.d_rho, 0.0, 1e-15);
    }

    #[test]
    fn heron_cosine_matches_triangle_area() {
        for k in [1.0, -1.0] {
            let s = Surface::new(k).unwrap();
            let p = s.pole();
            let x = s.embed(Polar { phi: 0.8, theta: 0.4 });
            let y = s.embed(Polar { phi: 1.1, theta: 1.9 });
            let area = s.triangle_area(&p, &x, &y);
            let c = s.heron_cos_half_area(s.distance(&x, &y), s.distance(&p, &y), s.distance(&p, &x));
            assert_close!((0.5 * area * k.abs()).cos(), c, 1e-12);
        }
    }
}
