//! SU(2) and SL(2,ℝ) as 2×2 matrix groups with their cylindrical chart.
//!
//! Both groups carry a basis `(X, Y, Z)` of their Lie algebra:
//!
//! * SU(2): `X = ½[[0,1],[−1,0]]`, `Y = ½[[0,i],[i,0]]`, `Z = ½[[i,0],[0,−i]]`,
//!   with `[X,Y] = Z`, `[Y,Z] = X`, `[Z,X] = Y`;
//! * SL(2,ℝ): `X = ½ diag(1,−1)`, `Y = ½[[0,−1],[−1,0]]`, `Z = ½[[0,−1],[1,0]]`,
//!   with `[X,Y] = Z`, `[Y,Z] = −X`, `[Z,X] = −Y`.
//!
//! The cylindrical chart writes an element as
//! `exp(φ(cos θ X + sin θ Y)) exp(z Z)` with `φ ≥ 0`, `θ ∈ [0, 2π)` and
//! `z ∈ (−2π, 2π]`.  The projection onto the base surface (Hopf fibration
//! for SU(2), Möbius action on the upper half-plane for SL(2,ℝ)) sends this
//! element to the point with geodesic polar coordinates `(φ, θ)` about the
//! pole, and the fibers are the `z`-circles.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::surface::{wrap_angle, Polar};

/// Complex 2×2 matrices; SL(2,ℝ) elements have zero imaginary parts.
pub type Mat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which of the two lifted groups an object belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// SU(2), fibering over the unit sphere (`k = 1`).
    Su2,
    /// SL(2,ℝ), fibering over the hyperbolic plane (`k = −1`).
    Sl2,
}

impl GroupKind {
    /// Curvature of the base surface.
    pub fn base_curvature(self) -> f64 {
        match self {
            GroupKind::Su2 => 1.0,
            GroupKind::Sl2 => -1.0,
        }
    }
}

impl std::fmt::Display for GroupKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GroupKind::Su2 => "su2",
            GroupKind::Sl2 => "sl2",
        })
    }
}

/// Coefficients of a Lie algebra element in the basis `(X, Y, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AlgebraVec {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Component-wise linear combination `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &AlgebraVec) -> AlgebraVec {
        AlgebraVec::new(self.x + s * other.x, self.y + s * other.y, self.z + s * other.z)
    }

    /// Multiplication by a scalar.
    pub fn scale(&self, s: f64) -> AlgebraVec {
        AlgebraVec::new(s * self.x, s * self.y, s * self.z)
    }
}

/// Cylindrical coordinates `(φ, θ, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylindrical {
    pub phi: f64,
    pub theta: f64,
    pub z: f64,
}

impl Cylindrical {
    pub fn new(phi: f64, theta: f64, z: f64) -> Self {
        Self { phi, theta, z }
    }

    /// The base-point part `(φ, θ)`.
    pub fn polar(&self) -> Polar {
        Polar {
            phi: self.phi,
            theta: self.theta,
        }
    }
}

/// Points where the cylindrical chart degenerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartSingularity {
    /// `φ = 0`: `θ` is undefined and reported as `0`.
    Axis,
    /// `φ = π` on SU(2): `z` is undefined and reported as `0`.
    AntipodalFiber,
}

/// Result of reading an element in the cylindrical chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartReading {
    pub coords: Cylindrical,
    pub singularity: Option<ChartSingularity>,
}

/// Coefficients of the subLaplacian `X̄² + Ȳ²` in the cylindrical chart:
/// `c_φφ ∂²_φ + c_θθ ∂²_θ + c_zz ∂²_z + c_θz ∂²_θz + c_φ ∂_φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubLaplacianCoeffs {
    pub phiphi: f64,
    pub thetatheta: f64,
    pub zz: f64,
    pub thetaz: f64,
    pub phi: f64,
}

/// An element of SU(2) or SL(2,ℝ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    kind: GroupKind,
    m: Mat2,
}

impl GroupElement {
    /// Wraps a matrix; the caller guarantees it belongs to the group.
    pub fn from_matrix(kind: GroupKind, m: Mat2) -> Self {
        Self { kind, m }
    }

    /// The identity element.
    pub fn identity(kind: GroupKind) -> Self {
        Self {
            kind,
            m: Mat2::identity(),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    /// Group inverse (adjugate, since the determinant is one).
    pub fn inverse(&self) -> Self {
        let m = &self.m;
        Self {
            kind: self.kind,
            m: Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]),
        }
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn distance_max(&self, other: &GroupElement) -> f64 {
        (self.m - other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        debug_assert_eq!(self.kind, rhs.kind);
        GroupElement {
            kind: self.kind,
            m: self.m * rhs.m,
        }
    }
}

/// The basis `(X, Y, Z)` of the Lie algebra.
pub fn basis(kind: GroupKind) -> [Mat2; 3] {
    let h = c(0.5);
    let z0 = c(0.0);
    match kind {
        GroupKind::Su2 => [
            Mat2::new(z0, h, -h, z0),
            Mat2::new(z0, h * I, h * I, z0),
            Mat2::new(h * I, z0, z0, -h * I),
        ],
        GroupKind::Sl2 => [
            Mat2::new(h, z0, z0, -h),
            Mat2::new(z0, -h, -h, z0),
            Mat2::new(z0, -h, h, z0),
        ],
    }
}

/// Matrix commutator `[a, b] = ab − ba`.
pub fn bracket(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// The algebra matrix `xX + yY + zZ`.
pub fn alg_matrix(v: &AlgebraVec, kind: GroupKind) -> Mat2 {
    let [bx, by, bz] = basis(kind);
    bx * c(v.x) + by * c(v.y) + bz * c(v.z)
}

/// Closed-form exponential of an algebra element.
///
/// For a traceless 2×2 matrix `M`, `M² = δ I` with `δ = −det M`, hence
/// `exp M = C(δ) I + S(δ) M` with `C = cosh √δ`, `S = sinh √δ / √δ`
/// (trigonometric for `δ < 0`).
pub fn alg_exp(v: &AlgebraVec, kind: GroupKind) -> GroupElement {
    let m = alg_matrix(v, kind);
    let delta = -(m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let (cc, ss) = if delta.abs() < 1e-10 {
        (1.0 + 0.5 * delta, 1.0 + delta / 6.0)
    } else if delta > 0.0 {
        let w = delta.sqrt();
        (w.cosh(), w.sinh() / w)
    } else {
        let w = (-delta).sqrt();
        (w.cos(), w.sin() / w)
    };
    GroupElement {
        kind,
        m: Mat2::identity() * c(cc) + m * c(ss),
    }
}

/// The element `exp(φ(cos θ X + sin θ Y)) exp(z Z)` in closed form.
pub fn from_cylindrical(p: &Cylindrical, kind: GroupKind) -> GroupElement {
    let (phi, theta, z) = (p.phi, p.theta, p.z);
    let m = match kind {
        GroupKind::Su2 => {
            let (ch, sh) = ((0.5 * phi).cos(), (0.5 * phi).sin());
            let ez = Complex64::from_polar(1.0, 0.5 * z);
            let et = Complex64::from_polar(1.0, theta - 0.5 * z);
            Mat2::new(ez * ch, et * sh, -et.conj() * sh, ez.conj() * ch)
        }
        GroupKind::Sl2 => {
            let (ch, sh) = ((0.5 * phi).cosh(), (0.5 * phi).sinh());
            let (hz, tz) = (0.5 * z, theta + 0.5 * z);
            Mat2::new(
                c(ch * hz.cos() + sh * tz.cos()),
                c(-ch * hz.sin() - sh * tz.sin()),
                c(ch * hz.sin() - sh * tz.sin()),
                c(ch * hz.cos() - sh * tz.cos()),
            )
        }
    };
    GroupElement { kind, m }
}

/// Reduces a fiber coordinate to `(−2π, 2π]` (the fiber has period `4π`).
pub fn wrap_fiber(z: f64) -> f64 {
    let t = (z + 2.0 * PI).rem_euclid(4.0 * PI) - 2.0 * PI;
    if t <= -2.0 * PI {
        t + 4.0 * PI
    } else {
        t
    }
}

/// Reads an element in the cylindrical chart.
///
/// `z` comes from twice an argument in `(−π, π]`, so it lies in `(−2π, 2π]`.
pub fn to_cylindrical(g: &GroupElement) -> ChartReading {
    let m = &g.m;
    match g.kind {
        GroupKind::Su2 => {
            let (a, b) = (m[(0, 0)], m[(0, 1)]);
            let phi = 2.0 * b.norm().atan2(a.norm());
            if b.norm() == 0.0 {
                ChartReading {
                    coords: Cylindrical::new(0.0, 0.0, 2.0 * a.arg()),
                    singularity: Some(ChartSingularity::Axis),
                }
            } else if a.norm() == 0.0 {
                ChartReading {
                    coords: Cylindrical::new(PI, wrap_angle(b.arg()), 0.0),
                    singularity: Some(ChartSingularity::AntipodalFiber),
                }
            } else {
                let z = 2.0 * a.arg();
                ChartReading {
                    coords: Cylindrical::new(phi, wrap_angle(b.arg() + 0.5 * z), z),
                    singularity: None,
                }
            }
        }
        GroupKind::Sl2 => {
            let (m11, m12, m21, m22) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re);
            // cosh(φ/2)·(cos, sin)(z/2) and sinh(φ/2)·(cos, sin)(θ + z/2).
            let (p, q) = (0.5 * (m11 + m22), 0.5 * (m21 - m12));
            let (r, t) = (0.5 * (m11 - m22), -0.5 * (m21 + m12));
            let z = 2.0 * q.atan2(p);
            let sh = r.hypot(t);
            if sh == 0.0 {
                return ChartReading {
                    coords: Cylindrical::new(0.0, 0.0, z),
                    singularity: Some(ChartSingularity::Axis),
                };
            }
            ChartReading {
                coords: Cylindrical::new(2.0 * sh.asinh(), wrap_angle(t.atan2(r) - 0.5 * z), z),
                singularity: None,
            }
        }
    }
}

/// Hopf projection SU(2) → S² through unit quaternions.
///
/// With `g = [[z₁, z₂], [−z̄₂, z̄₁]]`, `z₁ = x₁ + i y₁`, `z₂ = x₂ + i y₂` and
/// `q = x₁ + x₂ i + y₂ j + y₁ k`, the image is
/// `(2(x₁y₂ + x₂y₁), 2(y₁y₂ − x₁x₂), x₁² − x₂² − y₂² + y₁²)`, returned in
/// geodesic polar coordinates about the north pole.
pub fn hopf_project(g: &GroupElement) -> Polar {
    let (z1, z2) = (g.m[(0, 0)], g.m[(0, 1)]);
    let (x1, y1, x2, y2) = (z1.re, z1.im, z2.re, z2.im);
    let p = [
        2.0 * (x1 * y2 + x2 * y1),
        2.0 * (y1 * y2 - x1 * x2),
        x1 * x1 - x2 * x2 - y2 * y2 + y1 * y1,
    ];
    Polar {
        phi: p[0].hypot(p[1]).atan2(p[2]),
        theta: wrap_angle(p[0].atan2(-p[1])),
    }
}

/// Projection SL(2,ℝ) → H² through the Möbius action `w = (ai + b)/(ci + d)`
/// on the upper half-plane, returned in geodesic polar coordinates about `i`.
///
/// In these coordinates `w = (i − sinh φ sin θ)/(cosh φ − sinh φ cos θ)`.
pub fn mobius_project(g: &GroupElement) -> Polar {
    let (a, b, cc, d) = (g.m[(0, 0)], g.m[(0, 1)], g.m[(1, 0)], g.m[(1, 1)]);
    let w = (a * I + b) / (cc * I + d);
    let (u, v) = (w.re, w.im);
    let sh_sin = -u / v;
    let sh_cos = (u * u + v * v - 1.0) / (2.0 * v);
    Polar {
        phi: sh_sin.hypot(sh_cos).asinh(),
        theta: wrap_angle(sh_sin.atan2(sh_cos)),
    }
}

/// Projection onto the base surface (Hopf or Möbius according to the group).
pub fn project(g: &GroupElement) -> Polar {
    match g.kind {
        GroupKind::Su2 => hopf_project(g),
        GroupKind::Sl2 => mobius_project(g),
    }
}

/// Left-invariant horizontal fields `X̄, Ȳ` as `(∂φ, ∂θ, ∂z)` components.
pub fn left_invariant_frame(p: &Cylindrical, kind: GroupKind) -> [[f64; 3]; 2] {
    let phi = p.phi;
    match kind {
        GroupKind::Su2 => {
            let d = p.theta - p.z;
            let (sd, cd) = d.sin_cos();
            let t = (0.5 * phi).tan();
            let cot_plus_tan = 1.0 / t + t;
            [
                [cd, -0.5 * sd * cot_plus_tan, -t * sd],
                [sd, 0.5 * cd * cot_plus_tan, t * cd],
            ]
        }
        GroupKind::Sl2 => {
            let e = p.theta + p.z;
            let (se, ce) = e.sin_cos();
            let t = (0.5 * phi).tanh();
            let coth_minus_tanh = 1.0 / t - t;
            [
                [ce, -0.5 * se * coth_minus_tanh, -t * se],
                [se, 0.5 * ce * coth_minus_tanh, t * ce],
            ]
        }
    }
}

/// Coefficients of `X̄² + Ȳ²` at height `φ`.
///
/// SU(2): `∂²_φ + sin⁻²φ ∂²_θ + tan²(φ/2) ∂²_z + cos⁻²(φ/2) ∂²_θz + cot φ ∂_φ`;
/// SL(2,ℝ): the same with hyperbolic functions.
pub fn sublaplacian_coeffs(phi: f64, kind: GroupKind) -> SubLaplacianCoeffs {
    match kind {
        GroupKind::Su2 => SubLaplacianCoeffs {
            phiphi: 1.0,
            thetatheta: 1.0 / phi.sin().powi(2),
            zz: (0.5 * phi).tan().powi(2),
            thetaz: 1.0 / (0.5 * phi).cos().powi(2),
            phi: 1.0 / phi.tan(),
        },
        GroupKind::Sl2 => SubLaplacianCoeffs {
            phiphi: 1.0,
            thetatheta: 1.0 / phi.sinh().powi(2),
            zz: (0.5 * phi).tanh().powi(2),
            thetaz: 1.0 / (0.5 * phi).cosh().powi(2),
            phi: 1.0 / phi.tanh(),
        },
    }
}

/// Cylindrical coordinates of the relative position `x⁻¹ y`.
pub fn relative_cylindrical(x: &GroupElement, y: &GroupElement) -> ChartReading {
    to_cylindrical(&(x.inverse() * *y))
}

/// Fiber coordinate of `x⁻¹ y` with the fiber offsets of `x` and `y`
/// removed, i.e. `z(x⁻¹y) − (zʸ − zˣ)` reduced to `(−2π, 2π]`.
///
/// Its absolute value equals (mod 4π) the area of the geodesic triangle
/// formed by the pole and the projections of `x` and `y`, and its sign is the
/// sign of `sin(θˣ − θʸ)`.
pub fn pole_triangle_z(x: &GroupElement, y: &GroupElement) -> f64 {
    let zx = to_cylindrical(x).coords.z;
    let zy = to_cylindrical(y).coords.z;
    let zr = relative_cylindrical(x, y).coords.z;
    wrap_fiber(zr - (zy - zx))
}

/// The Carnot–Carathéodory proxy `φ² + |z|` of an element.
pub fn cc_proxy(g: &GroupElement) -> f64 {
    let c = to_cylindrical(g).coords;
    c.phi * c.phi + c.z.abs()
}

/// Coefficients of `β Ad_{exp(αZ)} X`, so that
/// `exp(αZ) exp(βX) = exp(β(cos α X ± sin α Y)) exp(αZ)`.
///
/// The sign is `+` on SU(2) (`[Z,X] = Y`) and `−` on SL(2,ℝ) (`[Z,X] = −Y`).
pub fn conjugate_rotate(alpha: f64, beta: f64, kind: GroupKind) -> AlgebraVec {
    let sign = match kind {
        GroupKind::Su2 => 1.0,
        GroupKind::Sl2 => -1.0,
    };
    AlgebraVec::new(beta * alpha.cos(), sign * beta * alpha.sin(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_tables() {
        for (kind, signs) in [(GroupKind::Su2, [1.0, 1.0, 1.0]), (GroupKind::Sl2, [1.0, -1.0, -1.0])] {
            let [x, y, z] = basis(kind);
            let checks = [
                (bracket(&x, &y), z * c(signs[0])),
                (bracket(&y, &z), x * c(signs[1])),
                (bracket(&z, &x), y * c(signs[2])),
            ];
            for (lhs, rhs) in checks {
                assert!((lhs - rhs).norm() < 1e-15, "{kind}");
            }
        }
    }

    #[test]
    fn cylindrical_round_trip() {
        for kind in [GroupKind::Su2, GroupKind::Sl2] {
            for &(phi, theta, z) in &[(0.4, 0.3, 1.2), (2.0, 5.0, -3.0), (1.3, 3.3, 6.0)] {
                let p = Cylindrical::new(phi, theta, z);
                let r = to_cylindrical(&from_cylindrical(&p, kind));
                assert!(r.singularity.is_none());
                assert_close!(r.coords.phi, phi, 1e-12);
                assert_close!(r.coords.theta, theta, 1e-12);
                assert_close!(r.coords.z, z, 1e-12);
            }
        }
    }

    #[test]
    fn chart_matches_exponential_product() {
        for kind in [GroupKind::Su2, GroupKind::Sl2] {
            let (phi, theta, z) = (0.9_f64, 2.1_f64, -1.4_f64);
            let h = alg_exp(&AlgebraVec::new(phi * theta.cos(), phi * theta.sin(), 0.0), kind);
            let v = alg_exp(&AlgebraVec::new(0.0, 0.0, z), kind);
            let g = from_cylindrical(&Cylindrical::new(phi, theta, z), kind);
            assert!((h * v).distance_max(&g) < 1e-14, "{kind}");
        }
    }

    #[test]
    fn projections_ignore_the_fiber() {
        for kind in [GroupKind::Su2, GroupKind::Sl2] {
            for z in [-5.0, -1.0, 0.0, 0.5, 3.0, 6.2] {
                let pr = project(&from_cylindrical(&Cylindrical::new(1.1, 0.7, z), kind));
                assert_close!(pr.phi, 1.1, 1e-12);
                assert_close!(pr.theta, 0.7, 1e-12);
            }
        }
    }

    #[test]
    fn singular_chart_points_are_flagged() {
        let g = alg_exp(&AlgebraVec::new(0.0, 0.0, 1.0), GroupKind::Su2);
        assert_eq!(to_cylindrical(&g).singularity, Some(ChartSingularity::Axis));
        let g = alg_exp(&AlgebraVec::new(PI, 0.0, 0.0), GroupKind::Su2);
        let g = GroupElement::from_matrix(
            GroupKind::Su2,
            Mat2::new(c(0.0), g.matrix()[(0, 1)], g.matrix()[(1, 0)], c(0.0)),
        );
        assert_eq!(to_cylindrical(&g).singularity, Some(ChartSingularity::AntipodalFiber));
    }

    #[test]
    fn sublaplacian_at_equator() {
        let s = sublaplacian_coeffs(PI / 2.0, GroupKind::Su2);
        assert_close!(s.phiphi, 1.0, 0.0);
        assert_close!(s.thetatheta, 1.0, 1e-15);
        assert_close!(s.zz, 1.0, 1e-15);
        assert_close!(s.thetaz, 2.0, 1e-15);
        assert_close!(s.phi, 0.0, 1e-15);
    }

    #[test]
    fn wrap_fiber_range() {
        assert_close!(wrap_fiber(2.0 * PI), 2.0 * PI, 0.0);
        assert_close!(wrap_fiber(-2.0 * PI), 2.0 * PI, 1e-15);
        assert_close!(wrap_fiber(5.0 * PI), PI, 1e-14);
        assert_close!(wrap_fiber(-0.3), -0.3, 1e-15);
    }
}
