//! Independent oracles and the self-check suites built on them.
//!
//! Every closed form in the crate is compared here with a computation that
//! shares as little code with it as possible:
//!
//! * **bch** — algebra exponential against a scaling-and-squaring Taylor
//!   series, the conjugation identity `exp(αZ)exp(βX) = exp(β(cos α X ±
//!   sin α Y))exp(αZ)`, the first-order Campbell–Hausdorff expansion (slope of
//!   the residual in `ε`), bracket tables and group closure;
//! * **fields** — left-invariant fields against central differences of the
//!   chart along `g exp(εX)`, `g exp(εY)`, and the subLaplacian against second
//!   differences;
//! * **hessian** — distance Hessian against central second differences of the
//!   embedded distance along geodesics;
//! * **area** — swept-area derivatives against finite differences of the area
//!   swept by the connecting geodesic, integrated by Gauss–Legendre
//!   quadrature of the area form;
//! * **triangle** — triangle areas against the Gauss–Bonnet angle excess, and
//!   the fiber coordinate of `x⁻¹y` against the Heron-type area;
//! * **generator** — one-step Monte Carlo expectations of the SU(2) chart
//!   diffusion against half the subLaplacian.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::lie_group::{
    alg_exp, alg_matrix, basis, bracket, conjugate_rotate, from_cylindrical,
    left_invariant_frame, relative_cylindrical, sublaplacian_coeffs, to_cylindrical, wrap_fiber,
    AlgebraVec, Cylindrical, GroupElement, GroupKind, Mat2,
};
use crate::sde::group_bm::group_bm_step;
use crate::sde::{GaussianNoise, NoiseSource};
use crate::surface::{wrap_pi, Point, Polar, Surface, Tangent};

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm_taylor(m: &Mat2) -> Mat2 {
    let norm = m.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut term = Mat2::identity();
    let mut sum = Mat2::identity();
    for j in 1..30 {
        term = term * a * Complex64::new(1.0 / j as f64, 0.0);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Richardson-extrapolated central differences of
/// `t ↦ ρ(exp_x(tu), exp_y(tv))` at `t = 0`: `(first, second)`, with
/// truncation error `O(h⁴)`.
pub fn fd_distance_derivatives(s: &Surface, x: &Point, y: &Point, u: &Tangent, v: &Tangent, h: f64) -> (f64, f64) {
    let rho = |t: f64| s.distance(&s.exp(x, &(u * t)), &s.exp(y, &(v * t)));
    let c = rho(0.0);
    let samples = [rho(h), rho(-h), rho(2.0 * h), rho(-2.0 * h)];
    richardson(samples, c, h)
}

/// First and second derivatives at `0` from `f(±h)`, `f(±2h)` and `f(0)`.
fn richardson([p1, m1, p2, m2]: [f64; 4], c: f64, h: f64) -> (f64, f64) {
    let first = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let second = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * c) / (12.0 * h * h);
    (first, second)
}

/// The area form `ω(a, b)` at `p` (orientation of the frames: `ω(e₁, e₂) = 1`).
pub fn area_form(s: &Surface, p: &Point, a: &Tangent, b: &Tangent) -> f64 {
    s.inner(&s.rotate(p, a), b)
}

/// Area swept by the geodesic segment `[exp_x(su), exp_y(sv)]` as `s` runs
/// over `[0, t]` (negative for `t < 0`).
///
/// The sweep is parametrised by `c(s, ζ) = exp_{x(s)}(ζ log_{x(s)} y(s))`
/// and the area is `∫₀ᵗ ∫₀¹ ω(∂ζ c, ∂s c) dζ ds`, so that moving the segment
/// in the direction of `e₂` sweeps positive area.  Partial derivatives are
/// central differences; both integrals use Gauss–Legendre rules.
pub fn swept_area(s: &Surface, x: &Point, y: &Point, u: &Tangent, v: &Tangent, t: f64) -> f64 {
    let point = |si: f64, zeta: f64| {
        let xs = s.exp(x, &(u * si));
        let ys = s.exp(y, &(v * si));
        s.exp(&xs, &(s.log(&xs, &ys) * zeta))
    };
    let d = 1e-5;
    let (sn, sw) = gauss_legendre(6);
    let (zn, zw) = gauss_legendre(24);
    let mut total = 0.0;
    for (&a, &wa) in sn.iter().zip(&sw) {
        let si = a * t;
        for (&z, &wz) in zn.iter().zip(&zw) {
            let c = point(si, z);
            let dz = (point(si, z + d) - point(si, z - d)) / (2.0 * d);
            let ds = (point(si + d, z) - point(si - d, z)) / (2.0 * d);
            total += wa * wz * area_form(s, &c, &dz, &ds);
        }
    }
    total * t
}

/// Richardson-extrapolated derivatives `(first, second)` of [`swept_area`]
/// at `t = 0` (where the swept area vanishes).
pub fn fd_area_derivatives(s: &Surface, x: &Point, y: &Point, u: &Tangent, v: &Tangent, h: f64) -> (f64, f64) {
    let a = |t: f64| swept_area(s, x, y, u, v, t);
    richardson([a(h), a(-h), a(2.0 * h), a(-2.0 * h)], 0.0, h)
}

/// Interior angle at `p` of the geodesic triangle `p, x, y`.
fn vertex_angle(s: &Surface, p: &Point, x: &Point, y: &Point) -> f64 {
    let (a, b) = (s.log(p, x), s.log(p, y));
    area_form(s, p, &a, &b).abs().atan2(s.inner(&a, &b))
}

/// Area of a geodesic triangle from its angles (Gauss–Bonnet):
/// `(α + β + γ − π)/k`.
pub fn gauss_bonnet_area(s: &Surface, p: &Point, x: &Point, y: &Point) -> f64 {
    let sum = vertex_angle(s, p, x, y) + vertex_angle(s, x, y, p) + vertex_angle(s, y, p, x);
    (sum - PI) / s.k()
}

/// Area of a geodesic triangle from its side lengths via the Heron-type
/// cosine relation.
pub fn heron_area(s: &Surface, a: f64, b: f64, c: f64) -> f64 {
    2.0 * s.heron_cos_half_area(a, b, c).clamp(-1.0, 1.0).acos() / s.k().abs()
}

/// A random point, a second point at a distance drawn from `r_range` and two
/// random tangent vectors at them.
pub fn random_configuration(
    s: &Surface,
    noise: &mut GaussianNoise,
    r_range: (f64, f64),
) -> (Point, Point, Tangent, Tangent) {
    let gauss3 = |n: &mut GaussianNoise| {
        nalgebra::Vector3::new(n.standard_normal(), n.standard_normal(), n.standard_normal())
    };
    let pole = s.pole();
    let t0 = s.project_tangent(&pole, &gauss3(noise));
    let x = s.exp(&pole, &(t0 * (1.5 * noise.uniform() / s.norm(&t0))));
    let dir = s.project_tangent(&x, &gauss3(noise));
    let r = r_range.0 + (r_range.1 - r_range.0) * noise.uniform();
    let y = s.exp(&x, &(dir * (r / s.norm(&dir))));
    let u = s.project_tangent(&x, &gauss3(noise));
    let v = s.project_tangent(&y, &gauss3(noise));
    (x, y, u, v)
}

/// Chart derivatives of `g ↦ g exp(εV)` for `V = X, Y` by central differences.
pub fn fd_left_invariant_frame(g: &GroupElement, eps: f64) -> [[f64; 3]; 2] {
    let kind = g.kind();
    let base = to_cylindrical(g).coords;
    let mut out = [[0.0; 3]; 2];
    for (i, v) in [AlgebraVec::new(1.0, 0.0, 0.0), AlgebraVec::new(0.0, 1.0, 0.0)].iter().enumerate() {
        let plus = to_cylindrical(&(*g * alg_exp(&v.scale(eps), kind))).coords;
        let minus = to_cylindrical(&(*g * alg_exp(&v.scale(-eps), kind))).coords;
        let rel = |c: &Cylindrical| {
            [
                c.phi - base.phi,
                wrap_pi(c.theta - base.theta),
                wrap_fiber(c.z - base.z),
            ]
        };
        let (p, m) = (rel(&plus), rel(&minus));
        for j in 0..3 {
            out[i][j] = (p[j] - m[j]) / (2.0 * eps);
        }
    }
    out
}

/// A smooth test function on the chart with its derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ChartFunction {
    pub name: &'static str,
    /// `(φ, θ, z) ↦ (f, [f_φ, f_θ, f_z], [f_φφ, f_θθ, f_zz, f_θz])`.
    pub eval: fn(&Cylindrical) -> (f64, [f64; 3], [f64; 4]),
}

/// `cos φ`, `sin φ cos θ` and `sin φ cos(θ − z/2)`.
pub fn chart_test_functions() -> [ChartFunction; 3] {
    [
        ChartFunction {
            name: "cos(phi)",
            eval: |p| {
                let (s, c) = p.phi.sin_cos();
                (c, [-s, 0.0, 0.0], [-c, 0.0, 0.0, 0.0])
            },
        },
        ChartFunction {
            name: "sin(phi)cos(theta)",
            eval: |p| {
                let (s, c) = p.phi.sin_cos();
                let (st, ct) = p.theta.sin_cos();
                (s * ct, [c * ct, -s * st, 0.0], [-s * ct, -s * ct, 0.0, 0.0])
            },
        },
        ChartFunction {
            name: "sin(phi)cos(theta-z/2)",
            eval: |p| {
                let (s, c) = p.phi.sin_cos();
                let (sp, cp) = (p.theta - 0.5 * p.z).sin_cos();
                (
                    s * cp,
                    [c * cp, -s * sp, 0.5 * s * sp],
                    [-s * cp, -s * cp, -0.25 * s * cp, 0.5 * s * cp],
                )
            },
        },
    ]
}

/// The printed subLaplacian `X̄² + Ȳ²` applied to `f` at `p`.
pub fn apply_sublaplacian(f: &ChartFunction, p: &Cylindrical, kind: GroupKind) -> f64 {
    let c = sublaplacian_coeffs(p.phi, kind);
    let (_, g, h) = (f.eval)(p);
    c.phiphi * h[0] + c.thetatheta * h[1] + c.zz * h[2] + c.thetaz * h[3] + c.phi * g[0]
}

/// `Σ_{V = X, Y} (f(g e^{εV}) − 2 f(g) + f(g e^{−εV}))/ε²`.
pub fn fd_sublaplacian(f: &ChartFunction, g: &GroupElement, eps: f64) -> f64 {
    let kind = g.kind();
    let val = |h: &GroupElement| (f.eval)(&to_cylindrical(h).coords).0;
    let f0 = val(g);
    [AlgebraVec::new(1.0, 0.0, 0.0), AlgebraVec::new(0.0, 1.0, 0.0)]
        .iter()
        .map(|v| {
            let p = val(&(*g * alg_exp(&v.scale(eps), kind)));
            let m = val(&(*g * alg_exp(&v.scale(-eps), kind)));
            (p - 2.0 * f0 + m) / (eps * eps)
        })
        .sum()
}

/// Monte Carlo estimate of a one-step expectation against its prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub function: &'static str,
    /// Empirical mean of `f(X_dt) − f(x)` (after removing the martingale part).
    pub mean: f64,
    /// `½ (X̄² + Ȳ²) f (x) dt`.
    pub predicted: f64,
    pub se: f64,
    pub z: f64,
}

/// One-step generator check of the SU(2) chart diffusion at `start`.
///
/// The first-order term `∇f · σ ΔB` has mean zero and is subtracted as a
/// control variate; what remains has mean `½ L f dt + O(dt²)`.
pub fn generator_check(start: &Cylindrical, n_samples: u64, dt: f64, seed: u64) -> Vec<GeneratorCheck> {
    let kind = GroupKind::Su2;
    let sq = dt.sqrt();
    let (inv_sin, fib) = (1.0 / start.phi.sin(), (0.5 * start.phi).tan());
    chart_test_functions()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut noise = GaussianNoise::new(seed, i as u64);
            let (f0, g, _) = (f.eval)(start);
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..n_samples {
                let db = [sq * noise.standard_normal(), sq * noise.standard_normal()];
                let q = group_bm_step(start, kind, db, dt);
                let lin = g[0] * db[0] + (g[1] * inv_sin + g[2] * fib) * db[1];
                let d = (f.eval)(&q).0 - f0 - lin;
                sum += d;
                sum2 += d * d;
            }
            let n = n_samples as f64;
            let mean = sum / n;
            let se = ((sum2 / n - mean * mean) / n).sqrt();
            let predicted = 0.5 * apply_sublaplacian(f, start, kind) * dt;
            GeneratorCheck {
                function: f.name,
                mean,
                predicted,
                se,
                z: (mean - predicted) / se,
            }
        })
        .collect()
}

/// Result of [`triangle_z_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleZReport {
    pub n_pairs: u64,
    /// Largest `| |z(x⁻¹y)| − Heron area |` (mod 4π) for pairs with `zˣ = zʸ = 0`.
    pub max_area_error: f64,
    /// Largest error of the same identity for pairs with arbitrary fibers,
    /// after removing `zʸ − zˣ`.
    pub max_area_error_general: f64,
    /// Pairs with `sign z = sign sin(θˣ − θʸ)` (i.e. `z < 0` iff `θˣ < θʸ`
    /// for `|θˣ − θʸ| < π`).
    pub sign_matches: u64,
    /// Pairs with `sign z = −sign(θˣ − θʸ)`.
    pub opposite_sign_matches: u64,
}

/// Compares the fiber coordinate of `x⁻¹y` on SU(2) with the Heron-type area
/// of the triangle formed by the pole and the projections of `x` and `y`.
pub fn triangle_z_check(n_pairs: u64, seed: u64) -> TriangleZReport {
    let kind = GroupKind::Su2;
    let s = Surface::new(1.0).expect("unit sphere");
    let mut noise = GaussianNoise::new(seed, 0);
    let mut rep = TriangleZReport {
        n_pairs,
        max_area_error: 0.0,
        max_area_error_general: 0.0,
        sign_matches: 0,
        opposite_sign_matches: 0,
    };
    let mod4pi = |d: f64| {
        let w = wrap_fiber(d).abs();
        w.min(4.0 * PI - w)
    };
    for _ in 0..n_pairs {
        let draw = |z: bool, n: &mut GaussianNoise| {
            Cylindrical::new(
                0.01 + (PI - 0.02) * n.uniform(),
                2.0 * PI * n.uniform(),
                if z { 4.0 * PI * n.uniform() - 2.0 * PI } else { 0.0 },
            )
        };
        let (cx, cy) = (draw(false, &mut noise), draw(false, &mut noise));
        let (x, y) = (from_cylindrical(&cx, kind), from_cylindrical(&cy, kind));
        let z = relative_cylindrical(&x, &y).coords.z;
        let (px, py) = (s.embed(cx.polar()), s.embed(cy.polar()));
        let area = heron_area(&s, s.distance(&px, &py), cx.phi, cy.phi);
        rep.max_area_error = rep.max_area_error.max(mod4pi(z.abs() - area));
        let sz = z.signum();
        if sz == (cx.theta - cy.theta).sin().signum() {
            rep.sign_matches += 1;
        }
        if sz == -(cx.theta - cy.theta).signum() {
            rep.opposite_sign_matches += 1;
        }

        let (gx, gy) = (draw(true, &mut noise), draw(true, &mut noise));
        let (x, y) = (from_cylindrical(&gx, kind), from_cylindrical(&gy, kind));
        let zr = crate::lie_group::pole_triangle_z(&x, &y);
        let (px, py) = (s.embed(gx.polar()), s.embed(gy.polar()));
        let area = heron_area(&s, s.distance(&px, &py), gx.phi, gy.phi);
        rep.max_area_error_general = rep.max_area_error_general.max(mod4pi(zr.abs() - area));
    }
    rep
}

/// Residual of `exp(αZ) exp(βX) = exp(β(cos α X ± sin α Y)) exp(αZ)`.
pub fn conjugation_residual(alpha: f64, beta: f64, kind: GroupKind) -> f64 {
    let za = alg_exp(&AlgebraVec::new(0.0, 0.0, alpha), kind);
    let lhs = za * alg_exp(&AlgebraVec::new(beta, 0.0, 0.0), kind);
    let rhs = alg_exp(&conjugate_rotate(alpha, beta, kind), kind) * za;
    lhs.distance_max(&rhs)
}

/// Residual of the first-order expansion
/// `exp(αu) exp(εβv) ≈ exp(αu + ε(βα/2)(cot(α/2) v + w))`
/// with `u = Z`, `v = X`, `w = [u, v]`.
pub fn bch_first_order_residual(alpha: f64, beta: f64, eps: f64, kind: GroupKind) -> f64 {
    let [x, _, z] = basis(kind);
    let w = bracket(&z, &x);
    let r = |m: f64| Complex64::new(m, 0.0);
    let lhs = expm_taylor(&(z * r(alpha))) * expm_taylor(&(x * r(eps * beta)));
    let gen = z * r(alpha) + (x * r(1.0 / (0.5 * alpha).tan()) + w) * r(eps * beta * alpha * 0.5);
    let rhs = expm_taylor(&gen);
    (lhs - rhs).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// The oracle suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Bch,
    Fields,
    Hessian,
    Area,
    Triangle,
    Generator,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Bch,
        Suite::Fields,
        Suite::Hessian,
        Suite::Area,
        Suite::Triangle,
        Suite::Generator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bch => "bch",
            Suite::Fields => "fields",
            Suite::Hessian => "hessian",
            Suite::Area => "area",
            Suite::Triangle => "triangle",
            Suite::Generator => "generator",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CouplingError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CouplingError::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Sample sizes of the suites.  Tolerances are the same in every profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TolProfile {
    /// Full sample sizes.
    Default,
    /// One tenth of the samples, for smoke tests.
    Quick,
}

impl TolProfile {
    fn count(self, n: u64) -> u64 {
        match self {
            TolProfile::Default => n,
            TolProfile::Quick => (n / 10).max(1),
        }
    }
}

impl FromStr for TolProfile {
    type Err = CouplingError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(TolProfile::Default),
            "quick" => Ok(TolProfile::Quick),
            _ => Err(CouplingError::InvalidParameter(format!("unknown tolerance profile '{s}'"))),
        }
    }
}

/// One check inside a suite: `error ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }
}

/// Results of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Relative error with a floor on the denominator.
pub fn rel_err(value: f64, reference: f64, floor: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(floor)
}

const KINDS: [GroupKind; 2] = [GroupKind::Su2, GroupKind::Sl2];

fn random_cyl(kind: GroupKind, n: &mut GaussianNoise) -> Cylindrical {
    let phi_max = match kind {
        GroupKind::Su2 => PI - 0.2,
        GroupKind::Sl2 => 2.5,
    };
    Cylindrical::new(
        0.2 + (phi_max - 0.2) * n.uniform(),
        2.0 * PI * n.uniform(),
        4.0 * PI * n.uniform() - 2.0 * PI,
    )
}

fn suite_bch(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let n = profile.count(1000);
    let mut noise = GaussianNoise::new(seed, 1);
    let mut out = Vec::new();
    for kind in KINDS {
        let mut conj = 0.0f64;
        let mut expm = 0.0f64;
        let mut closure = 0.0f64;
        for _ in 0..n {
            let alpha = 2.0 * PI * noise.uniform() - PI;
            let beta = 4.0 * noise.uniform() - 2.0;
            conj = conj.max(conjugation_residual(alpha, beta, kind));
            let v = AlgebraVec::new(
                2.0 * noise.standard_normal(),
                2.0 * noise.standard_normal(),
                2.0 * noise.standard_normal(),
            );
            let closed = alg_exp(&v, kind);
            let oracle = expm_taylor(&alg_matrix(&v, kind));
            let scale = oracle.iter().map(|c| c.norm()).fold(1.0, f64::max);
            expm = expm.max((closed.matrix() - oracle).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale);
            let g = from_cylindrical(&random_cyl(kind, &mut noise), kind);
            let h = from_cylindrical(&random_cyl(kind, &mut noise), kind);
            let gh = g * h;
            let det = gh.matrix().determinant();
            closure = closure
                .max((det - Complex64::new(1.0, 0.0)).norm())
                .max((gh * gh.inverse()).distance_max(&GroupElement::identity(kind)));
        }
        out.push(CheckResult::new(format!("{kind}: exp(aZ)exp(bX) conjugation identity"), conj, 1e-12));
        out.push(CheckResult::new(format!("{kind}: closed-form exp vs Taylor oracle (relative)"), expm, 1e-12));
        out.push(CheckResult::new(format!("{kind}: det and inverse residuals"), closure, 1e-12));

        let [x, y, z] = basis(kind);
        let sign = match kind {
            GroupKind::Su2 => 1.0,
            GroupKind::Sl2 => -1.0,
        };
        let r = |m: f64| Complex64::new(m, 0.0);
        let table = [
            bracket(&x, &y) - z,
            bracket(&y, &z) - x * r(sign),
            bracket(&z, &x) - y * r(sign),
        ];
        let worst = table
            .iter()
            .flat_map(|m| m.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        out.push(CheckResult::new(format!("{kind}: bracket table"), worst, 1e-15));

        let (alpha, beta) = (1.1, 0.7);
        let e = 1e-3;
        let slope = (bch_first_order_residual(alpha, beta, e, kind)
            / bch_first_order_residual(alpha, beta, 0.5 * e, kind))
        .log2();
        out.push(CheckResult::new(
            format!("{kind}: first-order Campbell-Hausdorff residual slope (|slope - 2|)"),
            (slope - 2.0).abs(),
            0.1,
        ));
    }
    out
}

fn suite_fields(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let n = profile.count(1000);
    let mut noise = GaussianNoise::new(seed, 2);
    let mut out = Vec::new();
    for kind in KINDS {
        let mut err_frame = 0.0f64;
        let mut err_lap = 0.0f64;
        for i in 0..n {
            let p = random_cyl(kind, &mut noise);
            let g = from_cylindrical(&p, kind);
            let exact = left_invariant_frame(&p, kind);
            let fd = fd_left_invariant_frame(&g, 1e-5);
            for a in 0..2 {
                for b in 0..3 {
                    err_frame = err_frame.max((exact[a][b] - fd[a][b]).abs());
                }
            }
            if i % 10 == 0 {
                for f in chart_test_functions() {
                    let exact = apply_sublaplacian(&f, &p, kind);
                    err_lap = err_lap.max((exact - fd_sublaplacian(&f, &g, 1e-4)).abs());
                }
            }
        }
        out.push(CheckResult::new(format!("{kind}: left-invariant fields vs finite differences"), err_frame, 1e-6));
        out.push(CheckResult::new(format!("{kind}: subLaplacian vs second differences"), err_lap, 1e-5));
    }
    out
}

fn suite_hessian(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let n = profile.count(1000);
    let mut out = Vec::new();
    for (j, (k, range)) in [(1.0, (0.3, PI - 0.3)), (-1.0, (0.3, 3.0)), (0.0, (0.3, 3.0))]
        .into_iter()
        .enumerate()
    {
        let s = Surface::new(k).expect("valid curvature");
        let mut noise = GaussianNoise::new(seed, 10 + j as u64);
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let (x, y, u, v) = random_configuration(&s, &mut noise, range);
            let exact = s.distance_derivatives(&x, &y, &u, &v).expect("interior configuration");
            let (d1, d2) = fd_distance_derivatives(&s, &x, &y, &u, &v, 1e-3);
            let scale = 1e-3 * (s.inner(&u, &u) + s.inner(&v, &v));
            e1 = e1.max(rel_err(d1, exact.d_rho, scale));
            e2 = e2.max(rel_err(d2, exact.hess, scale));
        }
        out.push(CheckResult::new(format!("k={k}: distance gradient vs finite differences (relative)"), e1, 1e-5));
        out.push(CheckResult::new(format!("k={k}: distance Hessian vs finite differences (relative)"), e2, 1e-5));
    }
    out
}

fn suite_area(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let n = profile.count(200);
    let mut out = Vec::new();
    for (j, (k, range)) in [(1.0, (0.3, PI - 0.3)), (-1.0, (0.3, 3.0)), (0.0, (0.3, 3.0))]
        .into_iter()
        .enumerate()
    {
        let s = Surface::new(k).expect("valid curvature");
        let mut noise = GaussianNoise::new(seed, 20 + j as u64);
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let (x, y, u, v) = random_configuration(&s, &mut noise, range);
            let exact = s.area_derivatives(&x, &y, &u, &v).expect("interior configuration");
            let (d1, d2) = fd_area_derivatives(&s, &x, &y, &u, &v, 1e-3);
            let scale = 1e-3 * (s.inner(&u, &u) + s.inner(&v, &v));
            e1 = e1.max(rel_err(d1, exact.d_a, scale));
            e2 = e2.max(rel_err(d2, exact.hess_a, scale));
        }
        out.push(CheckResult::new(format!("k={k}: dA vs swept-area finite differences (relative)"), e1, 1e-3));
        out.push(CheckResult::new(format!("k={k}: Hess A vs swept-area finite differences (relative)"), e2, 1e-3));
    }
    out
}

fn suite_triangle(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let n = profile.count(1000);
    let mut out = Vec::new();
    for (j, k) in [1.0, -1.0].into_iter().enumerate() {
        let s = Surface::new(k).expect("valid curvature");
        let mut noise = GaussianNoise::new(seed, 30 + j as u64);
        let (mut e_gb, mut e_heron) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let (p, x, _, _) = random_configuration(&s, &mut noise, (0.2, 2.0));
            let (_, y, _, _) = random_configuration(&s, &mut noise, (0.2, 2.0));
            let area = s.triangle_area(&p, &x, &y);
            if area < 1e-3 {
                continue;
            }
            e_gb = e_gb.max(rel_err(area, gauss_bonnet_area(&s, &p, &x, &y).abs(), 1e-3));
            let heron = heron_area(&s, s.distance(&x, &y), s.distance(&p, &y), s.distance(&p, &x));
            e_heron = e_heron.max(rel_err(area, heron, 1e-3));
        }
        out.push(CheckResult::new(format!("k={k}: triangle area vs Gauss-Bonnet (relative)"), e_gb, 1e-8));
        out.push(CheckResult::new(format!("k={k}: triangle area vs Heron cosine form (relative)"), e_heron, 1e-8));
    }
    let rep = triangle_z_check(n, seed);
    out.push(CheckResult::new("su2: |z(x^-1 y)| vs Heron area mod 4pi", rep.max_area_error, 1e-9));
    out.push(CheckResult::new(
        "su2: z(x^-1 y) - (z_y - z_x) vs Heron area mod 4pi",
        rep.max_area_error_general,
        1e-9,
    ));
    out.push(CheckResult::new(
        "su2: pairs violating sign z = sign sin(theta_x - theta_y)",
        (rep.n_pairs - rep.sign_matches) as f64,
        0.0,
    ));
    let s = Surface::new(1.0).expect("unit sphere");
    let octant = s.triangle_area(
        &s.pole(),
        &s.embed(Polar { phi: PI / 2.0, theta: 0.0 }),
        &s.embed(Polar { phi: PI / 2.0, theta: PI / 2.0 }),
    );
    out.push(CheckResult::new("k=1: octant area", (octant - PI / 2.0).abs(), 1e-14));
    out
}

fn suite_generator(profile: TolProfile, seed: u64) -> Vec<CheckResult> {
    let start = Cylindrical::new(1.0, 0.7, 0.3);
    generator_check(&start, profile.count(1_000_000), 1e-4, seed)
        .into_iter()
        .map(|c| CheckResult::new(format!("su2 one-step generator, f = {} (|z|)", c.function), c.z.abs(), 3.0))
        .collect()
}

/// Runs one suite.
pub fn run_suite(suite: Suite, profile: TolProfile, seed: u64) -> SuiteReport {
    let checks = match suite {
        Suite::Bch => suite_bch(profile, seed),
        Suite::Fields => suite_fields(profile, seed),
        Suite::Hessian => suite_hessian(profile, seed),
        Suite::Area => suite_area(profile, seed),
        Suite::Triangle => suite_triangle(profile, seed),
        Suite::Generator => suite_generator(profile, seed),
    };
    SuiteReport { suite, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        assert_close!(integral, 1.0 / 12.0, 1e-14);
        assert_close!(w.iter().sum::<f64>(), 1.0, 1e-14);
    }

    #[test]
    fn taylor_oracle_matches_diagonal_exponential() {
        let m = Mat2::new(
            Complex64::new(0.0, 1.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.5),
        );
        let e = expm_taylor(&m);
        assert!((e[(0, 0)] - Complex64::from_polar(1.0, 1.5)).norm() < 1e-14);
    }

    #[test]
    fn quarter_turn_conjugation_instance() {
        // exp((π/2)Z) exp(X) = exp(Y) exp((π/2)Z) on SU(2).
        let k = GroupKind::Su2;
        let za = alg_exp(&AlgebraVec::new(0.0, 0.0, PI / 2.0), k);
        let lhs = za * alg_exp(&AlgebraVec::new(1.0, 0.0, 0.0), k);
        let rhs = alg_exp(&AlgebraVec::new(0.0, 1.0, 0.0), k) * za;
        assert!(lhs.distance_max(&rhs) < 1e-14);
    }

    #[test]
    fn swept_area_of_a_sliding_segment_in_the_plane() {
        // Translating a unit segment along e₂ by t sweeps area t.
        let s = Surface::new(0.0).unwrap();
        let x = nalgebra::Vector3::new(0.0, 0.0, 0.0);
        let y = nalgebra::Vector3::new(1.0, 0.0, 0.0);
        let up = nalgebra::Vector3::new(0.0, 1.0, 0.0);
        assert_close!(swept_area(&s, &x, &y, &up, &up, 0.3), 0.3, 1e-9);
    }

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::Bch, Suite::Fields, Suite::Triangle] {
            let rep = run_suite(suite, TolProfile::Quick, 1);
            assert!(rep.passed(), "{rep:#?}");
        }
    }
}
