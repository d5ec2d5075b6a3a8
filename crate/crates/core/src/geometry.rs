//! κ-trigonometry, signed inner and cross products, distances, projections
//! onto the constraint surfaces, and the isometry groups of S² and of the
//! Weierstrass model of H².
//!
//! Everything here is written for an arbitrary curvature κ ≠ 0. The sign
//! σ = sign(κ) selects the metric: the Euclidean dot product for κ > 0 and
//! the Lorentz product `a⊡b = aₓbₓ + a_y b_y − a_z b_z` for κ < 0.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the surface and tangency invariants.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Slack allowed on inverse-trig arguments before they are clamped.
pub const CLAMP_TOL: f64 = 1e-10;

/// Raw ambient coordinates in ℝ³ or Minkowski space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Euclidean dot product, whatever the curvature.
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_na(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_na(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Nonzero Gaussian curvature κ, in units of 1/length².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Curvature {
    kappa: f64,
}

impl Curvature {
    /// The unit sphere S².
    pub const SPHERE: Curvature = Curvature { kappa: 1.0 };
    /// The hyperbolic plane H² in the Weierstrass model.
    pub const HYPERBOLIC: Curvature = Curvature { kappa: -1.0 };

    pub fn new(kappa: f64) -> Result<Self> {
        if kappa == 0.0 || !kappa.is_finite() {
            return Err(Error::Domain(format!(
                "curvature must be finite and nonzero, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(self) -> f64 {
        self.kappa
    }

    /// σ = +1 for κ > 0 and −1 for κ < 0.
    pub fn sigma(self) -> f64 {
        if self.kappa > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_spherical(self) -> bool {
        self.kappa > 0.0
    }

    /// The curvature-dependent inner product `a⊙b`.
    pub fn inner(self, a: Vec3, b: Vec3) -> f64 {
        a.x * b.x + a.y * b.y + self.sigma() * a.z * b.z
    }

    /// The curvature-dependent cross product `a⊗b`.
    ///
    /// For κ < 0 the z-component is `a_y b_x − a_x b_y`, the negative of the
    /// Euclidean one.
    pub fn cross(self, a: Vec3, b: Vec3) -> Vec3 {
        let z = a.x * b.y - a.y * b.x;
        Vec3::new(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, self.sigma() * z)
    }

    /// `1/κ`, the value of `q⊙q` on the surface.
    pub fn surface_value(self) -> f64 {
        1.0 / self.kappa
    }

    /// Relative violation of `κ q⊙q = 1`.
    pub fn point_residual(self, q: Vec3) -> f64 {
        (self.kappa * self.inner(q, q) - 1.0).abs()
    }

    /// Normalised violation of `q⊙v = 0`.
    pub fn tangency_residual(self, q: Vec3, v: Vec3) -> f64 {
        let scale = (q.norm() * v.norm()).max(1.0);
        self.inner(q, v).abs() / scale
    }
}

impl TryFrom<f64> for Curvature {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Curvature::new(k)
    }
}

impl From<Curvature> for f64 {
    fn from(k: Curvature) -> f64 {
        k.kappa
    }
}

/// Free-function form of [`Curvature::inner`].
pub fn inner(kappa: Curvature, a: Vec3, b: Vec3) -> f64 {
    kappa.inner(a, b)
}

/// Free-function form of [`Curvature::cross`].
pub fn cross(kappa: Curvature, a: Vec3, b: Vec3) -> Vec3 {
    kappa.cross(a, b)
}

/// κ-sine. `kappa = 0` gives the Euclidean limit and is accepted here so the
/// κ → 0 continuity can be checked.
pub fn kappa_sn(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * x).sin() / r
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        (r * x).sinh() / r
    } else {
        x
    }
}

/// κ-cosine.
pub fn kappa_csn(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        (kappa.sqrt() * x).cos()
    } else if kappa < 0.0 {
        ((-kappa).sqrt() * x).cosh()
    } else {
        1.0
    }
}

/// κ-tangent.
pub fn kappa_tn(kappa: f64, x: f64) -> Result<f64> {
    let c = kappa_csn(kappa, x);
    if c == 0.0 {
        return Err(Error::Domain(format!("tn_κ has a pole at x = {x}")));
    }
    Ok(kappa_sn(kappa, x) / c)
}

/// κ-cotangent. Poles at the zeros of `sn_κ` are reported as domain errors.
pub fn kappa_ctn(kappa: f64, x: f64) -> Result<f64> {
    let at_pole = if kappa > 0.0 {
        (kappa.sqrt() * x).sin().abs() < 1e-15
    } else {
        x == 0.0
    };
    if at_pole {
        return Err(Error::Domain(format!("ctn_κ has a pole at x = {x}")));
    }
    Ok(kappa_csn(kappa, x) / kappa_sn(kappa, x))
}

/// A point satisfying `κ v⊙v = 1` (and `z > 0` when κ < 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    v: Vec3,
    curvature: Curvature,
}

impl SurfacePoint {
    /// Checks the constraint without modifying `v`.
    pub fn new(curvature: Curvature, v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite point {v}")));
        }
        if !curvature.is_spherical() && v.z <= 0.0 {
            return Err(Error::Domain(format!(
                "point {v} is not on the upper sheet z > 0"
            )));
        }
        let residual = curvature.point_residual(v);
        if residual > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                what: format!("point {v} is off the surface"),
                residual,
            });
        }
        Ok(Self { v, curvature })
    }

    pub(crate) fn from_raw(curvature: Curvature, v: Vec3) -> Self {
        Self { v, curvature }
    }

    pub fn v(&self) -> Vec3 {
        self.v
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }
}

/// A vector `v` tangent to the surface at `at`, i.e. `at⊙v = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    v: Vec3,
    at: SurfacePoint,
}

impl TangentVector {
    pub fn new(at: SurfacePoint, v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite vector {v}")));
        }
        let residual = at.curvature.tangency_residual(at.v, v);
        if residual > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                what: format!("vector {v} is not tangent at {}", at.v),
                residual,
            });
        }
        Ok(Self { v, at })
    }

    pub fn zero(at: SurfacePoint) -> Self {
        Self { v: Vec3::ZERO, at }
    }

    pub(crate) fn from_raw(at: SurfacePoint, v: Vec3) -> Self {
        Self { v, at }
    }

    pub fn v(&self) -> Vec3 {
        self.v
    }

    pub fn at(&self) -> SurfacePoint {
        self.at
    }
}

/// Validates a cosine-like argument and clamps it into range.
fn clamp_cos(c: f64, spherical: bool) -> Result<f64> {
    if spherical {
        if c.abs() > 1.0 + CLAMP_TOL || c.is_nan() {
            return Err(Error::ConstraintViolation {
                what: "arccos argument outside [-1, 1]".into(),
                residual: c.abs() - 1.0,
            });
        }
        Ok(c.clamp(-1.0, 1.0))
    } else {
        if c < 1.0 - CLAMP_TOL || c.is_nan() {
            return Err(Error::ConstraintViolation {
                what: "arccosh argument below 1".into(),
                residual: 1.0 - c,
            });
        }
        Ok(c.max(1.0))
    }
}

/// `(a⊗b)⊙(a⊗b)`, which equals `(a⊙a)(b⊙b) − (a⊙b)²` up to the sign σ.
///
/// For κ > 0 this is `|a×b|²`; for κ < 0 it is `(a⊡b)² − (a⊡a)(b⊡b)`.
/// Both are nonnegative for admissible inputs and are computed without the
/// cancellation that `1 − cos²` suffers for nearby points.
pub fn cross_gram(kappa: Curvature, a: Vec3, b: Vec3) -> f64 {
    let c = kappa.cross(a, b);
    kappa.inner(c, c).max(0.0)
}

/// Geodesic distance between two points of the surface.
pub fn distance(kappa: Curvature, a: &SurfacePoint, b: &SurfacePoint) -> Result<f64> {
    distance_from_parts(
        kappa,
        kappa.kappa * kappa.inner(a.v, b.v),
        kappa.kappa.abs() * cross_gram(kappa, a.v, b.v).sqrt(),
    )
}

/// Distance extended to the ambient space by normalising the inputs.
/// Requires `κ a⊙a > 0` and `κ b⊙b > 0`.
pub fn distance_extended(kappa: Curvature, a: Vec3, b: Vec3) -> Result<f64> {
    let na = kappa.kappa * kappa.inner(a, a);
    let nb = kappa.kappa * kappa.inner(b, b);
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::Domain(format!(
            "extended distance needs κ a⊙a > 0 and κ b⊙b > 0 (got {na}, {nb})"
        )));
    }
    let norm = na.sqrt() * nb.sqrt();
    distance_from_parts(
        kappa,
        kappa.kappa * kappa.inner(a, b) / norm,
        kappa.kappa.abs() * cross_gram(kappa, a, b).sqrt() / norm,
    )
}

/// `cos_like` is `cos(√κ d)` or `cosh(√−κ d)`, `sin_like` the matching sine.
fn distance_from_parts(kappa: Curvature, cos_like: f64, sin_like: f64) -> Result<f64> {
    let k = kappa.kappa;
    if kappa.is_spherical() {
        let c = clamp_cos(cos_like, true)?;
        Ok(sin_like.atan2(c) / k.sqrt())
    } else {
        clamp_cos(cos_like, false)?;
        Ok(sin_like.asinh() / (-k).sqrt())
    }
}

/// Rescales `a` onto the surface. For κ < 0, `a` must lie in the upper cone.
pub fn project_point(kappa: Curvature, a: Vec3) -> Result<SurfacePoint> {
    let n = kappa.kappa * kappa.inner(a, a);
    if !(n > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "cannot project {a}: κ a⊙a = {n} is not positive"
        )));
    }
    if !kappa.is_spherical() && a.z <= 0.0 {
        return Err(Error::Domain(format!(
            "cannot project {a}: not in the upper cone z > 0"
        )));
    }
    // points already on the surface to rounding are returned untouched, so
    // repeated projection is exactly idempotent
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON * (kappa.kappa.abs() * a.dot(a)).max(1.0) {
        return Ok(SurfacePoint::from_raw(kappa, a));
    }
    Ok(SurfacePoint::from_raw(kappa, a / n.sqrt()))
}

/// Removes the normal component of `v` at `q`.
pub fn project_velocity(kappa: Curvature, q: &SurfacePoint, v: Vec3) -> TangentVector {
    let qv = q.v;
    TangentVector::from_raw(*q, v - qv * (kappa.kappa * kappa.inner(qv, v)))
}

/// A linear isometry of the ambient space, stored as a 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    m: Matrix3<f64>,
}

impl Isometry {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self { m }
    }

    /// Rotation by `theta` about the z axis. On S² this is an element of
    /// SO(3); on H² it is the elliptic Lorentz rotation.
    pub fn so3_rotation_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        #[rustfmt::skip]
        let m = Matrix3::new(
            c, -s, 0.0,
            s,  c, 0.0,
            0.0, 0.0, 1.0,
        );
        Self { m }
    }

    /// Elliptic Lorentz rotation about the timelike z axis.
    pub fn elliptic(theta: f64) -> Self {
        Self::so3_rotation_z(theta)
    }

    /// Hyperbolic Lorentz rotation (boost) about the spacelike x axis.
    pub fn hyperbolic(s: f64) -> Self {
        let (sh, ch) = (s.sinh(), s.cosh());
        #[rustfmt::skip]
        let m = Matrix3::new(
            1.0, 0.0, 0.0,
            0.0, ch,  sh,
            0.0, sh,  ch,
        );
        Self { m }
    }

    /// Parabolic Lorentz rotation about the null line `x = 0, y = z`.
    pub fn parabolic(t: f64) -> Self {
        let h = 0.5 * t * t;
        #[rustfmt::skip]
        let m = Matrix3::new(
            1.0, -t,      t,
            t,   1.0 - h, h,
            t,   -h,      1.0 + h,
        );
        Self { m }
    }

    /// `P M P⁻¹`. Returns `None` when `p` is singular.
    pub fn conjugated_by(&self, p: &Isometry) -> Option<Self> {
        let inv = p.m.try_inverse()?;
        Some(Self { m: p.m * self.m * inv })
    }

    pub fn compose(&self, other: &Isometry) -> Self {
        Self { m: self.m * other.m }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::from_na(&(self.m * v.to_na()))
    }
}

/// Closed-form free motion: uniform speed along the geodesic through `q`
/// with initial velocity `v`, evaluated after time `t`.
pub fn geodesic_flow(
    kappa: Curvature,
    q: &SurfacePoint,
    v: &TangentVector,
    t: f64,
) -> (SurfacePoint, TangentVector) {
    let speed = kappa.inner(v.v, v.v).max(0.0).sqrt();
    if speed == 0.0 {
        return (*q, TangentVector::zero(*q));
    }
    let k = kappa.kappa;
    let u = v.v / speed;
    let (sn, csn) = (kappa_sn(k, speed * t), kappa_csn(k, speed * t));
    let pos = q.v * csn + u * sn;
    let vel = (q.v * (-k * sn) + u * csn) * speed;
    let p = SurfacePoint::from_raw(kappa, pos);
    (p, TangentVector::from_raw(p, vel))
}
