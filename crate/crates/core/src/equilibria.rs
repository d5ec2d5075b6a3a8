//! Fixed points and relative equilibria: constructors, the algebraic
//! equations for their angular velocity, a root scanner for those equations
//! and trajectory-level checks.
//!
//! The relative-equilibrium families are written for κ = ±1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{max_distance_drift, plane_fit, unwrap_phase};
use crate::dynamics::{acceleration, grad_force_function, SystemState};
use crate::error::{Error, Result};
use crate::geometry::{Curvature, Isometry, Vec3};
use crate::integrate::TrajectorySample;
use crate::par::{self, Execution};
use crate::singularities::SingularityKind;

fn unit_curvature(k: Curvature) -> Result<()> {
    if k.kappa().abs() != 1.0 {
        return Err(Error::Domain(format!(
            "relative equilibria are provided for κ = ±1 only, got {}",
            k.kappa()
        )));
    }
    Ok(())
}

/// Equal masses at the vertices of a regular n-gon on the equator of the
/// unit sphere, at rest. Only odd n is allowed: an even polygon on a great
/// circle contains antipodal pairs.
pub fn fixed_point_ngon(n: usize, m: f64) -> Result<SystemState> {
    if n < 3 {
        return Err(Error::Domain(format!("an n-gon needs n ≥ 3, got {n}")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "a regular {n}-gon on a great circle has {} antipodal pairs",
            n / 2
        )));
    }
    let q: Vec<Vec3> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Vec3::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    SystemState::projected(Curvature::SPHERE, &vec![m; n], &q, &vec![Vec3::ZERO; n])
}

/// Four equal masses at the vertices of a regular tetrahedron inscribed in
/// the unit sphere, at rest.
pub fn fixed_point_tetrahedron(m: f64) -> Result<SystemState> {
    let (r6, r2) = (6f64.sqrt(), 2f64.sqrt());
    let q = [
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 2.0 * r2 / 3.0, -1.0 / 3.0),
        Vec3::new(-2.0 / r6, -r2 / 3.0, -1.0 / 3.0),
        Vec3::new(2.0 / r6, -r2 / 3.0, -1.0 / 3.0),
    ];
    SystemState::projected(Curvature::SPHERE, &[m; 4], &q, &[Vec3::ZERO; 4])
}

/// True iff every momentum and every gradient has norm below `tol`.
pub fn is_fixed_point(state: &SystemState, tol: f64) -> bool {
    (0..state.len()).all(|i| {
        state.bodies()[i].p().norm() < tol
            && grad_force_function(state, i).is_ok_and(|g| g.norm() < tol)
    })
}

/// A body and the component of its force certifying that the configuration
/// is not fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub certificate: f64,
}

pub const WITNESS_TOL: f64 = 1e-12;

fn at_rest(state: &SystemState) -> Result<()> {
    if state.bodies().iter().any(|b| b.p().norm() != 0.0) {
        return Err(Error::Precondition("bodies must be at rest".into()));
    }
    Ok(())
}

/// For bodies on a closed hemisphere `z ≥ 0` of the sphere, not all on its
/// boundary: a lowest body whose force has a strictly positive z-component.
pub fn hemisphere_no_fixed_point_witness(state: &SystemState) -> Result<Witness> {
    if !state.curvature().is_spherical() {
        return Err(Error::Precondition("the hemisphere witness needs κ > 0".into()));
    }
    at_rest(state)?;
    let q = state.positions();
    if q.iter().any(|v| v.z < 0.0) {
        return Err(Error::Precondition("all bodies must satisfy z ≥ 0".into()));
    }
    if !q.iter().any(|v| v.z > 0.0) {
        return Err(Error::Precondition("at least one body needs z > 0".into()));
    }
    let zmin = q.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
    let mut best: Option<Witness> = None;
    for (i, v) in q.iter().enumerate() {
        if v.z != zmin {
            continue;
        }
        let g = grad_force_function(state, i)?;
        if best.is_none_or(|b| g.z > b.certificate) {
            best = Some(Witness { index: i, certificate: g.z });
        }
    }
    let w = best.expect("some body attains the minimum");
    if w.certificate > WITNESS_TOL {
        Ok(w)
    } else {
        Err(Error::Precondition(format!(
            "no positive certificate (best {:e})",
            w.certificate
        )))
    }
}

/// On the hyperboloid: the highest body, which accelerates downward. The
/// certificate is `−z̈`.
pub fn hyperbolic_no_fixed_point_witness(state: &SystemState) -> Result<Witness> {
    if state.curvature().is_spherical() {
        return Err(Error::Precondition("the hyperboloid witness needs κ < 0".into()));
    }
    if state.len() < 2 {
        return Err(Error::Precondition("need at least two bodies".into()));
    }
    at_rest(state)?;
    let acc = acceleration(state)?;
    let q = state.positions();
    let zmax = q.iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max);
    let w = q
        .iter()
        .enumerate()
        .filter(|(_, v)| v.z == zmax)
        .map(|(i, _)| Witness { index: i, certificate: -acc[i].z })
        .max_by(|a, b| a.certificate.total_cmp(&b.certificate))
        .expect("some body attains the maximum");
    if w.certificate > WITNESS_TOL {
        Ok(w)
    } else {
        Err(Error::Precondition(format!(
            "no positive certificate (best {:e})",
            w.certificate
        )))
    }
}

/// `ω²/m` for a regular n-gon of equal masses m rotating about the z axis
/// at height z. On the sphere `z ∈ (−1, 1)`, on the hyperboloid `z > 1`.
pub fn ngon_omega_sq_over_m(k: Curvature, n: usize, z: f64) -> Result<f64> {
    unit_curvature(k)?;
    if n < 2 {
        return Err(Error::Domain(format!("need n ≥ 2, got {n}")));
    }
    let s = n / 2;
    let even = n.is_multiple_of(2);
    let last = if even { s - 1 } else { s };
    let alpha = |j: usize| 2.0 * PI * j as f64 / n as f64;
    if k.is_spherical() {
        if !(z > -1.0 && z < 1.0) {
            return Err(Error::Domain(format!("z must lie in (−1, 1), got {z}")));
        }
        if even && z == 0.0 {
            return Err(Error::Singular { i: 0, j: s, kind: SingularityKind::Antipodal });
        }
        let r2 = 1.0 - z * z;
        let mut sum = 0.0;
        for j in 1..=last {
            let c = 1.0 - alpha(j).cos();
            sum += 2.0 / (c.sqrt() * r2.powf(1.5) * (2.0 - c * r2).powf(1.5));
        }
        if even {
            sum += 1.0 / (4.0 * z * z * z.abs() * r2.powf(1.5));
        }
        Ok(sum)
    } else {
        if !(z > 1.0) {
            return Err(Error::Domain(format!("z must exceed 1, got {z}")));
        }
        let rho2 = z * z - 1.0;
        let rho3 = rho2.powf(1.5);
        let mut sum = 0.0;
        for j in 1..=last {
            let c = 1.0 - alpha(j).cos();
            sum += 2.0 / (c.sqrt() * rho3 * (2.0 + rho2 * c).powf(1.5));
        }
        if even {
            sum += 1.0 / (4.0 * z * z * z * rho3);
        }
        Ok(sum)
    }
}

/// `ω²` for the collinear configuration with mass `m` at the vertex
/// `(0, 0, 1)` and two masses `big_m` at `(±r, 0, z)`.
pub fn eulerian_omega_sq(k: Curvature, z: f64, m: f64, big_m: f64) -> Result<f64> {
    unit_curvature(k)?;
    if k.is_spherical() {
        if z == 0.0 {
            return Err(Error::Singular { i: 1, j: 2, kind: SingularityKind::Antipodal });
        }
        if !(z > -1.0 && z < 1.0) {
            return Err(Error::Domain(format!("z must lie in (−1, 0) ∪ (0, 1), got {z}")));
        }
        Ok((4.0 * m * z + big_m / z.abs()) / (4.0 * z * z * (1.0 - z * z).powf(1.5)))
    } else {
        if !(z > 1.0) {
            return Err(Error::Domain(format!("z must exceed 1, got {z}")));
        }
        Ok((4.0 * m * z * z + big_m) / (4.0 * z.powi(3) * (z * z - 1.0).powf(1.5)))
    }
}

/// `ω²` for the hyperbolic rotation with mass `m` on the geodesic `x = 0`
/// and two masses `big_m` on the equidistant curves `x = ±x`.
pub fn hyperbolic_re_omega_sq(x: f64, m: f64, big_m: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and nonzero, got {x}")));
    }
    let rho = (1.0 + x * x).sqrt();
    let ax3 = x * x * x.abs();
    Ok(m / (ax3 * rho) + big_m / (4.0 * ax3 * rho.powi(3)))
}

/// The equations handled by [`solve_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "id")]
pub enum RootEquation {
    /// Equilateral triangle at height z on the sphere.
    Eq4,
    /// Equilateral triangle at height z on the hyperboloid.
    Eq5,
    /// Equal-mass collinear configuration on the sphere, as a function of z.
    Ratio1,
    /// Equal-mass collinear configuration on the hyperboloid.
    Ratio2,
    /// Equal-mass hyperbolic rotation, as a function of x.
    Eq7,
    /// Regular n-gon at height z.
    Ngon { kappa: i8, n: usize },
}

impl RootEquation {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "eq4" => RootEquation::Eq4,
            "eq5" => RootEquation::Eq5,
            "ratio1" => RootEquation::Ratio1,
            "ratio2" => RootEquation::Ratio2,
            "eq7" => RootEquation::Eq7,
            other => {
                // ngon:<kappa>:<n>
                let parts: Vec<&str> = other.split(':').collect();
                match parts.as_slice() {
                    ["ngon", k, n] => RootEquation::Ngon {
                        kappa: k.parse().map_err(|_| Error::Domain(format!("bad κ in {other}")))?,
                        n: n.parse().map_err(|_| Error::Domain(format!("bad n in {other}")))?,
                    },
                    _ => return Err(Error::Domain(format!("unknown equation {other}"))),
                }
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            RootEquation::Eq4 => "eq4".into(),
            RootEquation::Eq5 => "eq5".into(),
            RootEquation::Ratio1 => "ratio1".into(),
            RootEquation::Ratio2 => "ratio2".into(),
            RootEquation::Eq7 => "eq7".into(),
            RootEquation::Ngon { kappa, n } => format!("ngon:{kappa}:{n}"),
        }
    }

    /// Left-hand side `ω²/m` as a function of the height (or x).
    pub fn eval(&self, v: f64) -> Result<f64> {
        match *self {
            RootEquation::Eq4 => {
                if !(v > -1.0 && v < 1.0) {
                    return Err(Error::Domain(format!("z must lie in (−1, 1), got {v}")));
                }
                let p = 1.0 + 2.0 * v * v - 3.0 * v.powi(4);
                Ok(8.0 / (3f64.sqrt() * p.powf(1.5)))
            }
            RootEquation::Eq5 => {
                if !(v > 1.0) {
                    return Err(Error::Domain(format!("z must exceed 1, got {v}")));
                }
                let p = 3.0 * v.powi(4) - 2.0 * v * v - 1.0;
                Ok(8.0 / (3f64.sqrt() * p.powf(1.5)))
            }
            RootEquation::Ratio1 => eulerian_omega_sq(Curvature::SPHERE, v, 1.0, 1.0),
            RootEquation::Ratio2 => eulerian_omega_sq(Curvature::HYPERBOLIC, v, 1.0, 1.0),
            RootEquation::Eq7 => hyperbolic_re_omega_sq(v, 1.0, 1.0),
            RootEquation::Ngon { kappa, n } => {
                ngon_omega_sq_over_m(Curvature::new(kappa as f64)?, n, v)
            }
        }
    }

    /// Open interval scanned when the caller gives none.
    pub fn default_range(&self) -> (f64, f64) {
        match *self {
            RootEquation::Eq4 | RootEquation::Ratio1 => (-1.0, 1.0),
            RootEquation::Eq5 | RootEquation::Ratio2 => (1.0, 20.0),
            RootEquation::Eq7 => (-20.0, 20.0),
            RootEquation::Ngon { kappa, .. } if kappa > 0 => (-1.0, 1.0),
            RootEquation::Ngon { .. } => (1.0, 20.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
    /// The left-hand side touches the target without crossing it.
    pub tangency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    pub equation: RootEquation,
    pub target: f64,
    pub range: (f64, f64),
    pub roots: Vec<Root>,
}

impl RootScan {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

/// Roots accepted by the scanner have residual below this.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Roots closer than this are merged.
const ROOT_MERGE_TOL: f64 = 1e-6;

/// Finds all roots of `lhs(v) = target` on the open interval `range`.
///
/// The interval is sampled on `grid` cell midpoints (so open endpoints and
/// symmetric poles are never evaluated). Sign changes are bisected to
/// machine precision; discrete extrema are refined by golden-section search
/// and reported as tangency roots when they touch the target. Candidates
/// whose residual is not below 1e-10, such as brackets around a pole, are
/// dropped.
pub fn solve_roots(
    eq: RootEquation,
    target: f64,
    range: Option<(f64, f64)>,
    grid: usize,
) -> Result<RootScan> {
    solve_roots_with(eq, target, range, grid, Execution::default())
}

pub fn solve_roots_with(
    eq: RootEquation,
    target: f64,
    range: Option<(f64, f64)>,
    grid: usize,
    exec: Execution,
) -> Result<RootScan> {
    let (lo, hi) = range.unwrap_or_else(|| eq.default_range());
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("empty scan range ({lo}, {hi})")));
    }
    if grid < 3 {
        return Err(Error::Domain(format!("grid needs at least 3 cells, got {grid}")));
    }
    let step = (hi - lo) / grid as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let resid = |v: f64| eq.eval(v).map(|f| f - target).ok().filter(|r| r.is_finite());
    let rs: Vec<Option<f64>> = par::map(exec, &xs, |&v| resid(v));

    let mut found: Vec<Root> = Vec::new();
    for i in 0..grid {
        let Some(ri) = rs[i] else { continue };
        if ri == 0.0 {
            found.push(Root { value: xs[i], residual: 0.0, tangency: false });
        }
        if i + 1 < grid {
            if let Some(rn) = rs[i + 1] {
                if ri * rn < 0.0 {
                    if let Some(r) = bisect(&resid, xs[i], xs[i + 1], ri) {
                        found.push(r);
                    }
                }
            }
        }
        if i >= 1 && i + 1 < grid {
            if let (Some(rp), Some(rn)) = (rs[i - 1], rs[i + 1]) {
                let (d0, d1) = (ri - rp, rn - ri);
                if d0 * d1 < 0.0 || (d0 == 0.0) != (d1 == 0.0) {
                    let is_min = d0 < 0.0 || d1 > 0.0;
                    if let Some(r) = extremum(&resid, xs[i - 1], xs[i + 1], is_min) {
                        found.push(r);
                    }
                }
            }
        }
    }

    found.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut roots: Vec<Root> = Vec::new();
    for r in found {
        match roots.last_mut() {
            Some(prev) if (r.value - prev.value).abs() < ROOT_MERGE_TOL => {
                prev.tangency |= r.tangency;
                if r.residual.abs() < prev.residual.abs() {
                    prev.value = r.value;
                    prev.residual = r.residual;
                }
            }
            _ => roots.push(r),
        }
    }
    Ok(RootScan { equation: eq, target, range: (lo, hi), roots })
}

fn bisect<F: Fn(f64) -> Option<f64>>(f: &F, mut a: f64, mut b: f64, fa: f64) -> Option<Root> {
    let sa = fa.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let (v, r) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    (r.abs() < ROOT_RESIDUAL_TOL).then_some(Root { value: v, residual: r, tangency: false })
}

/// Golden-section search for a local extremum of `f` on `[a, b]`; returns
/// it as a tangency root if it touches zero.
fn extremum<F: Fn(f64) -> Option<f64>>(f: &F, mut a: f64, mut b: f64, is_min: bool) -> Option<Root> {
    let sign = if is_min { 1.0 } else { -1.0 };
    let g = |v: f64| f(v).map(|r| sign * r);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = g(d)?;
        }
    }
    let v = 0.5 * (a + b);
    let r = f(v)?;
    (r.abs() < ROOT_RESIDUAL_TOL).then_some(Root { value: v, residual: r, tangency: true })
}

/// Height and phase of one body of an elliptic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticBody {
    pub z: f64,
    pub alpha: f64,
}

/// Uniform rotation about the z axis: body i sits at height zᵢ and angle
/// `αᵢ + ωt`. The radius is `(1 − zᵢ²)^{1/2}` on the sphere and
/// `(zᵢ² − 1)^{1/2}` on the hyperboloid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticREParams {
    pub curvature: Curvature,
    pub bodies: Vec<EllipticBody>,
    pub omega: f64,
}

/// Constant x and phase of one body of a hyperbolic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicBody {
    pub x: f64,
    pub alpha: f64,
}

/// Boost about the x axis on the hyperboloid: body i at
/// `(xᵢ, ρᵢ sinh(ωt + αᵢ), ρᵢ cosh(ωt + αᵢ))` with `ρᵢ = (1 + xᵢ²)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicREParams {
    pub bodies: Vec<HyperbolicBody>,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum REParams {
    Elliptic(EllipticREParams),
    Hyperbolic(HyperbolicREParams),
}

impl REParams {
    pub fn kind(&self) -> REKind {
        match self {
            REParams::Elliptic(_) => REKind::Elliptic,
            REParams::Hyperbolic(_) => REKind::Hyperbolic,
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            REParams::Elliptic(p) => p.omega,
            REParams::Hyperbolic(p) => p.omega,
        }
    }

    pub fn curvature(&self) -> Curvature {
        match self {
            REParams::Elliptic(p) => p.curvature,
            REParams::Hyperbolic(_) => Curvature::HYPERBOLIC,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            REParams::Elliptic(p) => p.bodies.len(),
            REParams::Hyperbolic(p) => p.bodies.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact positions and velocities at time t.
    pub fn kinematics(&self, t: f64) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
        match self {
            REParams::Elliptic(p) => {
                unit_curvature(p.curvature)?;
                let mut q = Vec::new();
                let mut v = Vec::new();
                for b in &p.bodies {
                    let r = if p.curvature.is_spherical() {
                        if !(b.z.abs() <= 1.0) {
                            return Err(Error::Domain(format!("height {} is off the sphere", b.z)));
                        }
                        (1.0 - b.z * b.z).sqrt()
                    } else {
                        if !(b.z >= 1.0) {
                            return Err(Error::Domain(format!("height {} is below the vertex", b.z)));
                        }
                        (b.z * b.z - 1.0).sqrt()
                    };
                    let (sa, ca) = quarter_exact_sin_cos(b.alpha);
                    let (st, ct) = (p.omega * t).sin_cos();
                    let (x0, y0) = (r * ca, r * sa);
                    let pos = Vec3::new(x0 * ct - y0 * st, x0 * st + y0 * ct, b.z);
                    q.push(pos);
                    v.push(Vec3::new(-pos.y, pos.x, 0.0) * p.omega);
                }
                Ok((q, v))
            }
            REParams::Hyperbolic(p) => {
                let mut q = Vec::new();
                let mut v = Vec::new();
                for b in &p.bodies {
                    let rho = (1.0 + b.x * b.x).sqrt();
                    let a = p.omega * t + b.alpha;
                    let pos = Vec3::new(b.x, rho * a.sinh(), rho * a.cosh());
                    q.push(pos);
                    v.push(Vec3::new(0.0, pos.z, pos.y) * p.omega);
                }
                Ok((q, v))
            }
        }
    }

    /// Exact accelerations at time t.
    pub fn analytic_acceleration(&self, t: f64) -> Result<Vec<Vec3>> {
        let (q, _) = self.kinematics(t)?;
        let w2 = self.omega() * self.omega();
        Ok(match self {
            REParams::Elliptic(_) => q.iter().map(|p| Vec3::new(-p.x, -p.y, 0.0) * w2).collect(),
            REParams::Hyperbolic(_) => q.iter().map(|p| Vec3::new(0.0, p.y, p.z) * w2).collect(),
        })
    }

    pub fn state_at(&self, masses: &[f64], t: f64) -> Result<SystemState> {
        if masses.len() != self.len() {
            return Err(Error::Domain(format!(
                "{} masses for {} bodies",
                masses.len(),
                self.len()
            )));
        }
        let (q, v) = self.kinematics(t)?;
        Ok(SystemState::projected(self.curvature(), masses, &q, &v)?.with_time(t))
    }

    /// Largest component difference between `acceleration()` of the exact
    /// state and the exact acceleration, over the given times. Each
    /// difference is divided by `max(1, |a|)`, since hyperbolic orbits reach
    /// coordinates of order `cosh(ωt)`.
    pub fn residual(&self, masses: &[f64], times: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &t in times {
            let s = self.state_at(masses, t)?;
            let a = acceleration(&s)?;
            for (x, y) in a.iter().zip(self.analytic_acceleration(t)?) {
                worst = worst.max((*x - y).max_abs() / y.norm().max(1.0));
            }
        }
        Ok(worst)
    }
}

/// `sin_cos` that is exact at multiples of a quarter turn, so that
/// configurations symmetric under a half turn are built exactly symmetric.
/// Several relative equilibria are unstable and a rounding-level asymmetry
/// would otherwise grow along the orbit.
fn quarter_exact_sin_cos(a: f64) -> (f64, f64) {
    let quarters = a / (0.5 * PI);
    let k = quarters.round();
    if (quarters - k).abs() <= 4.0 * f64::EPSILON * k.abs().max(1.0) {
        match (k as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        a.sin_cos()
    }
}

/// Builds the state at t = 0.
pub fn build_relative_equilibrium(params: &REParams, masses: &[f64]) -> Result<SystemState> {
    params.state_at(masses, 0.0)
}

fn signed_root(w2: f64, positive: bool) -> Result<f64> {
    if !(w2 > 0.0) {
        return Err(Error::Domain(format!(
            "ω² = {w2} is not positive: no real angular velocity"
        )));
    }
    Ok(if positive { w2.sqrt() } else { -w2.sqrt() })
}

/// Regular n-gon of masses m rotating at height z, with ω from the n-gon
/// equation. `positive` picks the sign of ω.
pub fn ngon_re(k: Curvature, n: usize, z: f64, m: f64, positive: bool) -> Result<REParams> {
    let omega = signed_root(m * ngon_omega_sq_over_m(k, n, z)?, positive)?;
    Ok(REParams::Elliptic(EllipticREParams {
        curvature: k,
        bodies: (0..n)
            .map(|j| EllipticBody { z, alpha: 2.0 * PI * j as f64 / n as f64 })
            .collect(),
        omega,
    }))
}

/// Equilateral triangle rotating at height z.
pub fn lagrangian_re(k: Curvature, z: f64, m: f64, positive: bool) -> Result<REParams> {
    ngon_re(k, 3, z, m, positive)
}

/// Mass m at the vertex (0, 0, 1) and masses M at `(±r, 0, z)`, rotating
/// about the z axis. Bodies are ordered (m, M, M).
pub fn eulerian_re(k: Curvature, z: f64, m: f64, big_m: f64, positive: bool) -> Result<REParams> {
    let omega = signed_root(eulerian_omega_sq(k, z, m, big_m)?, positive)?;
    Ok(REParams::Elliptic(EllipticREParams {
        curvature: k,
        bodies: vec![
            EllipticBody { z: 1.0, alpha: 0.0 },
            EllipticBody { z, alpha: 0.0 },
            EllipticBody { z, alpha: PI },
        ],
        omega,
    }))
}

/// Mass m on `x = 0` and masses M on `x = ±x`, all on one moving geodesic.
/// Bodies are ordered (m, M, M).
pub fn hyperbolic_re(x: f64, m: f64, big_m: f64, positive: bool) -> Result<REParams> {
    let omega = signed_root(hyperbolic_re_omega_sq(x, m, big_m)?, positive)?;
    Ok(REParams::Hyperbolic(HyperbolicREParams {
        bodies: vec![
            HyperbolicBody { x: 0.0, alpha: 0.0 },
            HyperbolicBody { x, alpha: 0.0 },
            HyperbolicBody { x: -x, alpha: 0.0 },
        ],
        omega,
    }))
}

/// Gives every body the velocity `ω ẑ × q` of a rigid rotation about z.
pub fn rotate_uniformly(state: &SystemState, omega: f64) -> Result<SystemState> {
    let q = state.positions();
    let v: Vec<Vec3> = q.iter().map(|p| Vec3::new(-p.y, p.x, 0.0) * omega).collect();
    Ok(SystemState::projected(state.curvature(), &state.masses(), &q, &v)?.with_time(state.time()))
}

/// A tilted copy of the equatorial fixed n-gon (rotated by `tilt` about
/// the x axis), set spinning about the z axis.
pub fn tilted_rotating_ngon(n: usize, m: f64, tilt: f64, omega: f64) -> Result<SystemState> {
    let base = fixed_point_ngon(n, m)?;
    let (s, c) = tilt.sin_cos();
    #[rustfmt::skip]
    let rx = Isometry::from_matrix(nalgebra::Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, c,  -s,
        0.0, s,   c,
    ));
    rotate_uniformly(&base.apply_isometry(&rx), omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum REKind {
    Elliptic,
    Hyperbolic,
}

/// Thresholds of [`verify_relative_equilibrium`].
pub const RE_DISTANCE_TOL: f64 = 1e-7;
pub const RE_COORD_TOL: f64 = 1e-7;
pub const RE_COPLANAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REReport {
    pub kind: REKind,
    pub passed: bool,
    pub max_distance_drift: f64,
    /// Drift of zᵢ (elliptic) or xᵢ (hyperbolic).
    pub max_coordinate_drift: f64,
    /// Drift of the phase differences (elliptic) or rapidity differences
    /// (hyperbolic).
    pub max_phase_drift: f64,
    /// Largest smallest-singular-value of the normalised positions;
    /// hyperbolic only.
    pub max_coplanarity: f64,
    pub failures: Vec<String>,
}

/// Checks that a trajectory moves rigidly as the given kind of relative
/// equilibrium.
pub fn verify_relative_equilibrium(samples: &[TrajectorySample], kind: REKind) -> REReport {
    let mut rep = REReport {
        kind,
        passed: false,
        max_distance_drift: f64::NAN,
        max_coordinate_drift: 0.0,
        max_phase_drift: 0.0,
        max_coplanarity: 0.0,
        failures: Vec::new(),
    };
    let Some(first) = samples.first() else {
        rep.failures.push("empty trajectory".into());
        return rep;
    };
    let k = first.state.curvature();
    if kind == REKind::Hyperbolic && k.is_spherical() {
        rep.failures.push("hyperbolic rotations need κ < 0".into());
        return rep;
    }

    match max_distance_drift(samples) {
        Some(d) => {
            rep.max_distance_drift = d;
            if !(d < RE_DISTANCE_TOL) {
                rep.failures.push(format!("pairwise distances drift by {d:e}"));
            }
        }
        None => rep.failures.push("distances undefined along the trajectory".into()),
    }

    let coord = |v: Vec3| match kind {
        REKind::Elliptic => v.z,
        REKind::Hyperbolic => v.x,
    };
    let c0: Vec<f64> = first.state.positions().into_iter().map(coord).collect();
    for s in samples {
        for (a, b) in s.state.positions().into_iter().map(coord).zip(&c0) {
            rep.max_coordinate_drift = rep.max_coordinate_drift.max((a - b).abs());
        }
    }
    if !(rep.max_coordinate_drift < RE_COORD_TOL) {
        rep.failures.push(format!(
            "{} coordinates drift by {:e}",
            if kind == REKind::Elliptic { "z" } else { "x" },
            rep.max_coordinate_drift
        ));
    }

    // phases relative to a reference body
    let angle = |v: Vec3| match kind {
        REKind::Elliptic => v.y.atan2(v.x),
        REKind::Hyperbolic => (v.y / v.z).atanh(),
    };
    let q0 = first.state.positions();
    let movable: Vec<usize> = (0..q0.len())
        .filter(|&i| kind == REKind::Hyperbolic || (q0[i].x.hypot(q0[i].y) > 1e-6))
        .collect();
    if let Some((&r, rest)) = movable.split_first() {
        for &i in rest {
            let mut d: Vec<f64> = samples
                .iter()
                .map(|s| {
                    let q = s.state.positions();
                    angle(q[i]) - angle(q[r])
                })
                .collect();
            if kind == REKind::Elliptic {
                unwrap_phase(&mut d);
            }
            for x in &d {
                rep.max_phase_drift = rep.max_phase_drift.max((x - d[0]).abs());
            }
        }
    }
    if !(rep.max_phase_drift < RE_COORD_TOL) {
        rep.failures.push(format!("phase differences drift by {:e}", rep.max_phase_drift));
    }

    if kind == REKind::Hyperbolic {
        for s in samples {
            let a = plane_fit(&s.state.positions());
            rep.max_coplanarity = rep.max_coplanarity.max(a.smallest_singular_value);
        }
        if !(rep.max_coplanarity < RE_COPLANAR_TOL) {
            rep.failures.push(format!(
                "bodies leave a common geodesic (σ_min up to {:e})",
                rep.max_coplanarity
            ));
        }
    }
    rep.passed = rep.failures.is_empty();
    rep
}

/// Residual of the y-equation for bodies chasing each other along the
/// fixed geodesic `x = 0` with positions `(0, sinh(ωt + αᵢ), cosh(ωt + αᵢ))`.
/// A relative equilibrium of that shape needs this to vanish for all t.
pub fn tri_residual(omega: f64, alphas: &[f64], masses: &[f64], t: f64, i: usize) -> f64 {
    let ai = alphas[i];
    let mut sum = 0.0;
    for (j, (&aj, &mj)) in alphas.iter().zip(masses).enumerate() {
        if j == i {
            continue;
        }
        let d = ai - aj;
        sum += mj * ((omega * t + aj).sinh() - d.cosh() * (omega * t + ai).sinh())
            / d.sinh().abs().powi(3);
    }
    sum
}

/// Largest `|tri_residual|` over bodies and the given times.
pub fn tri_residual_max(omega: f64, alphas: &[f64], masses: &[f64], times: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &t in times {
        for i in 0..alphas.len() {
            worst = worst.max(tri_residual(omega, alphas, masses, t, i).abs());
        }
    }
    worst
}

/// Constants `(aᵢ, bᵢ, cᵢ)` of a candidate motion `q_i(t) = P(t)(aᵢ, bᵢ, cᵢ)`
/// under the parabolic one-parameter group P(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicAnsatz {
    triples: Vec<[f64; 3]>,
}

impl ParabolicAnsatz {
    pub fn new(triples: Vec<[f64; 3]>) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::Domain("need at least one body".into()));
        }
        for (i, &[a, b, c]) in triples.iter().enumerate() {
            let r = a * a + b * b - c * c + 1.0;
            let scale = (a * a + b * b + c * c).max(1.0);
            if r.abs() > 1e-12 * scale {
                return Err(Error::ConstraintViolation {
                    what: format!("body {i}: a² + b² − c² must equal −1"),
                    residual: r,
                });
            }
            if c <= 0.0 {
                return Err(Error::Domain(format!("body {i} is on the lower sheet")));
            }
        }
        Ok(Self { triples })
    }

    pub fn triples(&self) -> &[[f64; 3]] {
        &self.triples
    }

    /// Positions and velocities at time t.
    pub fn kinematics(&self, t: f64) -> (Vec<Vec3>, Vec<Vec3>) {
        let m = Isometry::parabolic(t);
        #[rustfmt::skip]
        let dm = Isometry::from_matrix(nalgebra::Matrix3::new(
            0.0, -1.0, 1.0,
            1.0, -t,   t,
            1.0, -t,   t,
        ));
        self.triples
            .iter()
            .map(|&v| (m.apply(Vec3::from(v)), dm.apply(Vec3::from(v))))
            .unzip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParabolicObstruction {
    /// The x-component of the angular momentum grows linearly in t.
    MomentumNotConserved,
    /// Every `bᵢ = cᵢ`, which turns the constraint into `aᵢ² = −1`.
    ConstraintUnsatisfiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicVerdict {
    pub nonexistent: bool,
    pub obstruction: ParabolicObstruction,
    /// `Σ mᵢ aᵢ(bᵢ − cᵢ)`, the constant part of `c_x(t)`.
    pub constant_coefficient: f64,
    /// `−Σ mᵢ (bᵢ − cᵢ)²`, the coefficient of t in `c_x(t)`.
    pub linear_coefficient: f64,
}

/// Shows that a parabolic rotation cannot be a solution: either the
/// angular momentum is not conserved, or the constraint cannot hold.
pub fn parabolic_nonexistence_check(ansatz: &ParabolicAnsatz, masses: &[f64]) -> Result<ParabolicVerdict> {
    parabolic_obstruction(ansatz.triples(), masses)
}

/// Same chain on unvalidated constants.
pub fn parabolic_obstruction(triples: &[[f64; 3]], masses: &[f64]) -> Result<ParabolicVerdict> {
    if triples.len() != masses.len() {
        return Err(Error::Domain(format!(
            "{} masses for {} bodies",
            masses.len(),
            triples.len()
        )));
    }
    let mut lin = 0.0;
    let mut cst = 0.0;
    for (&[a, b, c], &m) in triples.iter().zip(masses) {
        lin -= m * (b - c) * (b - c);
        cst += m * a * (b - c);
    }
    let obstruction = if lin != 0.0 {
        ParabolicObstruction::MomentumNotConserved
    } else {
        ParabolicObstruction::ConstraintUnsatisfiable
    };
    Ok(ParabolicVerdict {
        nonexistent: true,
        obstruction,
        constant_coefficient: cst,
        linear_coefficient: lin,
    })
}
