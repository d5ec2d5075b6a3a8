//! Singular configurations, the direction-of-force lemma on a quarter
//! circle, and the symmetric three-body family that runs into (or away
//! from) a collision-antipodal configuration.

use serde::{Deserialize, Serialize};

use crate::dynamics::{pair_cosine, pair_gap, SystemState};
use crate::error::{Error, Result};
use crate::geometry::{Curvature, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    /// `κ qᵢ⊙qⱼ → 1`
    Collision,
    /// `κ qᵢ⊙qⱼ → −1`, only on the sphere.
    Antipodal,
    /// A colliding pair with a third body at the opposite end of the
    /// diameter.
    CollisionAntipodal,
}

impl SingularityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SingularityKind::Collision => "collision",
            SingularityKind::Antipodal => "antipodal",
            SingularityKind::CollisionAntipodal => "collision_antipodal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityClassification {
    pub pair: (usize, usize),
    pub kind: SingularityKind,
    /// `σ − σ(κ qᵢ⊙qⱼ)²` for the pair.
    pub proximity: f64,
}

/// Every pair closer than `threshold` to the singular set, classified.
///
/// Pairs belonging to a collision that shares a body with an antipodal pair
/// are all reported as [`SingularityKind::CollisionAntipodal`].
pub fn classify(state: &SystemState, threshold: f64) -> Vec<SingularityClassification> {
    classify_positions(state.curvature(), &state.positions(), threshold)
}

pub fn classify_positions(
    k: Curvature,
    q: &[Vec3],
    threshold: f64,
) -> Vec<SingularityClassification> {
    let mut out = Vec::new();
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let gap = pair_gap(k, q[i], q[j]);
            if gap < threshold {
                let kind = if !k.is_spherical() || pair_cosine(k, q[i], q[j]) > 0.0 {
                    SingularityKind::Collision
                } else {
                    SingularityKind::Antipodal
                };
                out.push(SingularityClassification {
                    pair: (i, j),
                    kind,
                    proximity: gap,
                });
            }
        }
    }
    let shares = |a: (usize, usize), b: (usize, usize)| {
        a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1
    };
    let snapshot = out.clone();
    for c in out.iter_mut() {
        let partner = match c.kind {
            SingularityKind::Collision => SingularityKind::Antipodal,
            SingularityKind::Antipodal => SingularityKind::Collision,
            SingularityKind::CollisionAntipodal => continue,
        };
        if snapshot
            .iter()
            .any(|o| o.kind == partner && shares(o.pair, c.pair))
        {
            c.kind = SingularityKind::CollisionAntipodal;
        }
    }
    out
}

/// The most significant entry: any collision-antipodal pair first, then the
/// pair closest to the singular set.
pub fn most_severe(list: &[SingularityClassification]) -> Option<SingularityClassification> {
    list.iter()
        .copied()
        .min_by(|a, b| {
            let rank = |c: &SingularityClassification| {
                (c.kind != SingularityKind::CollisionAntipodal) as u8
            };
            rank(a)
                .cmp(&rank(b))
                .then(a.proximity.total_cmp(&b.proximity))
        })
}

/// Which way a body at rest on the arc `x² + y² = 1, x, y > 0` is pushed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceDirection {
    /// Toward the endpoint (1, 0).
    TowardUnitX,
    /// Toward the endpoint (0, 1).
    TowardUnitY,
    NoForce,
    Impossible,
}

/// Accelerations smaller than this are read as zero.
const ACCEL_ZERO: f64 = 1e-12;

/// Decides the direction of motion from rest, given the ambient
/// accelerations of the body.
///
/// If `ẍ > 0, ÿ < 0` the body heads to (1, 0); if `ẍ < 0, ÿ > 0` to (0, 1).
/// When both are nonpositive the direction is decided by comparing the
/// slope `ÿ/ẍ` with `y/x`; equal slopes mean the acceleration is normal to
/// the circle and there is no tangential force. Both positive cannot happen
/// for a body at rest, since then `xẍ + yÿ` would have to vanish.
pub fn direction_on_geodesic(x: f64, y: f64, xdd: f64, ydd: f64) -> ForceDirection {
    let snap = |v: f64| if v.abs() < ACCEL_ZERO { 0.0 } else { v };
    let (xdd, ydd) = (snap(xdd), snap(ydd));
    if xdd > 0.0 && ydd < 0.0 {
        ForceDirection::TowardUnitX
    } else if xdd < 0.0 && ydd > 0.0 {
        ForceDirection::TowardUnitY
    } else if xdd <= 0.0 && ydd <= 0.0 {
        // ÿ/ẍ against y/x, cross-multiplied by x·ẍ ≤ 0 to allow ẍ = 0.
        let lhs = ydd * x;
        let rhs = y * xdd;
        let tol = ACCEL_ZERO * (lhs.abs() + rhs.abs());
        if (lhs - rhs).abs() <= tol {
            ForceDirection::NoForce
        } else if lhs < rhs {
            ForceDirection::TowardUnitX
        } else {
            ForceDirection::TowardUnitY
        }
    } else {
        ForceDirection::Impossible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum MassCase {
    /// M = 8m: the orbit ends in a collision-antipodal singularity.
    M8m,
    /// M = 2m: the orbit is pushed away from the singular configuration.
    M2m,
    /// M = 4m: a collision-antipodal configuration reached with finite
    /// velocity.
    M4m,
    /// Any other ratio, given as the value of M.
    Custom { big_m: f64 },
}

impl MassCase {
    pub fn big_mass(self, m: f64) -> f64 {
        match self {
            MassCase::M8m => 8.0 * m,
            MassCase::M2m => 2.0 * m,
            MassCase::M4m => 4.0 * m,
            MassCase::Custom { big_m } => big_m,
        }
    }
}

/// Two bodies of mass M at `(∓x, y, 0)` and one of mass m at `(0, −1, 0)`
/// on the unit sphere, all at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoscelesScenario {
    pub case: MassCase,
    pub mass_big: f64,
    pub mass_small: f64,
    pub x0: f64,
    pub y0: f64,
    pub energy_h: f64,
}

impl IsoscelesScenario {
    pub fn new(case: MassCase, x0: f64, m: f64) -> Result<Self> {
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::Domain(format!("x0 must lie in (0, 1), got {x0}")));
        }
        if !(m > 0.0) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        let big = case.big_mass(m);
        if !(big > 0.0) {
            return Err(Error::Domain(format!("mass M must be positive, got {big}")));
        }
        if case == MassCase::M4m && x0 >= 1.0 / 3f64.sqrt() {
            return Err(Error::Domain(format!(
                "the M = 4m case needs x0 < 1/√3, got {x0}"
            )));
        }
        let y0 = (1.0 - x0 * x0).sqrt();
        let mut s = Self {
            case,
            mass_big: big,
            mass_small: m,
            x0,
            y0,
            energy_h: 0.0,
        };
        s.energy_h = -s.reduced_potential(x0, y0);
        Ok(s)
    }

    pub fn state(&self) -> SystemState {
        let (x, y) = (self.x0, self.y0);
        let q = [Vec3::new(-x, y, 0.0), Vec3::new(x, y, 0.0), Vec3::new(0.0, -1.0, 0.0)];
        let m = [self.mass_big, self.mass_big, self.mass_small];
        SystemState::projected(Curvature::SPHERE, &m, &q, &[Vec3::ZERO; 3])
            .expect("isosceles data is valid by construction")
    }

    /// Force function of the symmetric configuration with body 2 at (x, y).
    pub fn reduced_potential(&self, x: f64, y: f64) -> f64 {
        let (big, m) = (self.mass_big, self.mass_small);
        big * big * (y * y - x * x) / (2.0 * x * y) - 2.0 * big * m * y / x
    }

    /// Energy of the symmetric motion, `M(ẋ² + ẏ²) − U(x, y)`.
    pub fn reduced_energy(&self, x: f64, y: f64, xd: f64, yd: f64) -> f64 {
        self.mass_big * (xd * xd + yd * yd) - self.reduced_potential(x, y)
    }

    /// Accelerations of body 2 in the reduced planar system with energy `h`.
    pub fn reduced_rhs(&self, x: f64, y: f64, h: f64) -> Result<(f64, f64)> {
        reduced_rhs(self.case, x, y, h, self.mass_small)
    }

    /// First-order form `(x, y, ẋ, ẏ)' ` of the reduced system.
    pub fn reduced_ode(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        let (xdd, ydd) = self.reduced_rhs(s[0], s[1], self.energy_h)?;
        out[0] = s[2];
        out[1] = s[3];
        out[2] = xdd;
        out[3] = ydd;
        Ok(())
    }
}

pub fn make_isosceles(case: MassCase, x0: f64, m: f64) -> Result<SystemState> {
    Ok(IsoscelesScenario::new(case, x0, m)?.state())
}

/// The reduced equations for the position `(x, y)` of the body at positive
/// x, with the velocity-dependent constraint term eliminated through the
/// energy `h`.
pub fn reduced_rhs(case: MassCase, x: f64, y: f64, h: f64, m: f64) -> Result<(f64, f64)> {
    if x == 0.0 || y == 0.0 {
        return Err(Error::Singular {
            i: 1,
            j: if x == 0.0 { 0 } else { 2 },
            kind: SingularityKind::CollisionAntipodal,
        });
    }
    let big = case.big_mass(m);
    let d = big - 2.0 * m;
    let (x2, y2) = (x * x, y * y);
    let xdd = (4.0 * d * x2 * x2 - 2.0 * d * x2 - big + 4.0 * m) / (4.0 * x2 * y) - h / big * x;
    let ydd = (big + 2.0 * d * y2 - 4.0 * d * y2 * y2) / (4.0 * x * y2) - h / big * y;
    Ok((xdd, ydd))
}
