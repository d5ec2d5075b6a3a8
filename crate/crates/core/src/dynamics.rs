//! Cotangent potential, its gradient, the constrained equations of motion
//! and the first integrals.
//!
//! Units are chosen so that G = 1. Throughout, `K_ij = κ qᵢ⊙qⱼ` and the pair
//! gap is `σ − σK_ij²`, which vanishes exactly on the singular set.
//!
//! The gradient returned by [`grad_force_function`] is the modified one
//! `∇̃`: for κ < 0 the partial derivative with respect to z carries a minus
//! sign, so that `∇̃_a(a⊙b) = b` for either metric. With it the motion reads
//!
//! ```text
//! q̈ᵢ = ∇̃ᵢU / mᵢ − κ (q̇ᵢ⊙q̇ᵢ) qᵢ
//! ```
//!
//! where the last term comes from the Lagrange multiplier
//! `λᵢ = −κ mᵢ (q̇ᵢ⊙q̇ᵢ)` of the constraint `qᵢ⊙qᵢ = 1/κ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cross_gram, distance_extended, kappa_ctn, project_point, project_velocity, Curvature,
    Isometry, SurfacePoint, TangentVector, Vec3,
};
use crate::par::{self, Execution};
use crate::singularities::SingularityKind;

/// Pairs with `|σ − σK²|` at or below this are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Below this many bodies force sums always run sequentially.
pub const PARALLEL_MIN_BODIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    mass: f64,
    q: SurfacePoint,
    p: TangentVector,
}

impl Body {
    pub fn new(mass: f64, q: SurfacePoint, p: TangentVector) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if p.at().v() != q.v() {
            return Err(Error::Precondition(
                "momentum is attached to a different point".into(),
            ));
        }
        Ok(Self { mass, q, p })
    }

    pub fn at_rest(mass: f64, q: SurfacePoint) -> Result<Self> {
        Self::new(mass, q, TangentVector::zero(q))
    }

    /// Builds a body from raw position and velocity, checking both
    /// constraints.
    pub fn from_velocity(k: Curvature, mass: f64, q: Vec3, v: Vec3) -> Result<Self> {
        let q = SurfacePoint::new(k, q)?;
        let p = TangentVector::new(q, v * mass)?;
        Self::new(mass, q, p)
    }

    pub(crate) fn from_raw(k: Curvature, mass: f64, q: Vec3, p: Vec3) -> Self {
        let q = SurfacePoint::from_raw(k, q);
        Self {
            mass,
            q,
            p: TangentVector::from_raw(q, p),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn q(&self) -> Vec3 {
        self.q.v()
    }

    pub fn p(&self) -> Vec3 {
        self.p.v()
    }

    pub fn velocity(&self) -> Vec3 {
        self.p.v() / self.mass
    }

    pub fn position(&self) -> SurfacePoint {
        self.q
    }

    pub fn momentum(&self) -> TangentVector {
        self.p
    }
}

/// Configuration, momenta and time of the whole system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    curvature: Curvature,
    bodies: Vec<Body>,
    time: f64,
}

impl SystemState {
    pub fn new(curvature: Curvature, bodies: Vec<Body>, time: f64) -> Result<Self> {
        if bodies.is_empty() {
            return Err(Error::Domain("a system needs at least one body".into()));
        }
        if let Some(b) = bodies.iter().find(|b| b.q.curvature() != curvature) {
            return Err(Error::Domain(format!(
                "body on curvature {} in a system with curvature {}",
                b.q.curvature().kappa(),
                curvature.kappa()
            )));
        }
        Ok(Self {
            curvature,
            bodies,
            time,
        })
    }

    /// Strictly validated construction from masses, positions and
    /// velocities (not momenta).
    pub fn from_vectors(
        curvature: Curvature,
        masses: &[f64],
        positions: &[Vec3],
        velocities: &[Vec3],
    ) -> Result<Self> {
        check_lengths(masses, positions, velocities)?;
        let bodies = masses
            .iter()
            .zip(positions)
            .zip(velocities)
            .map(|((&m, &q), &v)| Body::from_velocity(curvature, m, q, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(curvature, bodies, 0.0)
    }

    /// Like [`SystemState::from_vectors`] but projects positions onto the
    /// surface and velocities onto the tangent planes first.
    pub fn projected(
        curvature: Curvature,
        masses: &[f64],
        positions: &[Vec3],
        velocities: &[Vec3],
    ) -> Result<Self> {
        check_lengths(masses, positions, velocities)?;
        let mut bodies = Vec::with_capacity(masses.len());
        for ((&m, &q), &v) in masses.iter().zip(positions).zip(velocities) {
            let q = project_point(curvature, q)?;
            let p = project_velocity(curvature, &q, v * m);
            bodies.push(Body::new(m, q, p)?);
        }
        Self::new(curvature, bodies, 0.0)
    }

    pub(crate) fn from_raw_parts(
        curvature: Curvature,
        masses: &[f64],
        q: &[Vec3],
        p: &[Vec3],
        time: f64,
    ) -> Self {
        let bodies = masses
            .iter()
            .zip(q)
            .zip(p)
            .map(|((&m, &q), &p)| Body::from_raw(curvature, m, q, p))
            .collect();
        Self {
            curvature,
            bodies,
            time,
        }
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn masses(&self) -> Vec<f64> {
        self.bodies.iter().map(|b| b.mass).collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.bodies.iter().map(|b| b.q()).collect()
    }

    pub fn momenta(&self) -> Vec<Vec3> {
        self.bodies.iter().map(|b| b.p()).collect()
    }

    pub fn velocities(&self) -> Vec<Vec3> {
        self.bodies.iter().map(|b| b.velocity()).collect()
    }

    /// Largest violation of the surface or tangency constraints.
    pub fn constraint_residual(&self) -> f64 {
        let k = self.curvature;
        self.bodies
            .iter()
            .map(|b| k.point_residual(b.q()).max(k.tangency_residual(b.q(), b.p())))
            .fold(0.0, f64::max)
    }

    /// Maps all positions and momenta through a linear isometry.
    pub fn apply_isometry(&self, m: &Isometry) -> Self {
        let k = self.curvature;
        let bodies = self
            .bodies
            .iter()
            .map(|b| Body::from_raw(k, b.mass, m.apply(b.q()), m.apply(b.p())))
            .collect();
        Self {
            curvature: k,
            bodies,
            time: self.time,
        }
    }
}

fn check_lengths(masses: &[f64], q: &[Vec3], v: &[Vec3]) -> Result<()> {
    if masses.len() != q.len() || masses.len() != v.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} masses, {} positions, {} velocities",
            masses.len(),
            q.len(),
            v.len()
        )));
    }
    Ok(())
}

/// Energy, angular momentum and the two parts of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub energy_h: f64,
    pub angular_momentum_c: Vec3,
    pub kinetic_t: f64,
    pub potential_u: f64,
}

/// `σ − σK²` for a pair on the surface, computed from the cross product so
/// nearby and nearly antipodal points keep full relative precision.
pub fn pair_gap(k: Curvature, a: Vec3, b: Vec3) -> f64 {
    k.kappa() * k.kappa() * cross_gram(k, a, b)
}

/// `K = κ a⊙b`.
pub fn pair_cosine(k: Curvature, a: Vec3, b: Vec3) -> f64 {
    k.kappa() * k.inner(a, b)
}

fn check_pair(k: Curvature, i: usize, j: usize, a: Vec3, b: Vec3) -> Result<f64> {
    let gap = pair_gap(k, a, b);
    if gap <= SINGULAR_TOL {
        let kind = if pair_cosine(k, a, b) > 0.0 {
            SingularityKind::Collision
        } else {
            SingularityKind::Antipodal
        };
        return Err(Error::Singular { i, j, kind });
    }
    Ok(gap)
}

/// The force function `U` of a constrained configuration.
pub fn force_function(state: &SystemState) -> Result<f64> {
    potential(state.curvature, &state.masses(), &state.positions())
}

/// `U` from raw slices; positions are assumed to satisfy the constraint.
pub fn potential(k: Curvature, masses: &[f64], q: &[Vec3]) -> Result<f64> {
    let root = k.kappa().abs().sqrt();
    let mut u = 0.0;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let gap = check_pair(k, i, j, q[i], q[j])?;
            u += masses[i] * masses[j] * root * pair_cosine(k, q[i], q[j]) / gap.sqrt();
        }
    }
    Ok(u)
}

/// The force function written so that it is homogeneous of degree zero in
/// each position. Accepts any positions with `κ qᵢ⊙qᵢ > 0`.
pub fn force_function_homogeneous(k: Curvature, masses: &[f64], q: &[Vec3]) -> Result<f64> {
    let kap = k.kappa();
    let root = kap.abs().sqrt();
    let norms = normalisers(k, q)?;
    let mut u = 0.0;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let nn = norms[i] * norms[j];
            let c = kap * k.inner(q[i], q[j]) / nn;
            let gap = kap * kap * cross_gram(k, q[i], q[j]) / (nn * nn);
            if gap <= SINGULAR_TOL {
                return check_pair(k, i, j, q[i] / norms[i], q[j] / norms[j]).map(|_| 0.0);
            }
            u += masses[i] * masses[j] * root * c / gap.sqrt();
        }
    }
    Ok(u)
}

/// `Σ mᵢmⱼ ctn_κ(d(qᵢ, qⱼ))` with the distance extended off the surface.
pub fn force_function_extended(k: Curvature, masses: &[f64], q: &[Vec3]) -> Result<f64> {
    let mut u = 0.0;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let d = distance_extended(k, q[i], q[j])?;
            let c = kappa_ctn(k.kappa(), d).map_err(|_| {
                let kind = if d == 0.0 {
                    SingularityKind::Collision
                } else {
                    SingularityKind::Antipodal
                };
                Error::Singular { i, j, kind }
            })?;
            u += masses[i] * masses[j] * c;
        }
    }
    Ok(u)
}

fn normalisers(k: Curvature, q: &[Vec3]) -> Result<Vec<f64>> {
    q.iter()
        .map(|&a| {
            let n = k.kappa() * k.inner(a, a);
            if n > 0.0 {
                Ok(n.sqrt())
            } else {
                Err(Error::Domain(format!("κ q⊙q = {n} is not positive at {a}")))
            }
        })
        .collect()
}

/// `qⱼ − K qᵢ`, arranged to avoid cancellation when the bodies are close
/// (K ≈ 1) or nearly antipodal (K ≈ −1).
fn pull(k: Curvature, qi: Vec3, qj: Vec3, kij: f64) -> Vec3 {
    let kap = k.kappa();
    if kij >= 0.0 {
        let d = qj - qi;
        d + qi * (0.5 * kap * k.inner(d, d))
    } else {
        let s = qj + qi;
        s - qi * (0.5 * kap * k.inner(s, s))
    }
}

/// Constraint-simplified `∇̃ᵢU` from raw slices.
pub fn gradient_at(k: Curvature, masses: &[f64], q: &[Vec3], i: usize) -> Result<Vec3> {
    let scale = k.kappa().abs().powf(1.5);
    let mut g = Vec3::ZERO;
    for j in 0..q.len() {
        if j == i {
            continue;
        }
        let gap = check_pair(k, i, j, q[i], q[j])?;
        let kij = pair_cosine(k, q[i], q[j]);
        let w = masses[i] * masses[j] * scale / (gap * gap.sqrt());
        g += pull(k, q[i], q[j], kij) * w;
    }
    Ok(g)
}

/// `∇̃ᵢU` for every body. Large systems are split across threads when
/// `exec` allows it.
pub fn gradients(k: Curvature, masses: &[f64], q: &[Vec3], exec: Execution) -> Result<Vec<Vec3>> {
    let exec = if q.len() < PARALLEL_MIN_BODIES {
        Execution::Sequential
    } else {
        exec
    };
    par::map_range(exec, q.len(), |i| gradient_at(k, masses, q, i))
        .into_iter()
        .collect()
}

/// `∇̃_{qᵢ}U`, the constraint-simplified gradient used by the integrator.
pub fn grad_force_function(state: &SystemState, i: usize) -> Result<Vec3> {
    if i >= state.len() {
        return Err(Error::Domain(format!("no body with index {i}")));
    }
    gradient_at(state.curvature, &state.masses(), &state.positions(), i)
}

/// `∇̃ᵢU` of the homogeneous force function, valid at any admissible
/// positions. Agrees with [`grad_force_function`] on the surface.
pub fn grad_force_function_homogeneous(
    k: Curvature,
    masses: &[f64],
    q: &[Vec3],
    i: usize,
) -> Result<Vec3> {
    let kap = k.kappa();
    let sig = k.sigma();
    let root = kap.abs().sqrt();
    let norms = normalisers(k, q)?;
    let qi = q[i];
    let nii = kap * k.inner(qi, qi);
    let mut g = Vec3::ZERO;
    for j in 0..q.len() {
        if j == i {
            continue;
        }
        let qj = q[j];
        let nn = norms[i] * norms[j];
        let gap = kap * kap * cross_gram(k, qi, qj) / (nn * nn);
        if gap <= SINGULAR_TOL {
            check_pair(k, i, j, qi / norms[i], qj / norms[j])?;
        }
        let dir = qj * (sig * kap) - qi * (sig * kap * kap * k.inner(qi, qj) / nii);
        g += dir * (masses[i] * masses[j] * root / (nn * gap * gap.sqrt()));
    }
    Ok(g)
}

/// Second derivatives `q̈ᵢ` of all positions.
pub fn acceleration(state: &SystemState) -> Result<Vec<Vec3>> {
    let k = state.curvature;
    let masses = state.masses();
    let g = gradients(k, &masses, &state.positions(), Execution::default())?;
    Ok(state
        .bodies
        .iter()
        .zip(g)
        .map(|(b, gi)| {
            let v = b.velocity();
            gi / b.mass - b.q() * (k.kappa() * k.inner(v, v))
        })
        .collect())
}

/// Right-hand side of the first-order system: `(q̇ᵢ, ṗᵢ)` for every body.
pub fn hamiltonian_rhs(state: &SystemState) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let k = state.curvature;
    let mut qd = vec![Vec3::ZERO; state.len()];
    let mut pd = vec![Vec3::ZERO; state.len()];
    rhs_into(
        k,
        &state.masses(),
        &state.positions(),
        &state.momenta(),
        &mut qd,
        &mut pd,
        Execution::default(),
    )?;
    Ok((qd, pd))
}

/// Slice form of [`hamiltonian_rhs`] that writes into caller buffers.
pub fn rhs_into(
    k: Curvature,
    masses: &[f64],
    q: &[Vec3],
    p: &[Vec3],
    qd: &mut [Vec3],
    pd: &mut [Vec3],
    exec: Execution,
) -> Result<()> {
    let g = gradients(k, masses, q, exec)?;
    for i in 0..q.len() {
        let m = masses[i];
        qd[i] = p[i] / m;
        pd[i] = g[i] - q[i] * (k.kappa() * k.inner(p[i], p[i]) / m);
    }
    Ok(())
}

/// Kinetic energy `½ Σ mᵢ⁻¹ pᵢ⊙pᵢ`.
pub fn kinetic_energy(state: &SystemState) -> f64 {
    let k = state.curvature;
    0.5 * state
        .bodies
        .iter()
        .map(|b| k.inner(b.p(), b.p()) / b.mass)
        .sum::<f64>()
}

/// `h = T − U`.
pub fn energy(state: &SystemState) -> Result<f64> {
    Ok(kinetic_energy(state) - force_function(state)?)
}

/// `qᵢ⊗pᵢ` for each body.
pub fn angular_momentum_per_body(state: &SystemState) -> Vec<Vec3> {
    let k = state.curvature;
    state.bodies.iter().map(|b| k.cross(b.q(), b.p())).collect()
}

/// `c = Σ qᵢ⊗pᵢ`.
pub fn angular_momentum(state: &SystemState) -> Vec3 {
    angular_momentum_per_body(state)
        .into_iter()
        .fold(Vec3::ZERO, |a, b| a + b)
}

pub fn first_integrals(state: &SystemState) -> Result<FirstIntegrals> {
    let t = kinetic_energy(state);
    let u = force_function(state)?;
    Ok(FirstIntegrals {
        energy_h: t - u,
        angular_momentum_c: angular_momentum(state),
        kinetic_t: t,
        potential_u: u,
    })
}
