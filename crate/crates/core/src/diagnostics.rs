//! Moments of inertia, per-sample conservation records, alignment of the
//! bodies on a common geodesic and the classifier for rotating geodesic
//! solutions with constant moment of inertia.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    angular_momentum, angular_momentum_per_body, energy, force_function_extended,
    grad_force_function_homogeneous, SystemState,
};
use crate::error::{Error, Result};
use crate::geometry::{distance, Vec3};
use crate::integrate::{event_function, TrajectorySample};

/// Threshold on the smallest singular value of the normalised position
/// matrix below which bodies count as lying on one geodesic.
pub const ALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub energy: f64,
    pub angular_momentum: Vec3,
    pub moment_i: f64,
    /// Only defined for κ < 0.
    pub moment_j: Option<f64>,
    pub min_pair_gap: f64,
    pub constraint_residual: f64,
}

/// Collects the diagnostics of one state. The energy is NaN if the state is
/// singular.
pub fn record(state: &SystemState) -> DiagnosticsRecord {
    DiagnosticsRecord {
        energy: energy(state).unwrap_or(f64::NAN),
        angular_momentum: angular_momentum(state),
        moment_i: moment_inertia_i(state),
        moment_j: moment_inertia_j(state).ok(),
        min_pair_gap: if state.len() > 1 {
            event_function(state.curvature(), &state.positions())
        } else {
            f64::INFINITY
        },
        constraint_residual: state.constraint_residual(),
    }
}

/// `I = Σ mᵢ(xᵢ² + yᵢ²)`, the moment about the z axis.
pub fn moment_inertia_i(state: &SystemState) -> f64 {
    moment_i_per_body(state).iter().sum()
}

pub fn moment_i_per_body(state: &SystemState) -> Vec<f64> {
    state
        .bodies()
        .iter()
        .map(|b| {
            let q = b.q();
            b.mass() * (q.x * q.x + q.y * q.y)
        })
        .collect()
}

/// `J = Σ mᵢ(yᵢ² − zᵢ²)`, the moment about the x axis on the hyperboloid.
pub fn moment_inertia_j(state: &SystemState) -> Result<f64> {
    Ok(moment_j_per_body(state)?.iter().sum())
}

pub fn moment_j_per_body(state: &SystemState) -> Result<Vec<f64>> {
    if state.curvature().is_spherical() {
        return Err(Error::Domain("J is only defined for κ < 0".into()));
    }
    Ok(state
        .bodies()
        .iter()
        .map(|b| {
            let q = b.q();
            b.mass() * (q.y * q.y - q.z * q.z)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub is_aligned: bool,
    /// Unit normal of the best plane through the origin.
    pub normal: Vec3,
    pub smallest_singular_value: f64,
}

/// Whether all positions lie in one plane through the origin, i.e. on one
/// geodesic. Rows are normalised to unit Euclidean length first so the test
/// does not depend on how far out on the hyperboloid the bodies are.
pub fn geodesic_alignment(state: &SystemState) -> Alignment {
    plane_fit(&state.positions())
}

pub fn plane_fit(q: &[Vec3]) -> Alignment {
    let rows = q.len().max(3);
    let mut m = DMatrix::<f64>::zeros(rows, 3);
    for (i, v) in q.iter().enumerate() {
        let u = *v / v.norm();
        m[(i, 0)] = u.x;
        m[(i, 1)] = u.y;
        m[(i, 2)] = u.z;
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (idx, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three singular values");
    let normal = Vec3::new(vt[(idx, 0)], vt[(idx, 1)], vt[(idx, 2)]);
    Alignment {
        is_aligned: q.len() <= 2 || smin < ALIGNMENT_TOL,
        normal,
        smallest_singular_value: if q.len() <= 2 { 0.0 } else { smin },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaariMode {
    /// Rotation about the z axis, on either surface.
    EllipticAboutZ,
    /// Hyperbolic rotation about the x axis on the hyperboloid.
    HyperbolicAboutX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum SaariVerdict {
    RelativeEquilibrium {
        omega: f64,
        /// Constant `zᵢ` (elliptic) or `xᵢ` (hyperbolic) of each body.
        coords: Vec<f64>,
    },
    Inconclusive {
        reason: String,
    },
}

impl SaariVerdict {
    pub fn is_relative_equilibrium(&self) -> bool {
        matches!(self, SaariVerdict::RelativeEquilibrium { .. })
    }
}

/// Tolerances of [`saari_classify`].
pub const SAARI_MOMENT_TOL: f64 = 1e-7;
pub const SAARI_FIT_TOL: f64 = 1e-7;
pub const SAARI_DISTANCE_TOL: f64 = 1e-6;

/// Walks a trajectory through the chain: alignment on a geodesic at every
/// sample, constant total moment, constant per-body momentum component,
/// hence constant per-body moment, hence a single constant rotation rate.
/// The first broken link is reported as the reason for an inconclusive
/// verdict.
pub fn saari_classify(samples: &[TrajectorySample], mode: SaariMode) -> SaariVerdict {
    let fail = |reason: String| SaariVerdict::Inconclusive { reason };
    if samples.len() < 3 {
        return fail("need at least three samples".into());
    }
    let first = &samples[0].state;
    let k = first.curvature();
    if mode == SaariMode::HyperbolicAboutX && k.is_spherical() {
        return fail("hyperbolic rotations need κ < 0".into());
    }
    if first.len() < 2 {
        return fail("need at least two bodies".into());
    }

    for s in samples {
        let a = geodesic_alignment(&s.state);
        if !a.is_aligned {
            return fail(format!(
                "bodies leave a common geodesic at t = {} (σ_min = {:e})",
                s.time, a.smallest_singular_value
            ));
        }
    }

    let moment = |s: &SystemState| match mode {
        SaariMode::EllipticAboutZ => moment_inertia_i(s),
        SaariMode::HyperbolicAboutX => moment_inertia_j(s).unwrap_or(f64::NAN),
    };
    let m0 = moment(first);
    let mscale = m0.abs().max(1.0);
    for s in samples {
        let d = (moment(&s.state) - m0).abs() / mscale;
        if !(d < SAARI_MOMENT_TOL) {
            return fail(format!("moment of inertia drifts by {d:e} at t = {}", s.time));
        }
    }

    // each body's component of L along the rotation axis
    let component = |s: &SystemState| -> Vec<f64> {
        angular_momentum_per_body(s)
            .into_iter()
            .map(|l| match mode {
                SaariMode::EllipticAboutZ => l.z,
                SaariMode::HyperbolicAboutX => l.x,
            })
            .collect()
    };
    let l0 = component(first);
    let lscale = l0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for s in samples {
        for (i, (a, b)) in component(&s.state).iter().zip(&l0).enumerate() {
            let d = (a - b).abs() / lscale;
            if !(d < SAARI_MOMENT_TOL) {
                return fail(format!(
                    "momentum component of body {i} drifts by {d:e} at t = {}",
                    s.time
                ));
            }
        }
    }

    let per_body = |s: &SystemState| match mode {
        SaariMode::EllipticAboutZ => moment_i_per_body(s),
        SaariMode::HyperbolicAboutX => moment_j_per_body(s).unwrap_or_default(),
    };
    let i0 = per_body(first);
    for s in samples {
        for (i, (a, b)) in per_body(&s.state).iter().zip(&i0).enumerate() {
            let d = (a - b).abs() / mscale;
            if !(d < SAARI_MOMENT_TOL) {
                return fail(format!("moment of body {i} drifts by {d:e} at t = {}", s.time));
            }
        }
    }

    if let Some(d) = max_distance_drift(samples) {
        if d > SAARI_DISTANCE_TOL {
            return fail(format!("pairwise distances drift by {d:e}"));
        }
    } else {
        return fail("distance undefined along the trajectory".into());
    }

    let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
    let mut omegas = Vec::new();
    for i in 0..first.len() {
        let angle = |s: &SystemState| {
            let q = s.bodies()[i].q();
            match mode {
                SaariMode::EllipticAboutZ => q.y.atan2(q.x),
                SaariMode::HyperbolicAboutX => (q.y / q.z).atanh(),
            }
        };
        if mode == SaariMode::EllipticAboutZ {
            let q = first.bodies()[i].q();
            // a body on the axis has no phase
            if (q.x * q.x + q.y * q.y).sqrt() < 1e-6 {
                continue;
            }
        }
        let mut phases: Vec<f64> = samples.iter().map(|s| angle(&s.state)).collect();
        if mode == SaariMode::EllipticAboutZ {
            unwrap_phase(&mut phases);
        }
        let (slope, _, resid) = linear_fit(&times, &phases);
        if !(resid < SAARI_FIT_TOL) {
            return fail(format!("phase of body {i} is not linear in t (residual {resid:e})"));
        }
        omegas.push(slope);
    }
    let Some(&omega) = omegas.first() else {
        return fail("no body off the rotation axis".into());
    };
    if let Some(bad) = omegas.iter().find(|w| (**w - omega).abs() > SAARI_FIT_TOL * omega.abs().max(1.0)) {
        return fail(format!("bodies rotate at different rates ({omega} vs {bad})"));
    }
    let omega = omegas.iter().sum::<f64>() / omegas.len() as f64;
    let coords = first
        .bodies()
        .iter()
        .map(|b| match mode {
            SaariMode::EllipticAboutZ => b.q().z,
            SaariMode::HyperbolicAboutX => b.q().x,
        })
        .collect();
    SaariVerdict::RelativeEquilibrium { omega, coords }
}

/// Removes the 2π jumps of an `atan2` sequence.
pub fn unwrap_phase(phases: &mut [f64]) {
    use std::f64::consts::PI;
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > PI {
            phases[i] -= 2.0 * PI;
            d -= 2.0 * PI;
        }
        while d < -PI {
            phases[i] += 2.0 * PI;
            d += 2.0 * PI;
        }
    }
}

/// Least-squares line; returns slope, intercept and the largest residual.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        stt += (a - tm) * (a - tm);
        sty += (a - tm) * (b - ym);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let icpt = ym - slope * tm;
    let resid = t
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (icpt + slope * a)).abs())
        .fold(0.0, f64::max);
    (slope, icpt, resid)
}

/// Largest change of any pairwise geodesic distance relative to the first
/// sample. `None` if a distance cannot be evaluated.
pub fn max_distance_drift(samples: &[TrajectorySample]) -> Option<f64> {
    let dists = |s: &SystemState| -> Option<Vec<f64>> {
        let b = s.bodies();
        let mut out = Vec::new();
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                out.push(distance(s.curvature(), &b[i].position(), &b[j].position()).ok()?);
            }
        }
        Some(out)
    };
    let d0 = dists(&samples.first()?.state)?;
    let mut worst = 0.0f64;
    for s in samples {
        for (a, b) in dists(&s.state)?.iter().zip(&d0) {
            worst = worst.max((a - b).abs());
        }
    }
    Some(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// Largest component error divided by the largest analytic component.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub max_analytic: f64,
    pub max_finite_difference: f64,
}

/// Compares the homogeneous analytic gradient with central differences of
/// the extended-distance potential along the ambient axes.
pub fn finite_difference_gradient_check(state: &SystemState, step: f64) -> Result<GradientCheck> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let k = state.curvature();
    let masses = state.masses();
    let q = state.positions();
    let mut out = GradientCheck {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        max_analytic: 0.0,
        max_finite_difference: 0.0,
    };
    for i in 0..q.len() {
        let g = grad_force_function_homogeneous(k, &masses, &q, i)?;
        // undo the sign convention on the z partial
        let euclid = [g.x, g.y, k.sigma() * g.z];
        for (axis, &an) in euclid.iter().enumerate() {
            let mut plus = q.clone();
            let mut minus = q.clone();
            let bump = |v: &mut Vec3, d: f64| match axis {
                0 => v.x += d,
                1 => v.y += d,
                _ => v.z += d,
            };
            bump(&mut plus[i], step);
            bump(&mut minus[i], -step);
            let fd = (force_function_extended(k, &masses, &plus)?
                - force_function_extended(k, &masses, &minus)?)
                / (2.0 * step);
            out.max_abs_error = out.max_abs_error.max((fd - an).abs());
            out.max_analytic = out.max_analytic.max(an.abs());
            out.max_finite_difference = out.max_finite_difference.max(fd.abs());
        }
    }
    out.max_rel_error = out.max_abs_error / out.max_analytic.max(1e-12);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curvature;
    use std::f64::consts::PI;

    fn rest(k: Curvature, m: &[f64], q: &[Vec3]) -> SystemState {
        SystemState::projected(k, m, q, &vec![Vec3::ZERO; q.len()]).unwrap()
    }

    #[test]
    fn moments() {
        let n = 5;
        let q: Vec<Vec3> = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n as f64;
                Vec3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let s = rest(Curvature::SPHERE, &vec![2.0; n], &q);
        assert!((moment_inertia_i(&s) - 10.0).abs() < 1e-14);
        assert!(moment_inertia_j(&s).is_err());
        let s = rest(Curvature::SPHERE, &[1.0], &[Vec3::new(0.0, 0.0, 1.0)]);
        assert_eq!(moment_inertia_i(&s), 0.0);
    }

    #[test]
    fn alignment() {
        let s = rest(
            Curvature::SPHERE,
            &[1.0, 1.0],
            &[Vec3::new(1.0, 0.0, 0.3), Vec3::new(0.0, 1.0, -0.8)],
        );
        assert!(geodesic_alignment(&s).is_aligned);
        let r6 = 6f64.sqrt();
        let s2 = 2f64.sqrt();
        let tet = rest(
            Curvature::SPHERE,
            &[1.0; 4],
            &[
                Vec3::new(0.0, 0.0, 1.0),
                Vec3::new(0.0, 2.0 * s2 / 3.0, -1.0 / 3.0),
                Vec3::new(-2.0 / r6, -s2 / 3.0, -1.0 / 3.0),
                Vec3::new(2.0 / r6, -s2 / 3.0, -1.0 / 3.0),
            ],
        );
        assert!(!geodesic_alignment(&tet).is_aligned);
        let s = rest(
            Curvature::SPHERE,
            &[1.0; 3],
            &[Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.6, 0.0, 0.8), Vec3::new(-0.6, 0.0, 0.8)],
        );
        let a = geodesic_alignment(&s);
        assert!(a.is_aligned);
        assert!((a.normal.y.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_and_unwrap() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let mut p: Vec<f64> = t.iter().map(|t| ((1.7 * t + 0.2f64).sin()).atan2((1.7 * t + 0.2f64).cos())).collect();
        unwrap_phase(&mut p);
        let (w, b, r) = linear_fit(&t, &p);
        assert!((w - 1.7).abs() < 1e-12 && (b - 0.2).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn gradient_check_two_body_hyperbolic() {
        let s = rest(
            Curvature::HYPERBOLIC,
            &[1.0, 2.0],
            &[Vec3::new(0.2, 0.1, 1.0), Vec3::new(-0.5, 0.7, 1.0)],
        );
        let c = finite_difference_gradient_check(&s, 1e-6).unwrap();
        assert!(c.max_rel_error < 1e-6, "{c:?}");
        assert!(finite_difference_gradient_check(&s, 0.0).is_err());
    }
}
