//! Scenario files: a curvature, either raw bodies or a named family, and
//! run settings.

use std::path::Path;

use anyhow::Context;
use kappa_nbody::equilibria::{
    eulerian_re, fixed_point_ngon, fixed_point_tetrahedron, hyperbolic_re, lagrangian_re,
};
use kappa_nbody::integrate::IntegratorConfig;
use kappa_nbody::singularities::{IsoscelesScenario, MassCase};
use kappa_nbody::{Curvature, SystemState, Vec3};
use serde::{Deserialize, Serialize};

/// Raw input must lie this close to the surface and tangent space.
pub const INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub mass: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Family {
    NgonFixed {
        n: usize,
        #[serde(default = "one")]
        mass: f64,
    },
    Tetrahedron {
        #[serde(default = "one")]
        mass: f64,
    },
    /// Equilateral triangle rotating at height z.
    Lagrangian {
        z: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default)]
        clockwise: bool,
    },
    /// `mass` at the vertex (0, 0, 1), `big_mass` at `(±r, 0, z)`.
    Eulerian {
        z: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "one")]
        big_mass: f64,
        #[serde(default)]
        clockwise: bool,
    },
    HyperbolicRe {
        x: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "one")]
        big_mass: f64,
        #[serde(default)]
        clockwise: bool,
    },
    IsoscelesSingularity {
        case: MassCase,
        x0: f64,
        #[serde(default = "one")]
        mass: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSelection {
    pub trajectory: bool,
    pub diagnostics: bool,
    pub summary: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self { trajectory: true, diagnostics: true, summary: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bodies: Option<Vec<BodySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSelection,
}

/// Why a scenario was rejected. Maps to exit code 2.
#[derive(Debug)]
pub struct InvalidScenario(pub String);

impl std::fmt::Display for InvalidScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid scenario: {}", self.0)
    }
}

impl std::error::Error for InvalidScenario {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidScenario(msg.into()).into()
}

impl Scenario {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn curvature(&self) -> anyhow::Result<Curvature> {
        Curvature::new(self.kappa).map_err(|e| invalid(e.to_string()))
    }

    /// Validates the scenario and builds its initial state.
    pub fn build(&self) -> anyhow::Result<SystemState> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid(format!("name {:?} cannot be used as a file stem", self.name)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end must be positive, got {}", self.t_end)));
        }
        self.integrator.validate().map_err(|e| invalid(e.to_string()))?;
        let k = self.curvature()?;
        match (&self.bodies, &self.family) {
            (Some(b), None) => build_bodies(k, b),
            (None, Some(f)) => build_family(k, f),
            _ => Err(invalid("give exactly one of `bodies` and `family`")),
        }
    }

    /// The same run with the bodies written out explicitly.
    #[cfg(test)]
    pub fn with_bodies(&self, state: &SystemState) -> Scenario {
        Scenario {
            bodies: Some(bodies_of(state)),
            family: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
fn bodies_of(state: &SystemState) -> Vec<BodySpec> {
    state
        .bodies()
        .iter()
        .map(|b| BodySpec {
            mass: b.mass(),
            position: b.q().to_array(),
            velocity: b.velocity().to_array(),
        })
        .collect()
}

fn build_bodies(k: Curvature, bodies: &[BodySpec]) -> anyhow::Result<SystemState> {
    if bodies.is_empty() {
        return Err(invalid("no bodies"));
    }
    let mut report = Vec::new();
    for (i, b) in bodies.iter().enumerate() {
        let q = Vec3::from(b.position);
        let v = Vec3::from(b.velocity);
        let pr = k.point_residual(q);
        let tr = k.tangency_residual(q, v);
        if !(pr <= INPUT_TOL) {
            report.push(format!("body {i}: position residual {pr:.3e}"));
        }
        if !(tr <= INPUT_TOL) {
            report.push(format!("body {i}: tangency residual {tr:.3e}"));
        }
    }
    if !report.is_empty() {
        return Err(invalid(format!(
            "constraints violated beyond {INPUT_TOL:e}: {}",
            report.join("; ")
        )));
    }
    let m: Vec<f64> = bodies.iter().map(|b| b.mass).collect();
    let q: Vec<Vec3> = bodies.iter().map(|b| Vec3::from(b.position)).collect();
    let v: Vec<Vec3> = bodies.iter().map(|b| Vec3::from(b.velocity)).collect();
    SystemState::projected(k, &m, &q, &v).map_err(|e| invalid(e.to_string()))
}

fn need(k: Curvature, kappa: f64, family: &str) -> anyhow::Result<()> {
    if k.kappa() != kappa {
        return Err(invalid(format!("family {family} needs κ = {kappa}, got {}", k.kappa())));
    }
    Ok(())
}

fn build_family(k: Curvature, f: &Family) -> anyhow::Result<SystemState> {
    let bad = |e: kappa_nbody::Error| invalid(e.to_string());
    match *f {
        Family::NgonFixed { n, mass } => {
            need(k, 1.0, "ngon_fixed")?;
            fixed_point_ngon(n, mass).map_err(bad)
        }
        Family::Tetrahedron { mass } => {
            need(k, 1.0, "tetrahedron")?;
            fixed_point_tetrahedron(mass).map_err(bad)
        }
        Family::Lagrangian { z, mass, clockwise } => lagrangian_re(k, z, mass, !clockwise)
            .and_then(|p| p.state_at(&[mass; 3], 0.0))
            .map_err(bad),
        Family::Eulerian { z, mass, big_mass, clockwise } => eulerian_re(k, z, mass, big_mass, !clockwise)
            .and_then(|p| p.state_at(&[mass, big_mass, big_mass], 0.0))
            .map_err(bad),
        Family::HyperbolicRe { x, mass, big_mass, clockwise } => {
            need(k, -1.0, "hyperbolic_re")?;
            hyperbolic_re(x, mass, big_mass, !clockwise)
                .and_then(|p| p.state_at(&[mass, big_mass, big_mass], 0.0))
                .map_err(bad)
        }
        Family::IsoscelesSingularity { case, x0, mass } => {
            need(k, 1.0, "isosceles_singularity")?;
            IsoscelesScenario::new(case, x0, mass).map(|s| s.state()).map_err(bad)
        }
    }
}
