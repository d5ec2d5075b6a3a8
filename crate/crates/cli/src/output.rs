//! File formats. Every float is written as `{:.16e}` (17 significant
//! digits, always a `.` decimal point) and every line ends in `\n`, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use kappa_nbody::integrate::{invariant_drift, Integration, InvariantDrift, StopReason};
use kappa_nbody::singularities::SingularityClassification;
use serde::Serialize;

use crate::scenario::Scenario;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(run: &Integration) -> String {
    let n = run.samples.first().map_or(0, |s| s.state.len());
    let mut out = String::from("t");
    for i in 0..n {
        for c in ["x", "y", "z", "vx", "vy", "vz"] {
            let _ = write!(out, ",{c}{i}");
        }
    }
    out.push('\n');
    for s in &run.samples {
        out.push_str(&num(s.time));
        for b in s.state.bodies() {
            for x in b.q().to_array().into_iter().chain(b.velocity().to_array()) {
                out.push(',');
                out.push_str(&num(x));
            }
        }
        out.push('\n');
    }
    out
}

pub fn diagnostics_csv(run: &Integration) -> String {
    let mut out = String::from("t,energy,cx,cy,cz,I,J,min_pair_gap,constraint_residual\n");
    for s in &run.samples {
        let d = &s.diagnostics;
        let c = d.angular_momentum;
        let j = d.moment_j.map(num).unwrap_or_default();
        let fields = [
            num(s.time),
            num(d.energy),
            num(c.x),
            num(c.y),
            num(c.z),
            num(d.moment_i),
            j,
            num(d.min_pair_gap),
            num(d.constraint_residual),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub kappa: f64,
    pub bodies: usize,
    pub t_end: f64,
    pub t_final: f64,
    pub stop: &'static str,
    pub stop_detail: StopReason,
    pub classification: Vec<SingularityClassification>,
    pub drift: InvariantDrift,
    pub max_speed: f64,
    pub final_speed_sq: Vec<f64>,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Summary {
    pub fn new(scenario: &Scenario, run: &Integration) -> Self {
        let last = run.last();
        let classification = match &run.stop {
            StopReason::SingularityEvent { classification, .. } => classification.clone(),
            _ => Vec::new(),
        };
        let max_speed = run
            .samples
            .iter()
            .flat_map(|s| s.state.bodies().iter().map(|b| b.velocity().norm()))
            .fold(0.0, f64::max);
        Self {
            name: scenario.name.clone(),
            kappa: scenario.kappa,
            bodies: last.state.len(),
            t_end: scenario.t_end,
            t_final: last.time,
            stop: run.stop.label(),
            stop_detail: run.stop.clone(),
            classification,
            drift: invariant_drift(&run.samples),
            max_speed,
            final_speed_sq: last.state.bodies().iter().map(|b| b.velocity().dot(b.velocity())).collect(),
            samples: run.samples.len(),
            accepted_steps: run.accepted_steps,
            rejected_steps: run.rejected_steps,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary is plain data");
        s.push('\n');
        s
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let file = path.file_name().context("output path has no file name")?;
    let mut tmp = dir.to_path_buf();
    tmp.push(format!(".{}.tmp", file.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Writes the selected outputs of one run and returns their paths.
pub fn write_run(scenario: &Scenario, run: &Integration, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let sel = scenario.output;
    let mut files = Vec::new();
    let mut emit = |suffix: &str, text: String| -> anyhow::Result<()> {
        let p = dir.join(format!("{}_{suffix}", scenario.name));
        write_atomic(&p, &text)?;
        files.push(p);
        Ok(())
    };
    if sel.trajectory {
        emit("trajectory.csv", trajectory_csv(run))?;
    }
    if sel.diagnostics {
        emit("diagnostics.csv", diagnostics_csv(run))?;
    }
    if sel.summary {
        emit("summary.json", Summary::new(scenario, run).to_json())?;
    }
    Ok(files)
}
