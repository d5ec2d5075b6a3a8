//! `kappa-nbody`: run scenarios, solve equilibrium equations and check the
//! bundled theorems from the command line.
//!
//! Exit codes: 0 success, 1 failed check or other error, 2 invalid
//! scenario, 3 the run stopped at a singularity (outputs are still written).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kappa_nbody::equilibria::{solve_roots, RootEquation, RootScan};
use kappa_nbody::integrate::{integrate, StopReason};
use kappa_nbody::par::{self, Execution};
use serde::Serialize;

use scenario::{InvalidScenario, Scenario};

#[derive(Parser)]
#[command(name = "kappa-nbody", version, about = "n-body problem on the sphere and the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write trajectory, diagnostics and summary.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Roots of an equilibrium equation `lhs(v) = target` as JSON.
    Solve {
        /// eq4, eq5, ratio1, ratio2, eq7 or ngon:<κ>:<n>
        equation: String,
        #[arg(allow_hyphen_values = true)]
        target: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
    },
    /// Run a bundled check and print its evidence.
    Verify {
        /// Check id; `list` prints them all.
        theorem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Root counts over a grid of targets, `--targets lo:hi:n`.
    Scan {
        equation: String,
        #[arg(long)]
        targets: String,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
    },
    /// Run several scenarios, in parallel when built with `parallel`.
    Batch {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args, Clone, Copy, Default)]
struct Overrides {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Initial step size.
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long)]
    event_threshold: Option<f64>,
    /// Number of evenly spaced samples between 0 and t_end.
    #[arg(long)]
    samples: Option<usize>,
}

impl Overrides {
    fn apply(&self, sc: &mut Scenario) -> anyhow::Result<()> {
        let cfg = &mut sc.integrator;
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.dt0 {
            cfg.initial_dt = v;
        }
        if let Some(v) = self.event_threshold {
            cfg.singularity_event_threshold = v;
        }
        if let Some(n) = self.samples {
            if n == 0 {
                return Err(InvalidScenario("--samples must be at least 1".into()).into());
            }
            cfg.sample_interval = Some(sc.t_end / n as f64);
        }
        Ok(())
    }
}

/// What happened to one scenario.
enum RunStatus {
    Finished(StopReason),
    Invalid(String),
    Failed(String),
}

impl RunStatus {
    fn code(&self) -> u8 {
        match self {
            RunStatus::Finished(s) if s.is_singularity() => 3,
            RunStatus::Finished(StopReason::ReachedTEnd) => 0,
            RunStatus::Finished(_) | RunStatus::Failed(_) => 1,
            RunStatus::Invalid(_) => 2,
        }
    }
}

fn simulate_one(path: &Path, out_dir: &Path, overrides: Overrides, exec: Execution) -> RunStatus {
    let attempt = || -> anyhow::Result<(String, StopReason, f64)> {
        let mut sc = Scenario::load(path)?;
        overrides.apply(&mut sc)?;
        let state = sc.build()?;
        sc.integrator.execution = exec;
        let run = integrate(&state, sc.t_end, &sc.integrator, |_| {})?;
        output::write_run(&sc, &run, out_dir)?;
        let t = run.last().time;
        Ok((sc.name, run.stop, t))
    };
    match attempt() {
        Ok((name, stop, t)) => {
            println!("{name}: {} at t = {}", stop.label(), output::num(t));
            RunStatus::Finished(stop)
        }
        Err(e) if e.downcast_ref::<InvalidScenario>().is_some() => RunStatus::Invalid(format!("{e:#}")),
        Err(e) => RunStatus::Failed(format!("{e:#}")),
    }
}

fn report(path: &Path, status: &RunStatus) {
    match status {
        RunStatus::Invalid(msg) | RunStatus::Failed(msg) => eprintln!("{}: {msg}", path.display()),
        RunStatus::Finished(_) => {}
    }
}

fn parse_equation(s: &str) -> anyhow::Result<RootEquation> {
    RootEquation::parse(s).with_context(|| format!("equation {s:?}"))
}

fn parse_range(r: Option<Vec<f64>>) -> Option<(f64, f64)> {
    r.map(|v| (v[0], v[1]))
}

fn parse_targets(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("targets must look like lo:hi:n, got {s:?}");
    };
    let (lo, hi): (f64, f64) = (lo.parse()?, hi.parse()?);
    let n: usize = n.parse()?;
    if n == 0 || !(lo <= hi) {
        bail!("empty target grid {s:?}");
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

#[derive(Serialize)]
struct ScanRow {
    target: f64,
    count: usize,
    tangencies: usize,
    roots: Vec<f64>,
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Simulate { scenario, out_dir, overrides } => {
            let status = simulate_one(&scenario, &out_dir, overrides, Execution::default());
            report(&scenario, &status);
            Ok(status.code())
        }
        Command::Solve { equation, target, range, grid } => {
            let eq = parse_equation(&equation)?;
            let scan: RootScan = solve_roots(eq, target, parse_range(range), grid)?;
            print_json(&scan)?;
            Ok(0)
        }
        Command::Scan { equation, targets, range, grid } => {
            let eq = parse_equation(&equation)?;
            let range = parse_range(range);
            let mut rows = Vec::new();
            for t in parse_targets(&targets)? {
                let s = solve_roots(eq, t, range, grid)?;
                rows.push(ScanRow {
                    target: t,
                    count: s.count(),
                    tangencies: s.roots.iter().filter(|r| r.tangency).count(),
                    roots: s.roots.iter().map(|r| r.value).collect(),
                });
            }
            print_json(&rows)?;
            Ok(0)
        }
        Command::Verify { theorem, seed } => {
            if theorem == "list" {
                for (id, what) in verify::THEOREMS {
                    println!("{id:<13} {what}");
                }
                return Ok(0);
            }
            match verify::run_check(&theorem, seed) {
                None => bail!("unknown theorem id {theorem:?}; try `verify list`"),
                Some(Ok(evidence)) => {
                    println!("PASS {theorem}: {evidence}");
                    Ok(0)
                }
                Some(Err(evidence)) => {
                    println!("FAIL {theorem}: {evidence}");
                    Ok(1)
                }
            }
        }
        Command::Batch { scenarios, out_dir, overrides } => {
            // each scenario integrates sequentially inside its own worker
            let statuses = par::map(Execution::default(), &scenarios, |p| {
                simulate_one(p, &out_dir, overrides, Execution::Sequential)
            });
            for (p, s) in scenarios.iter().zip(&statuses) {
                report(p, s);
            }
            let codes: Vec<u8> = statuses.iter().map(RunStatus::code).collect();
            Ok(if codes.contains(&2) {
                2
            } else if codes.contains(&1) {
                1
            } else if codes.contains(&3) {
                3
            } else {
                0
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
