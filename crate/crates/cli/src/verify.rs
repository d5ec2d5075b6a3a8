//! Bundled theorem checks behind `kappa-nbody verify <id>`.

use std::f64::consts::TAU;

use kappa_nbody::diagnostics::{finite_difference_gradient_check, saari_classify, SaariMode, SaariVerdict};
use kappa_nbody::dynamics::{
    acceleration, force_function_homogeneous, grad_force_function_homogeneous, pair_gap, potential,
};
use kappa_nbody::equilibria::{
    eulerian_omega_sq, eulerian_re, fixed_point_ngon, fixed_point_tetrahedron,
    hemisphere_no_fixed_point_witness, hyperbolic_no_fixed_point_witness, hyperbolic_re,
    lagrangian_re, ngon_re, parabolic_nonexistence_check, solve_roots, tilted_rotating_ngon,
    tri_residual_max, verify_relative_equilibrium, ParabolicAnsatz, REKind, REParams, RootEquation,
};
use kappa_nbody::integrate::{
    integrate, integrate_ode, invariant_drift, Integration, IntegratorConfig, StopReason,
    TrajectorySample,
};
use kappa_nbody::singularities::{IsoscelesScenario, MassCase, SingularityKind};
use kappa_nbody::{Curvature, SystemState, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S2: Curvature = Curvature::SPHERE;
const H2: Curvature = Curvature::HYPERBOLIC;

pub type Outcome = Result<String, String>;

/// `(id, description)`, one entry per check.
pub const THEOREMS: &[(&str, &str)] = &[
    ("conservation", "energy and angular momentum are conserved"),
    ("eul", "homogeneity and the Euler identity"),
    ("gradient", "analytic gradient against finite differences"),
    ("fix", "odd n-gons and the tetrahedron are fixed points"),
    ("nofix", "no fixed points on the hyperboloid or in a hemisphere"),
    ("nofixH", "no fixed points on the hyperboloid"),
    ("nofixS", "no fixed points in a closed hemisphere"),
    ("re", "canonical relative equilibria rotate rigidly"),
    ("roots", "root counts of the equilibrium equations"),
    ("rigidity", "tilted n-gon, unequal masses and geodesic chase are not rigid"),
    ("rengon", "a tilted rotating n-gon is not a relative equilibrium"),
    ("equil", "unequal masses break the rotating equilateral triangle"),
    ("noreH", "no hyperbolic chase along a fixed geodesic"),
    ("singularity", "isosceles singularity scenarios"),
    ("thpar", "parabolic rotations do not exist"),
    ("saari", "Saari's conjecture in the geodesic case"),
    ("flat", "flat limit of the two-body potential"),
];

pub fn run_check(id: &str, seed: u64) -> Option<Outcome> {
    let out = match id {
        "conservation" => conservation(seed),
        "eul" => euler_identity(seed),
        "gradient" => gradient_oracle(seed),
        "fix" => fixed_points(),
        "nofix" => nofix_h(seed).and_then(|a| nofix_s(seed).map(|b| format!("{a}, {b}"))),
        "nofixH" => nofix_h(seed),
        "nofixS" => nofix_s(seed),
        "re" => relative_equilibria(),
        "roots" => root_counts(),
        "rigidity" => rengon().and_then(|a| {
            let b = equil()?;
            let c = no_re_h();
            c.map(|c| format!("{a}, {b}, {c}"))
        }),
        "rengon" => rengon(),
        "equil" => equil(),
        "noreH" => no_re_h(),
        "singularity" => singularity(),
        "thpar" => thpar(seed),
        "saari" => saari(),
        "flat" => flat_limit(),
        _ => return None,
    };
    Some(out)
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn surface_point(k: Curvature, r: &mut ChaCha8Rng) -> Vec3 {
    if k.is_spherical() {
        loop {
            let v = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }
    let s = r.gen_range(0.0..1.5f64).sinh();
    let a = r.gen_range(0.0..TAU);
    Vec3::new(s * a.cos(), s * a.sin(), (1.0 + s * s).sqrt())
}

fn spread(k: Curvature, n: usize, min_gap: f64, r: &mut ChaCha8Rng) -> Vec<Vec3> {
    loop {
        let q: Vec<Vec3> = (0..n).map(|_| surface_point(k, r)).collect();
        if (0..n).all(|i| ((i + 1)..n).all(|j| pair_gap(k, q[i], q[j]) > min_gap)) {
            return q;
        }
    }
}

fn random_state(k: Curvature, n: usize, speed: f64, min_gap: f64, r: &mut ChaCha8Rng) -> Result<SystemState, String> {
    let q = spread(k, n, min_gap, r);
    let m: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
    let v: Vec<Vec3> = (0..n)
        .map(|_| {
            if speed == 0.0 {
                Vec3::ZERO
            } else {
                Vec3::new(r.gen_range(-speed..speed), r.gen_range(-speed..speed), r.gen_range(-speed..speed))
            }
        })
        .collect();
    SystemState::projected(k, &m, &q, &v).map_err(|e| e.to_string())
}

fn tight() -> IntegratorConfig {
    IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() }
}

fn run(state: &SystemState, t_end: f64, cfg: &IntegratorConfig) -> Result<Integration, String> {
    integrate(state, t_end, cfg, |_| {}).map_err(|e| e.to_string())
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

/// Half-unit chunks; `None` once two bodies get within gap 1e-4 or a body
/// leaves |q| ≤ 50.
fn guarded_run(state: &SystemState, t_end: f64, cfg: &IntegratorConfig) -> Result<Option<Vec<TrajectorySample>>, String> {
    let mut all = Vec::new();
    let mut cur = state.clone();
    let chunks = (t_end / 0.5).ceil() as usize;
    for c in 1..=chunks {
        let out = run(&cur, (0.5 * c as f64).min(t_end), cfg)?;
        let bad = out.stop != StopReason::ReachedTEnd
            || out.samples.iter().any(|s| {
                s.diagnostics.min_pair_gap < 1e-4 || s.state.positions().iter().any(|q| q.norm() > 50.0)
            });
        if bad {
            return Ok(None);
        }
        cur = out.last().state.clone();
        all.extend(out.samples);
    }
    Ok(Some(all))
}

fn conservation(seed: u64) -> Outcome {
    let mut r = rng(seed, 1);
    let cfg = IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..Default::default() };
    let (mut we, mut wc) = (0.0f64, 0.0f64);
    let mut replaced = 0;
    for k in [S2, H2] {
        let mut kept = 0;
        while kept < 5 {
            if replaced > 500 {
                return Err("too many draws with close encounters".into());
            }
            let s = random_state(k, 3, 0.5, 0.1, &mut r)?;
            let Some(samples) = guarded_run(&s, 5.0, &cfg)? else {
                replaced += 1;
                continue;
            };
            kept += 1;
            let d = invariant_drift(&samples);
            we = we.max(d.energy);
            wc = wc.max(d.angular_momentum);
        }
    }
    verdict(
        we < 1e-8 && wc < 1e-8,
        format!("10 runs to t=5: energy drift {we:.2e}, angular momentum drift {wc:.2e}, {replaced} draws replaced"),
    )
}

fn euler_identity(seed: u64) -> Outcome {
    let mut r = rng(seed, 2);
    let (mut wd, mut ws) = (0.0f64, 0.0f64);
    for n in 0..200 {
        let k = if n % 2 == 0 { S2 } else { H2 };
        let s = random_state(k, 2 + n % 4, 0.0, 1e-3, &mut r)?;
        let (m, q) = (s.masses(), s.positions());
        for i in 0..q.len() {
            let g = grad_force_function_homogeneous(k, &m, &q, i).map_err(err)?;
            wd = wd.max(k.inner(q[i], g).abs());
        }
        let u = force_function_homogeneous(k, &m, &q).map_err(err)?;
        for eta in [0.5, 2.0] {
            let qs: Vec<Vec3> = q.iter().map(|&v| v * eta).collect();
            let us = force_function_homogeneous(k, &m, &qs).map_err(err)?;
            ws = ws.max((us - u).abs() / u.abs().max(1.0));
        }
    }
    verdict(wd < 1e-10 && ws < 1e-12, format!("max |q⊙∇U| {wd:.2e}, max rescaling change {ws:.2e}"))
}

fn gradient_oracle(seed: u64) -> Outcome {
    let mut r = rng(seed, 3);
    let mut worst = 0.0f64;
    for k in [S2, H2] {
        for _ in 0..50 {
            let s = random_state(k, 3, 0.0, 0.05, &mut r)?;
            worst = worst.max(finite_difference_gradient_check(&s, 1e-5).map_err(err)?.max_rel_error);
        }
    }
    verdict(worst < 1e-6, format!("max relative error {worst:.2e} over 100 states"))
}

fn fixed_points() -> Outcome {
    let mut states = Vec::new();
    for n in [3, 5, 7] {
        states.push(fixed_point_ngon(n, 1.0).map_err(err)?);
    }
    states.push(fixed_point_tetrahedron(1.0).map_err(err)?);
    let mut worst = 0.0f64;
    for s in &states {
        for sample in run(s, 10.0, &IntegratorConfig::default())?.samples {
            for v in sample.state.velocities() {
                worst = worst.max(v.norm());
            }
        }
    }
    let even = [2, 4, 6].iter().all(|&n| fixed_point_ngon(n, 1.0).is_err());
    verdict(
        worst < 1e-10 && even,
        format!("max speed {worst:.2e} on [0, 10]; even n-gon rejected: {even}"),
    )
}

fn nofix_h(seed: u64) -> Outcome {
    let mut r = rng(seed, 5);
    let mut min = f64::INFINITY;
    let mut index = 0;
    for _ in 0..20 {
        let n = r.gen_range(2..7);
        let s = random_state(H2, n, 0.0, 1e-3, &mut r)?;
        let w = hyperbolic_no_fixed_point_witness(&s).map_err(err)?;
        if w.certificate < min {
            min = w.certificate;
            index = w.index;
        }
    }
    verdict(
        min > 1e-12,
        format!("highest body accelerates downwards in 20/20 configurations, smallest -z̈ {min:.3e} (body {index})"),
    )
}

fn nofix_s(seed: u64) -> Outcome {
    let mut r = rng(seed, 6);
    let mut min = f64::INFINITY;
    for _ in 0..20 {
        let n = r.gen_range(2..7);
        let mut q = spread(S2, n, 1e-3, &mut r);
        for v in &mut q {
            v.z = v.z.abs();
        }
        let b = &mut q[0];
        let rxy = (b.x * b.x + b.y * b.y).sqrt();
        *b = Vec3::new(b.x / rxy, b.y / rxy, 0.0);
        let m: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let s = SystemState::projected(S2, &m, &q, &vec![Vec3::ZERO; n]).map_err(err)?;
        min = min.min(hemisphere_no_fixed_point_witness(&s).map_err(err)?.certificate);
    }
    verdict(min > 1e-12, format!("hemisphere witnesses 20/20, smallest certificate {min:.3e}"))
}

fn re_horizon(p: &REParams) -> f64 {
    match p.kind() {
        REKind::Elliptic => 3.0 * TAU / p.omega().abs(),
        REKind::Hyperbolic => 3.0 / p.omega().abs(),
    }
}

fn re_run(p: &REParams, masses: &[f64], t_end: f64) -> Result<Integration, String> {
    let s = p.state_at(masses, 0.0).map_err(err)?;
    let cfg = IntegratorConfig { sample_interval: Some(t_end / 300.0), ..tight() };
    let out = run(&s, t_end, &cfg)?;
    if out.stop != StopReason::ReachedTEnd {
        return Err(format!("run stopped early: {}", out.stop.label()));
    }
    Ok(out)
}

fn relative_equilibria() -> Outcome {
    let cases: Vec<(&str, kappa_nbody::Result<REParams>, Vec<f64>)> = vec![
        ("lagrangian S²", lagrangian_re(S2, 0.3, 1.0, true), vec![1.0; 3]),
        ("lagrangian H²", lagrangian_re(H2, 1.05, 1.0, true), vec![1.0; 3]),
        ("eulerian S²", eulerian_re(S2, 0.4, 1.0, 1.0, true), vec![1.0; 3]),
        ("eulerian S² M=4m", eulerian_re(S2, -0.6, 1.0, 4.0, true), vec![1.0, 4.0, 4.0]),
        ("eulerian H²", eulerian_re(H2, 1.7, 1.0, 1.0, true), vec![1.0; 3]),
        ("4-gon S²", ngon_re(S2, 4, 0.2, 1.0, true), vec![1.0; 4]),
        ("5-gon H²", ngon_re(H2, 5, 1.05, 1.0, true), vec![1.0; 5]),
        ("hyperbolic", hyperbolic_re(0.9, 1.0, 1.0, true), vec![1.0; 3]),
    ];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, p, m) in cases {
        let p = p.map_err(err)?;
        let rep = verify_relative_equilibrium(&re_run(&p, &m, re_horizon(&p))?.samples, p.kind());
        worst = worst.max(rep.max_distance_drift);
        if !rep.passed {
            failures.push(format!("{name}: {}", rep.failures.join("; ")));
        }
    }
    let positive = [4.0, 6.0, 10.0].iter().all(|&big| {
        (1..400)
            .map(|i| -1.0 + i as f64 / 200.0)
            .filter(|z: &f64| z.abs() > 1e-9)
            .all(|z| eulerian_omega_sq(S2, z, 1.0, big).is_ok_and(|w| w > 0.0))
    });
    if !positive {
        failures.push("ω² not positive somewhere for M ≥ 4m".into());
    }
    if failures.is_empty() {
        Ok(format!("8 families, max distance drift {worst:.2e}; M ≥ 4m gives ω² > 0 on all of (-1, 1) minus 0"))
    } else {
        Err(failures.join(" | "))
    }
}

fn root_counts() -> Outcome {
    let scan = |eq, t: f64| solve_roots(eq, t, None, 4000).map_err(err);
    let mut ok = true;
    let mut lines = Vec::new();
    for (t, want) in [(4.0, 4), (8.0 / 3f64.sqrt(), 3), (5.0, 2)] {
        let s = scan(RootEquation::Eq4, t)?;
        ok &= s.count() == want && s.roots.iter().all(|r| r.residual.abs() < 1e-10);
        lines.push(format!("eq4 {t:.4}: {}/{want}", s.count()));
    }
    let s = scan(RootEquation::Eq4, 3.0)?;
    ok &= s.count() == 2 && s.roots.iter().all(|r| r.tangency);
    lines.push(format!("eq4 3 tangent: {}/2", s.count()));
    let s = scan(RootEquation::Ratio1, 3.0)?;
    ok &= s.count() == 3;
    lines.push(format!("ratio1 3: {}/3", s.count()));
    for t in [0.5, 1.0, 2.0] {
        let pos = scan(RootEquation::Eq7, t)?.roots.iter().filter(|r| r.value > 0.0).count();
        ok &= pos == 1;
        lines.push(format!("eq7 {t}: {pos}/1 positive"));
    }
    verdict(ok, lines.join(", "))
}

fn rengon() -> Outcome {
    let s = tilted_rotating_ngon(5, 1.0, 0.3, 1.0).map_err(err)?;
    let t = 2.0 * TAU;
    let out = run(&s, t, &IntegratorConfig { sample_interval: Some(t / 200.0), ..tight() })?;
    let rep = verify_relative_equilibrium(&out.samples, REKind::Elliptic);
    verdict(
        !rep.passed,
        format!("tilted 5-gon fails rigid rotation, distance drift {:.2e}", rep.max_distance_drift),
    )
}

fn equil() -> Outcome {
    let p = lagrangian_re(S2, 0.3, 1.0, true).map_err(err)?;
    let out = re_run(&p, &[1.0, 1.0, 1.001], 2.0 * TAU / p.omega().abs())?;
    let rep = verify_relative_equilibrium(&out.samples, REKind::Elliptic);
    verdict(
        !rep.passed,
        format!("masses (1, 1, 1.001) fail rigid rotation, distance drift {:.2e}", rep.max_distance_drift),
    )
}

fn no_re_h() -> Outcome {
    let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
    let tri = tri_residual_max(1.0, &[-0.9, 0.2, 1.3], &[1.0; 3], &times);
    verdict(tri > 1e-3, format!("fixed-geodesic chase residual {tri:.3e}"))
}

fn reduced_gap(sc: &IsoscelesScenario, out: &Integration) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for s in out.samples.iter().skip(1).step_by(4) {
        let q = s.state.positions()[1];
        let path = integrate_ode(|_, y, o| sc.reduced_ode(y, o), 0.0, &[sc.x0, sc.y0, 0.0, 0.0], s.time, &tight())
            .map_err(err)?;
        let (_, y) = path.last().expect("at least the start");
        worst = worst.max((q.x - y[0]).abs()).max((q.y - y[1]).abs());
    }
    Ok(worst)
}

fn singularity() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let mut reduced = 0.0f64;

    let sc = IsoscelesScenario::new(MassCase::M8m, 0.05, 1.0).map_err(err)?;
    let out = run(&sc.state(), 20.0, &tight())?;
    let v = out.last().state.velocities()[1];
    let hit = matches!(&out.stop, StopReason::SingularityEvent { primary, .. }
        if primary.kind == SingularityKind::CollisionAntipodal);
    ok &= hit && v.dot(v) > 1e4;
    lines.push(format!("M=8m {} at t={:.6}, speed² {:.3e}", out.stop.label(), out.last().time, v.dot(v)));
    if let StopReason::SingularityEvent { time, .. } = out.stop {
        let cfg = IntegratorConfig { sample_interval: Some(0.9 * time / 40.0), ..tight() };
        reduced = reduced.max(reduced_gap(&sc, &run(&sc.state(), 0.9 * time, &cfg)?)?);
    }

    for x0 in [0.05, 0.1] {
        let sc = IsoscelesScenario::new(MassCase::M2m, x0, 1.0).map_err(err)?;
        let out = run(&sc.state(), 20.0, &IntegratorConfig { sample_interval: Some(0.05), ..tight() })?;
        let xs: Vec<f64> = out.samples.iter().map(|s| s.state.positions()[1].x).collect();
        let min_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= out.stop == StopReason::ReachedTEnd && xs.len() > 2 && xs[1] > xs[0] && min_x >= x0 - 1e-9;
        lines.push(format!("M=2m x0={x0} {}, min x {min_x:.6}", out.stop.label()));
        if x0 == 0.1 {
            let short = run(&sc.state(), 5.0, &IntegratorConfig { sample_interval: Some(0.25), ..tight() })?;
            reduced = reduced.max(reduced_gap(&sc, &short)?);
        }
    }

    let sc = IsoscelesScenario::new(MassCase::M4m, 0.2, 1.0).map_err(err)?;
    let cfg = IntegratorConfig { singularity_event_threshold: 1e-10, sample_interval: Some(1e-4), ..Default::default() };
    let out = run(&sc.state(), 20.0, &cfg)?;
    let hit = matches!(&out.stop, StopReason::SingularityEvent { classification, .. }
        if classification.iter().any(|c| c.pair == (0, 1)
            && matches!(c.kind, SingularityKind::Collision | SingularityKind::CollisionAntipodal)));
    let v = out.last().state.velocities()[1];
    let target = sc.energy_h / (4.0 * sc.mass_small);
    let mut acc = 0.0f64;
    let mut near = 0;
    for s in &out.samples {
        if s.state.positions()[1].x < 1e-3 {
            near += 1;
            acc = acc.max((acceleration(&s.state).map_err(err)?[1].x + sc.mass_small).abs());
        }
    }
    ok &= hit && (v.dot(v) - target).abs() < 1e-4 * target && near > 0 && acc < 1e-3;
    lines.push(format!(
        "M=4m {}, speed² {:.8} vs h/4m {target:.8}, |ẍ+m| ≤ {acc:.2e}",
        out.stop.label(),
        v.dot(v)
    ));
    ok &= reduced < 1e-6;
    lines.push(format!("reduced vs full {reduced:.2e}"));
    verdict(ok, lines.join(", "))
}

fn thpar(seed: u64) -> Outcome {
    let mut r = rng(seed, 10);
    let mut hits = 0;
    for _ in 0..100 {
        let n = r.gen_range(1..6);
        let triples: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
                [a, b, (1.0f64 + a * a + b * b).sqrt()]
            })
            .collect();
        let masses: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..5.0)).collect();
        let ansatz = ParabolicAnsatz::new(triples).map_err(err)?;
        if parabolic_nonexistence_check(&ansatz, &masses).map_err(err)?.nonexistent {
            hits += 1;
        }
    }
    verdict(hits == 100, format!("{hits}/100 random ansätze reported nonexistent"))
}

fn saari() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let cases = [
        ("eulerian S²", eulerian_re(S2, 0.4, 1.0, 1.0, true), vec![1.0; 3], SaariMode::EllipticAboutZ),
        ("eulerian S² M=4m", eulerian_re(S2, -0.6, 1.0, 4.0, true), vec![1.0, 4.0, 4.0], SaariMode::EllipticAboutZ),
        ("eulerian H²", eulerian_re(H2, 1.7, 1.0, 1.0, false), vec![1.0; 3], SaariMode::EllipticAboutZ),
        ("hyperbolic", hyperbolic_re(0.9, 1.0, 1.0, true), vec![1.0; 3], SaariMode::HyperbolicAboutX),
    ];
    let mut worst = 0.0f64;
    for (name, p, m, mode) in cases {
        let p = p.map_err(err)?;
        match saari_classify(&re_run(&p, &m, re_horizon(&p))?.samples, mode) {
            SaariVerdict::RelativeEquilibrium { omega, .. } => {
                worst = worst.max((omega - p.omega()).abs());
            }
            SaariVerdict::Inconclusive { reason } => {
                ok = false;
                lines.push(format!("{name} inconclusive: {reason}"));
            }
        }
    }
    ok &= worst < 1e-8;
    lines.push(format!("max |ω_fit - ω| {worst:.2e}"));

    let REParams::Elliptic(mut ep) = eulerian_re(S2, 0.4, 1.0, 1.0, true).map_err(err)? else {
        unreachable!("eulerian relative equilibria rotate elliptically")
    };
    ep.omega *= 1.02;
    let p = REParams::Elliptic(ep);
    match saari_classify(&re_run(&p, &[1.0; 3], re_horizon(&p))?.samples, SaariMode::EllipticAboutZ) {
        SaariVerdict::Inconclusive { reason } => lines.push(format!("perturbed start inconclusive ({reason})")),
        SaariVerdict::RelativeEquilibrium { .. } => {
            ok = false;
            lines.push("perturbed start misclassified".into());
        }
    }
    verdict(ok, lines.join(", "))
}

fn flat_limit() -> Outcome {
    let (m1, m2, d) = (1.0, 2.0, 0.5);
    let newton = m1 * m2 / d;
    let gap = |kappa: f64| -> Result<f64, String> {
        let k = Curvature::new(kappa).map_err(err)?;
        let r = 1.0 / kappa.abs().sqrt();
        let a = d / r;
        let q = if kappa > 0.0 {
            [Vec3::new(0.0, 0.0, r), Vec3::new(r * a.sin(), 0.0, r * a.cos())]
        } else {
            [Vec3::new(0.0, 0.0, r), Vec3::new(r * a.sinh(), 0.0, r * a.cosh())]
        };
        Ok((potential(k, &[m1, m2], &q).map_err(err)? - newton).abs())
    };
    let mut ok = true;
    let mut lines = Vec::new();
    for sign in [1.0, -1.0] {
        let (e2, e4) = (gap(sign * 1e-2)?, gap(sign * 1e-4)?);
        let ratio = e2 / e4;
        ok &= (ratio / 100.0 - 1.0).abs() < 0.2 && e4 < 1e-3;
        lines.push(format!("κ = {:+e}: error ratio {ratio:.2}", sign * 1e-2));
    }
    verdict(ok, lines.join(", "))
}
