use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kappa-nbody"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scenario(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(format!("{name}.json"));
    fs::write(&p, json).unwrap();
    p
}

fn simulate(file: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", file.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    exec(&args)
}

fn summary(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{name}_summary.json"))).unwrap()).unwrap()
}

const ISO_8M: &str = r#"{"name": "iso8", "kappa": 1, "t_end": 20,
    "family": {"kind": "isosceles_singularity", "case": {"case": "m8m"}, "x0": 0.05}}"#;
const TETRA: &str = r#"{"name": "tetra", "kappa": 1, "t_end": 10,
    "family": {"kind": "tetrahedron", "mass": 1}}"#;
const LAGRANGE: &str = r#"{"name": "lagrange", "kappa": 1, "t_end": 10,
    "family": {"kind": "lagrangian", "z": 0.3, "mass": 1}}"#;

#[test]
fn isosceles_8m_stops_at_collision_antipodal() {
    let dir = TempDir::new().unwrap();
    let f = scenario(dir.path(), "iso8", ISO_8M);
    let out = simulate(&f, dir.path(), &[]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "iso8");
    assert_eq!(s["stop"], "collision_antipodal");
    assert_eq!(s["stop_detail"]["kind"], "singularity_event");
    assert!(!s["classification"].as_array().unwrap().is_empty());
    // the other outputs are still written
    assert!(dir.path().join("iso8_trajectory.csv").exists());
    assert!(dir.path().join("iso8_diagnostics.csv").exists());
}

#[test]
fn tetrahedron_stays_at_rest() {
    let dir = TempDir::new().unwrap();
    let f = scenario(dir.path(), "tetra", TETRA);
    let out = simulate(&f, dir.path(), &[]);
    assert_eq!(code(&out), 0);
    let s = summary(dir.path(), "tetra");
    assert_eq!(s["stop"], "reached_t_end");
    assert!(s["max_speed"].as_f64().unwrap() < 1e-10, "{}", s["max_speed"]);
}

#[test]
fn lagrangian_conserves_energy() {
    let dir = TempDir::new().unwrap();
    let f = scenario(dir.path(), "lagrange", LAGRANGE);
    let out = simulate(&f, dir.path(), &[]);
    assert_eq!(code(&out), 0);
    let s = summary(dir.path(), "lagrange");
    let drift = s["drift"]["energy"].as_f64().unwrap();
    assert!(drift < 1e-8, "energy drift {drift:e}");
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let f = scenario(dir.path(), "lagrange", LAGRANGE);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b] {
        assert_eq!(code(&simulate(&f, d, &["--samples", "50"])), 0);
    }
    // batch integrates each scenario sequentially in a worker thread
    let out = exec(&["batch", f.to_str().unwrap(), "--out-dir", c.to_str().unwrap(), "--samples", "50"]);
    assert_eq!(code(&out), 0);
    for file in ["lagrange_trajectory.csv", "lagrange_diagnostics.csv", "lagrange_summary.json"] {
        let x = fs::read(a.join(file)).unwrap();
        assert_eq!(x, fs::read(b.join(file)).unwrap(), "{file}");
        assert_eq!(x, fs::read(c.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn csv_layout() {
    let dir = TempDir::new().unwrap();
    let f = scenario(dir.path(), "lagrange", LAGRANGE);
    assert_eq!(code(&simulate(&f, dir.path(), &["--samples", "10"])), 0);

    let traj = fs::read_to_string(dir.path().join("lagrange_trajectory.csv")).unwrap();
    assert!(!traj.contains('\r'));
    let mut lines = traj.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 3 * 6);
    assert_eq!(&header[..7], ["t", "x0", "y0", "z0", "vx0", "vy0", "vz0"]);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for field in rows[3].split(',') {
        let (mantissa, _) = field.split_once('e').unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{field}");
        field.parse::<f64>().unwrap();
    }

    let diag = fs::read_to_string(dir.path().join("lagrange_diagnostics.csv")).unwrap();
    assert_eq!(
        diag.lines().next().unwrap(),
        "t,energy,cx,cy,cz,I,J,min_pair_gap,constraint_residual"
    );
    // J is only defined on the hyperboloid
    let row: Vec<&str> = diag.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    assert_eq!(row[6], "");
}

#[test]
fn hyperbolic_diagnostics_include_j() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        dir.path(),
        "hre",
        r#"{"name": "hre", "kappa": -1, "t_end": 1,
            "family": {"kind": "hyperbolic_re", "x": 0.9}}"#,
    );
    assert_eq!(code(&simulate(&f, dir.path(), &["--samples", "4"])), 0);
    let diag = fs::read_to_string(dir.path().join("hre_diagnostics.csv")).unwrap();
    let row: Vec<&str> = diag.lines().nth(1).unwrap().split(',').collect();
    assert!(row[6].parse::<f64>().is_ok());
}

#[test]
fn raw_bodies_are_accepted_and_output_selection_applies() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        dir.path(),
        "pair",
        r#"{"name": "pair", "kappa": 1, "t_end": 0.5,
            "bodies": [
                {"mass": 1, "position": [1, 0, 0], "velocity": [0, 0.1, 0]},
                {"mass": 2, "position": [0, 0, 1], "velocity": [0.1, 0, 0]}
            ],
            "integrator": {"rel_tol": 1e-11},
            "output": {"trajectory": false}}"#,
    );
    assert_eq!(code(&simulate(&f, dir.path(), &[])), 0);
    assert!(!dir.path().join("pair_trajectory.csv").exists());
    assert!(dir.path().join("pair_summary.json").exists());
}

#[test]
fn invalid_scenarios_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("off", r#"{"name": "off", "kappa": 1, "t_end": 1,
            "bodies": [{"mass": 1, "position": [1.1, 0, 0], "velocity": [0, 0, 0]}]}"#),
        ("normal", r#"{"name": "normal", "kappa": 1, "t_end": 1,
            "bodies": [{"mass": 1, "position": [1, 0, 0], "velocity": [0.5, 0, 0]}]}"#),
        ("wrongk", r#"{"name": "wrongk", "kappa": -1, "t_end": 1,
            "family": {"kind": "tetrahedron"}}"#),
        ("both", r#"{"name": "both", "kappa": 1, "t_end": 1, "family": {"kind": "tetrahedron"},
            "bodies": [{"mass": 1, "position": [1, 0, 0], "velocity": [0, 0, 0]}]}"#),
        ("even", r#"{"name": "even", "kappa": 1, "t_end": 1, "family": {"kind": "ngon_fixed", "n": 4}}"#),
        ("flat", r#"{"name": "flat", "kappa": 0, "t_end": 1, "family": {"kind": "tetrahedron"}}"#),
        ("typo", r#"{"name": "typo", "kappa": 1, "t_end": 1, "familly": {}}"#),
        ("broken", "{ not json"),
    ];
    for (name, json) in cases {
        let f = scenario(dir.path(), name, json);
        let out = simulate(&f, &dir.path().join("out"), &[]);
        assert_eq!(code(&out), 2, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = simulate(&scenario(dir.path(), "off", cases[0].1), dir.path(), &[]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("position residual"));
}

#[test]
fn batch_reports_the_worst_outcome() {
    let dir = TempDir::new().unwrap();
    let iso = scenario(dir.path(), "iso8", ISO_8M);
    let tetra = scenario(dir.path(), "tetra", TETRA);
    let bad = scenario(dir.path(), "bad", "{}");
    let out_dir = dir.path().join("out");
    let args = |files: &[&PathBuf]| {
        let mut a: Vec<String> = vec!["batch".into()];
        a.extend(files.iter().map(|f| f.to_str().unwrap().to_string()));
        a.extend(["--out-dir".into(), out_dir.to_str().unwrap().into()]);
        a
    };
    let run = |files: &[&PathBuf]| code(&bin().args(args(files)).output().unwrap());
    assert_eq!(run(&[&tetra]), 0);
    assert_eq!(run(&[&tetra, &iso]), 3);
    assert_eq!(run(&[&tetra, &iso, &bad]), 2);
    assert!(out_dir.join("tetra_summary.json").exists());
    assert!(out_dir.join("iso8_summary.json").exists());
    // no temporary files are left behind
    let leftovers = fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

fn roots(args: &[&str]) -> Vec<f64> {
    let out = exec(args);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    v["roots"].as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect()
}

#[test]
fn solve_eq4_target_4_has_four_roots() {
    assert_eq!(roots(&["solve", "eq4", "4"]).len(), 4);
}

// On (0, 1) the left-hand side never drops below 64√15/45 ≈ 5.51, so
// only the branch below the equator reaches 3.
#[test]
fn solve_ratio1_target_3_finds_the_root_below_the_equator() {
    let r = roots(&["solve", "ratio1", "3"]);
    assert_eq!(r.len(), 1);
    assert!(r[0] < 0.0);
    assert_eq!(roots(&["solve", "ratio1", "6"]).len(), 3);
}

#[test]
fn solve_eq7_inverts_the_unit_value() {
    let r = roots(&["solve", "eq7", "0.7955"]);
    assert_eq!(r.len(), 2);
    assert!((r[0] + 1.0).abs() < 1e-4 && (r[1] - 1.0).abs() < 1e-4, "{r:?}");
}

#[test]
fn solve_accepts_ranges_and_ngon_ids() {
    let r = roots(&["solve", "eq4", "4", "--range", "0", "1"]);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|&z| z > 0.0));
    assert!(!roots(&["solve", "ngon:-1:5", "2"]).is_empty());
    assert_eq!(code(&exec(&["solve", "eq99", "1"])), 1);
}

#[test]
fn scan_counts_roots_per_target() {
    let out = exec(&["scan", "eq4", "--targets", "3.5:5:4"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<Value> = serde_json::from_str(&stdout(&out)).unwrap();
    let counts: Vec<u64> = rows.iter().map(|r| r["count"].as_u64().unwrap()).collect();
    // 3.5 and 4 lie between the tangency value and 8/√3, 5 above it
    assert_eq!(counts, [4, 4, 4, 2]);
    assert_eq!(code(&exec(&["scan", "eq4", "--targets", "3:5"])), 1);
}

fn verify(id: &str) -> (i32, String) {
    let out = exec(&["verify", id]);
    (code(&out), stdout(&out))
}

#[test]
fn verify_no_fixed_points_on_the_hyperboloid() {
    let (c, text) = verify("nofixH");
    assert_eq!(c, 0, "{text}");
    assert!(text.starts_with("PASS nofixH"));
}

#[test]
fn verify_parabolic_nonexistence() {
    let (c, text) = verify("thpar");
    assert_eq!(c, 0, "{text}");
    assert!(text.contains("100/100"));
}

#[test]
fn verify_tilted_ngon_is_not_rigid() {
    let (c, text) = verify("rengon");
    assert_eq!(c, 0, "{text}");
    assert!(text.starts_with("PASS rengon"));
}

#[test]
fn verify_seed_changes_draws_and_unknown_ids_fail() {
    let a = exec(&["verify", "nofixS", "--seed", "1"]);
    let b = exec(&["verify", "nofixS", "--seed", "2"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_ne!(stdout(&a), stdout(&b));
    assert_eq!(verify("nope").0, 1);
    let (c, list) = verify("list");
    assert_eq!(c, 0);
    assert!(list.lines().count() >= 12);
}
