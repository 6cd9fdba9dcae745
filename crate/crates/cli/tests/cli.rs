use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oracle-geom"));
    c.env_remove("ORACLE_GEOM_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("oracle-geom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn all_verified(r: &Value) -> bool {
    r["verification"].as_object().unwrap().values().all(|v| v == &Value::Bool(true))
}

#[test]
fn gen_is_deterministic_per_seed() {
    for kind in ["ulp", "kdisks", "ktriangles", "terrain"] {
        let a = run(&["gen", kind, "--n", "50", "--seed", "9"]);
        let b = run(&["gen", kind, "--n", "50", "--seed", "9"]);
        let c = run(&["gen", kind, "--n", "50", "--seed", "10"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{kind}");
        assert_ne!(a.stdout, c.stdout, "{kind}");
    }
}

#[test]
fn generated_instances_solve_and_verify() {
    let cases: &[(&[&str], &[&str])] = &[
        (&["ulp", "--n", "80", "--d", "1"], &["solve-ulp"]),
        (&["ulp", "--n", "80", "--infeasible"], &["solve-ulp", "--solver", "seplab"]),
        (&["ulp", "--n", "40", "--d", "3"], &["solve-ulp", "--solver", "centerpoint"]),
        (&["kdisks", "--n", "60", "--layout", "separable"], &["learn-ball"]),
        (&["kdisks", "--n", "60", "--k", "2"], &["learn-kballs", "--sequential"]),
        (&["ktriangles", "--n", "80", "--k", "2"], &["cover-triangles"]),
        (&["terrain", "--n", "120", "--k", "2"], &["simplify-terrain"]),
    ];
    for (i, (g, r)) in cases.iter().enumerate() {
        let file = scratch(&format!("case{i}.json"));
        let mut args = vec!["gen"];
        args.extend_from_slice(g);
        args.extend(["--seed", "3", "--out", path(&file)]);
        assert_eq!(code(&run(&args)), 0);
        let mut args = vec!["run", r[0], path(&file)];
        args.extend_from_slice(&r[1..]);
        let rep = report(&run(&args));
        assert!(all_verified(&rep), "{r:?}: {}", rep["verification"]);
        assert!(rep["ledger"].is_object());
    }
}

#[test]
fn one_d_report_checks_the_query_bound() {
    let file = scratch("oned.json");
    assert_eq!(code(&run(&["gen", "ulp", "--n", "1000", "--d", "1", "--out", path(&file)])), 0);
    let rep = report(&run(&["run", "solve-ulp", path(&file)]));
    assert_eq!(rep["settings"]["solver"], "oneD");
    assert_eq!(rep["envelope"][0]["within"], true);
    assert!(rep["ledger"]["Separation"].as_u64().unwrap() <= 12);
}

#[test]
fn runs_are_reproducible_apart_from_wall_time() {
    let file = scratch("repro.json");
    assert_eq!(code(&run(&["gen", "ktriangles", "--n", "100", "--k", "2", "--out", path(&file)])), 0);
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    let a = strip(report(&run(&["run", "cover-triangles", path(&file), "--seed", "4"])));
    let b = strip(report(&run(&["run", "cover-triangles", path(&file), "--seed", "4"])));
    assert_eq!(a, b);
}

#[test]
fn terrain_mesh_and_sidecar_are_written() {
    let file = scratch("terrain.json");
    let mesh = scratch("terrain.obj");
    assert_eq!(code(&run(&["gen", "terrain", "--n", "150", "--k", "2", "--eps", "0.05", "--out", path(&file)])), 0);
    let rep = report(&run(&["run", "simplify-terrain", path(&file), "--mesh", path(&mesh)]));
    assert!(all_verified(&rep));
    let obj = std::fs::read_to_string(&mesh).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")) && obj.lines().any(|l| l.starts_with("f ")));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(scratch("terrain.obj.json")).unwrap()).unwrap();
    assert_eq!(side["eps"], 0.05);
    assert_eq!(side["vertical_errors"].as_array().unwrap().len(), 150);
    assert!(side["max_vertical_error"].as_f64().unwrap() <= 0.05 + 1e-9);
}

#[test]
fn xyz_input_needs_eps_and_k() {
    let xyz = scratch("plane.xyz");
    let mut text = String::from("# x y z\n");
    for i in 0..10 {
        for j in 0..10 {
            let (x, y) = (i as f64 / 9.0, j as f64 / 9.0);
            text.push_str(&format!("{x} {y} {}\n", 0.5 * x - 0.25 * y + 1.0));
        }
    }
    std::fs::write(&xyz, text).unwrap();
    assert_eq!(code(&run(&["run", "simplify-terrain", path(&xyz), "--k", "1"])), 3);
    let rep = report(&run(&["run", "simplify-terrain", path(&xyz), "--k", "1", "--eps", "0.01"]));
    assert!(all_verified(&rep));
    assert_eq!(rep["outcome"]["planted_pieces"], Value::Null);
    assert_eq!(code(&run(&["run", "solve-ulp", path(&xyz)])), 3);
}

#[test]
fn sweep_summarizes_and_writes_csv() {
    let csv = scratch("sweep.csv");
    let o = run(&["run", "solve-ulp", "--sweep", "n=32..128", "--seeds", "2", "--csv", path(&csv)]);
    let s = report(&o);
    let sizes = s["sizes"].as_array().unwrap();
    assert_eq!(sizes.iter().map(|r| r["n"].as_u64().unwrap()).collect::<Vec<_>>(), vec![32, 64, 128]);
    assert!(sizes.iter().all(|r| r["verified"] == 2));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.starts_with("command,n,k,seed,solver"));
}

#[test]
fn exit_codes() {
    let ulp = scratch("codes.json");
    assert_eq!(code(&run(&["gen", "ulp", "--n", "30", "--out", path(&ulp)])), 0);
    let ulp3 = scratch("codes3.json");
    assert_eq!(code(&run(&["gen", "ulp", "--n", "30", "--d", "3", "--out", path(&ulp3)])), 0);

    // Generation that cannot meet its parameters.
    assert_eq!(code(&run(&["gen", "kdisks", "--n", "100", "--k", "50", "--margin", "0.5"])), 2);
    // Usage, schema, contract and dimension errors.
    assert_eq!(code(&run(&["gen", "ulp"])), 3);
    assert_eq!(code(&run(&["run", "solve-ulp", "/nonexistent/file.json"])), 3);
    assert_eq!(code(&run(&["run", "learn-ball", path(&ulp)])), 3);
    assert_eq!(code(&run(&["run", "solve-ulp", path(&ulp), "--solver", "oneD"])), 3);
    assert_eq!(code(&run(&["run", "solve-ulp", path(&ulp), "--strategy", "line-triples"])), 3);
    assert_eq!(code(&run(&["run", "solve-ulp", "--sweep", "n=8..4"])), 3);
    let bad_tol = bin().args(["run", "solve-ulp", path(&ulp)]).env("ORACLE_GEOM_TOL", "side=-1").output().unwrap();
    assert_eq!(code(&bad_tol), 3);
    // Capacity.
    assert_eq!(code(&run(&["run", "solve-ulp", path(&ulp3), "--solver", "centerpoint", "--vertex-cap", "10"])), 4);
    // Help is not an error.
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn unseparable_colors_violate_the_single_ball_assumption() {
    // Diagonal pairs of a square: every disk holding one pair meets the other.
    let file = scratch("xor.json");
    let text = r#"{
      "kind": "kdisks", "seed": 0, "params": {"n": 4, "k": 1},
      "public": {"points": [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]},
      "hidden": {"colors": ["red", "red", "blue", "blue"], "regions": []}
    }"#;
    std::fs::write(&file, text).unwrap();
    let o = run(&["run", "learn-ball", path(&file)]);
    assert_eq!(code(&o), 2, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tampered_hidden_data_is_a_schema_error() {
    let file = scratch("tampered.json");
    let text = r#"{"kind": "ulp", "seed": 0, "params": {"n": 1},
      "public": {"dim": 2, "constraints": [{"normal": [1.0, 0.0], "offset": 0.0}]},
      "hidden": {"sides": "nope"}}"#;
    std::fs::write(&file, text).unwrap();
    assert_eq!(code(&run(&["run", "solve-ulp", path(&file)])), 3);
}
