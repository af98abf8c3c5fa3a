use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn moran(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moran"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("MORAN_THREADS")
        .output()
        .expect("moran runs")
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&value).expect("schema compiles")
}

/// Parses stdout, checks it against the schema and returns it.
fn json(out: &Output, schema_name: &str) -> Value {
    let value: Value =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    let compiled = schema(schema_name);
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{schema_name} schema violations: {msgs:?}\n{value}");
    }
    value
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exact_galanis_level_one_is_one_third() {
    let out = moran(&["exact", "--model", "@galanis", "--r", "1", "--init", "level:1:uniform"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "exact");
    assert!((v["rho_alpha"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["rho"].as_array().unwrap().len(), 8);
    assert!(v["deviation"]["1"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["manifest"]["command"], "exact");
    assert_eq!(v["manifest"]["timestamp"], "2023-11-14T22:13:20Z");
}

#[test]
fn exact_complete_graph_is_classic_moran() {
    let out = moran(&["exact", "--model", "@complete:5", "--r", "2", "--init", "mask:1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "exact");
    assert!((v["rho_alpha"].as_f64().unwrap() - 16.0 / 31.0).abs() < 1e-12);
    assert!((v["moran"]["1"].as_f64().unwrap() - 16.0 / 31.0).abs() < 1e-15);
}

#[test]
fn exact_reads_model_files_and_solver_choice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(
        &path,
        r#"{"n": 3, "W": [[0, "1/4", "3/4"], ["1/4", 0, "3/4"], ["1/2", "1/2", 0]], "mu": "stationary", "r": 2}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let dense = json(&moran(&["exact", "--model", p, "--solver", "dense"]), "exact");
    let iterative = json(&moran(&["exact", "--model", p, "--solver", "iterative"]), "exact");
    assert_eq!(iterative["solver"]["method"], "iterative");
    assert!(dense.get("rho_alpha").is_none());
    for (d, i) in dense["rho"]
        .as_array()
        .unwrap()
        .iter()
        .zip(iterative["rho"].as_array().unwrap())
    {
        assert!((d["value"].as_f64().unwrap() - i["value"].as_f64().unwrap()).abs() < 1e-9);
    }
    let atoms = json(
        &moran(&["exact", "--model", p, "--init", "atoms:[(1,1/2),(2,1/2)]"]),
        "exact",
    );
    let single = dense["rho"][1]["value"].as_f64().unwrap();
    assert!((atoms["rho_alpha"].as_f64().unwrap() - single).abs() < 1e-12);
}

#[test]
fn malformed_row_exits_two_with_error_object() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"n": 2, "W": [[0.5, 0.7], [1, 0]], "r": 1}"#).unwrap();
    let out = moran(&["exact", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let v = json(&out, "error");
    assert_eq!(v["error"]["kind"], "NotStochastic");
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["exact", "--model", "/nonexistent/model.json"],
        vec!["exact", "--model", "@galanis", "--init", "mask:7"],
        vec!["exact", "--model", "@nope"],
        vec!["simulate", "--model", "@galanis", "--init", "mask:1", "--trials", "0"],
        vec!["sweep", "--c", "1", "--r", "4", "--grid", "1"],
        vec!["frobnicate"],
        vec!["verify", "--r", "2"],
    ] {
        let out = moran(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        json(&out, "error");
    }
}

#[test]
fn sweep_isoline_at_stationary_policy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = moran(&[
        "sweep",
        "--c",
        "1",
        "--r",
        "4",
        "--grid",
        "201",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "sweep");
    assert_eq!(v["rows"], 201 * 201);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,m,F"));
    let mut hits = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        if f[1] == 0.5 {
            assert!((f[2] - 1.0).abs() <= 1e-12);
            hits += 1;
        }
    }
    assert_eq!(hits, 201);
}

#[test]
fn sweep_is_byte_stable_and_mirrored() {
    let a = moran(&["sweep", "--c", "2", "--r", "4", "--grid", "11"]);
    let b = moran(&["sweep", "--c", "2", "--r", "4", "--grid", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    // relabelling the vertices maps (a, m | c) to (1 - a, 1 - m | 1/c)
    let mirror = moran(&["sweep", "--c", "0.5", "--r", "4", "--grid", "11"]);
    let parse = |o: &Output| -> Vec<Vec<f64>> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect()
    };
    let (p, q) = (parse(&a), parse(&mirror));
    for i in 0..11 {
        for j in 0..11 {
            let f = p[i * 11 + j][2];
            let g = q[(10 - i) * 11 + (10 - j)][2];
            assert!((f - g).abs() <= 1e-12);
        }
    }
}

#[test]
fn simulate_is_reproducible_across_threads() {
    let args = [
        "simulate",
        "--model",
        "@galanis",
        "--r",
        "1",
        "--init",
        "level:1:uniform",
        "--trials",
        "20000",
        "--seed",
        "3",
    ];
    let first = moran(&args);
    assert_eq!(code(&first), 0);
    let v = json(&first, "simulate");
    let f = v["frequency"].as_f64().unwrap();
    assert!((f - 1.0 / 3.0).abs() <= 3.0 * (2.0f64 / 9.0 / 20000.0).sqrt());
    for threads in ["1", "4", "8"] {
        let out = Command::new(env!("CARGO_BIN_EXE_moran"))
            .args(args)
            .env("SOURCE_DATE_EPOCH", "1700000000")
            .env("MORAN_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.stdout, first.stdout, "threads = {threads}");
    }
}

#[test]
fn faithful_mode_with_heavy_loops_terminates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loops.json");
    fs::write(
        &path,
        r#"{"n": 3, "W": [[0.98, 0.01, 0.01], [0.01, 0.98, 0.01], [0.01, 0.01, 0.98]], "r": 1}"#,
    )
    .unwrap();
    let out = moran(&[
        "simulate",
        "--model",
        path.to_str().unwrap(),
        "--init",
        "mask:1",
        "--trials",
        "200",
        "--mode",
        "faithful",
        "--max-steps",
        "2000",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "simulate");
    assert_eq!(v["mode"], "faithful");
    let total = v["fixations"].as_u64().unwrap() + v["extinctions"].as_u64().unwrap() + v["censored"].as_u64().unwrap();
    assert_eq!(total, 200);
}

#[test]
fn verify_builtin_suite_passes() {
    let out = moran(&["verify", "--json-indent", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out, "verify");
    assert_eq!(v["all_pass"], true);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\n    \"manifest\""));
}

#[test]
fn verify_user_model_is_descriptive() {
    let out = moran(&["verify", "--model", "@galanis", "--mu", "uniform"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "verify");
    assert_eq!(v["suite"], "model");
    assert_eq!(v["checks"]["macro_markov"]["pass"], false);
    assert!(v["checks"]["ratio_constancy"]["max_deviation"].as_f64().unwrap() > 0.0);

    let out = moran(&["verify", "--model", "@complete:4", "--r", "1"]);
    assert_eq!(json(&out, "verify")["checks"]["macro_markov"]["pass"], true);
}

#[test]
fn verify_dumps_sorted_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kernel.csv");
    let out = moran(&[
        "verify",
        "--model",
        "@n2:1/2,1",
        "--r",
        "2",
        "--dump-kernel",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("from_mask,to_mask,prob"));
    let rows: Vec<(u64, u64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
    assert_eq!(rows[0], (0, 0, 1.0));
    assert_eq!(*rows.last().unwrap(), (3, 3, 1.0));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&moran(&["--help"])), 0);
    assert_eq!(code(&moran(&["--version"])), 0);
}
