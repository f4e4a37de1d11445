//! End-to-end tests of the forge binary: exit codes, error envelopes,
//! file outputs, manifests, environment overrides, and batching.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn forge() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forge"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    forge().args(args).current_dir(dir).output().expect("binary runs")
}

fn write_spec(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("spec.json");
    fs::write(
        &path,
        r#"{
            "seed": 7,
            "num_levels": {"kind": "constant", "value": 4},
            "nodes_per_level": {"kind": "uniform_int", "lo": 2, "hi": 4},
            "in_degree": {"kind": "uniform_int", "lo": 1, "hi": 2},
            "out_degree": {"kind": "uniform_int", "lo": 1, "hi": 2},
            "algo_mix": {"matmul": 1.0, "matadd": 1.0, "gp_op": 2.0},
            "size": {"kind": "uniform_int", "lo": 2, "hi": 6},
            "bytes": {"kind": "uniform_int", "lo": 32, "hi": 256}
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn missing_input_gives_error_envelope_and_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["clone", "missing.json", "--out", "x.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let envelope: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(envelope["error"], "FileNotFound");
    assert!(envelope["message"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn unknown_subcommand_and_bad_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["generate", "--no-such-flag"], tmp.path()).status.code(), Some(2));
    // Help and version succeed.
    assert_eq!(run(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(run(&["--version"], tmp.path()).status.code(), Some(0));
}

#[test]
fn generate_emits_graph_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    let out = run(
        &["generate", "--spec", "spec.json", "--seed", "3", "--out", "g.json"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let graph = fs::read_to_string(tmp.path().join("g.json")).unwrap();
    assert!(graph.contains("\"vertices\""));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("g.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["tool"], "forge");
    assert_eq!(manifest["seed"], 3);
    assert!(manifest["inputs"].get("spec.json").is_some());
    assert!(manifest["outputs"].get("g.json").is_some());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    let args = ["generate", "--spec", "spec.json", "--seed", "9", "--out", "g.json"];
    assert!(run(&args, tmp.path()).status.success());
    let first = fs::read(tmp.path().join("g.json")).unwrap();
    let first_manifest = fs::read(tmp.path().join("g.json.manifest.json")).unwrap();
    assert!(run(&args, tmp.path()).status.success());
    assert_eq!(first, fs::read(tmp.path().join("g.json")).unwrap());
    assert_eq!(first_manifest, fs::read(tmp.path().join("g.json.manifest.json")).unwrap());
}

#[test]
fn seed_batches_write_one_file_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    let out = run(
        &["generate", "--spec", "spec.json", "--seeds", "1..3", "--out", "g.json"],
        tmp.path(),
    );
    assert!(out.status.success());
    for seed in 1..=3 {
        assert!(tmp.path().join(format!("g.s{seed}.json")).exists(), "seed {seed}");
        assert!(tmp.path().join(format!("g.s{seed}.json.manifest.json")).exists());
    }
    // Seeds differ, so graphs differ.
    let g1 = fs::read(tmp.path().join("g.s1.json")).unwrap();
    let g2 = fs::read(tmp.path().join("g.s2.json")).unwrap();
    assert_ne!(g1, g2);
}

#[test]
fn profile_exports_csv_tables() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    assert!(run(
        &["generate", "--spec", "spec.json", "--seed", "2", "--out", "g.json"],
        tmp.path()
    )
    .status
    .success());
    let out = run(
        &[
            "profile",
            "g.json",
            "--out",
            "p.json",
            "--table-csv",
            "table.csv",
            "--matrix-csv",
            "matrix.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let table = fs::read_to_string(tmp.path().join("table.csv")).unwrap();
    assert!(table.starts_with("level,complexity,alfus"));
    assert_eq!(table.lines().count(), 5, "header plus one row per level");
    let matrix = fs::read_to_string(tmp.path().join("matrix.csv")).unwrap();
    assert!(matrix.starts_with("from,to_1,to_2,to_3,to_4"));
    // CSV exports are hashed into the manifest.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p.json.manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["outputs"].get("table.csv").is_some());
    assert!(manifest["outputs"].get("matrix.csv").is_some());
}

#[test]
fn scan_extract_clone_chain_works() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("prog.wppl"),
        "input a[bytes=128]\ninput b[bytes=128]\nx = matmul(a, b)\ny = matadd(x, a)\nz = sort(y)\n",
    )
    .unwrap();
    assert!(run(&["scan", "prog.wppl", "--out", "g.json"], tmp.path()).status.success());
    assert!(run(&["extract", "g.json", "--out", "p.json"], tmp.path()).status.success());
    let profile = fs::read_to_string(tmp.path().join("p.json")).unwrap();
    assert!(profile.contains("unit_stats"));
    assert!(run(
        &["clone", "p.json", "--seed", "4", "--tol", "0.05", "--out", "c.json"],
        tmp.path()
    )
    .status
    .success());
    assert!(run(&["extract", "c.json", "--out", "cp.json"], tmp.path()).status.success());
    let a: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p.json")).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("cp.json")).unwrap()).unwrap();
    assert_eq!(a["communication_matrix"], b["communication_matrix"]);
}

#[test]
fn codesign_emits_plan_and_matrix_csv() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    assert!(run(
        &["generate", "--spec", "spec.json", "--seed", "5", "--out", "g.json"],
        tmp.path()
    )
    .status
    .success());
    let out = run(
        &[
            "codesign", "g.json", "--kmax", "6", "--switch-bytes", "50", "--density", "1.5",
            "--seed", "1", "--out", "plan.json", "--matrix-csv", "icm.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("plan.json")).unwrap()).unwrap();
    assert!(plan["core_types"]["wcss_curve"].is_array());
    assert!(plan["mesh"]["partitions"].is_array());
    let csv = fs::read_to_string(tmp.path().join("icm.csv")).unwrap();
    assert!(csv.starts_with("core,c0"));
    assert!(csv.trim_end().ends_with(['0', '1', '2', '3', '4', '5', '6', '7', '8', '9']));
    // Explicit k override.
    let out = run(
        &["codesign", "g.json", "--k", "2", "--seed", "1", "--out", "plan2.json"],
        tmp.path(),
    );
    assert!(out.status.success());
    let plan2: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("plan2.json")).unwrap()).unwrap();
    assert_eq!(plan2["core_types"]["k"], 2);
}

#[test]
fn trace_and_report_cover_all_sections() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    assert!(run(
        &["generate", "--spec", "spec.json", "--seed", "8", "--out", "g.json"],
        tmp.path()
    )
    .status
    .success());
    assert!(run(
        &["codesign", "g.json", "--kmax", "4", "--seed", "2", "--out", "plan.json"],
        tmp.path()
    )
    .status
    .success());
    let out = run(
        &["trace", "loop", "--size", "64", "--seed", "3", "--out", "t.json", "--histogram", "h.json"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let hist: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("h.json")).unwrap()).unwrap();
    assert!(hist.get("finite").is_some());

    let out = run(
        &[
            "report", "--graph", "g.json", "--plan", "plan.json", "--trace", "t.json",
            "--block-words", "8", "--out", "rep.json", "--csv-dir", "csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("rep.json")).unwrap()).unwrap();
    for section in ["levels", "intensity", "wcss", "reuse"] {
        assert!(rep.get(section).is_some(), "missing section {section}");
    }
    for file in ["levels.csv", "intensity.csv", "wcss.csv", "reuse.csv"] {
        assert!(tmp.path().join("csv").join(file).exists(), "missing {file}");
    }
    // Report without any input is a usage error.
    assert_eq!(run(&["report", "--out", "rep2.json"], tmp.path()).status.code(), Some(2));
}

#[test]
fn pipeline_emits_all_stages() {
    let tmp = tempfile::tempdir().unwrap();
    write_spec(tmp.path());
    let out = run(
        &["pipeline", "--spec", "spec.json", "--seed", "3", "--out-dir", "run"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["graph.json", "profile.json", "clone.json", "plan.json", "manifest.json"] {
        assert!(tmp.path().join("run").join(file).exists(), "missing {file}");
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("run/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 4);
}

#[test]
fn env_var_overrides_the_bank() {
    let tmp = tempfile::tempdir().unwrap();
    // A bank whose only units are scalars under different names.
    fs::write(
        tmp.path().join("bank.json"),
        r#"{
            "alpha": {"class": "general-purpose", "cost_kind": "scalar"},
            "omega": {"class": "general-purpose", "cost_kind": "scalar"}
        }"#,
    )
    .unwrap();
    fs::write(
        tmp.path().join("spec.json"),
        r#"{
            "seed": 1,
            "num_levels": {"kind": "constant", "value": 2},
            "nodes_per_level": {"kind": "constant", "value": 2},
            "in_degree": {"kind": "constant", "value": 1},
            "out_degree": {"kind": "constant", "value": 1},
            "algo_mix": {"alpha": 1.0, "omega": 1.0},
            "size": {"kind": "constant", "value": 1},
            "bytes": {"kind": "constant", "value": 8}
        }"#,
    )
    .unwrap();
    // Without the override the units are unknown.
    let out = run(
        &["generate", "--spec", "spec.json", "--seed", "1", "--out", "g.json"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("UnknownAlgorithm"), "{stderr}");
    // With it, generation succeeds and the manifest records the bank.
    let out = forge()
        .args(["generate", "--spec", "spec.json", "--seed", "1", "--out", "g.json"])
        .env("FORGE_ALGOBANK", tmp.path().join("bank.json"))
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let graph = fs::read_to_string(tmp.path().join("g.json")).unwrap();
    assert!(graph.contains("alpha") || graph.contains("omega"));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("g.json.manifest.json")).unwrap(),
    )
    .unwrap();
    let inputs = manifest["inputs"].as_object().unwrap();
    assert!(inputs.keys().any(|k| k.ends_with("bank.json")));
}

#[test]
fn report_on_edgeless_graph_is_all_zero_communication() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("g.json"),
        r#"{
            "num_levels": 1,
            "vertices": [{"id": "a", "level": 1, "algo": "gp_op", "size": 1}],
            "edges": [],
            "control": []
        }"#,
    )
    .unwrap();
    assert!(run(&["report", "--graph", "g.json", "--out", "rep.json"], tmp.path())
        .status
        .success());
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["levels"][0]["comm_out"], 0.0);
    assert_eq!(rep["intensity"]["low"], 0);
}
