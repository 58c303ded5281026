//! Command-line acceptance: byte-identical regeneration (criterion 12),
//! exit-code contract, and end-to-end flows over the file formats.
//!
//! Run with `cargo test -p pebbleforge-cli -- --nocapture`.

use pebbleforge::graph::Dag;
use pebbleforge::testkit;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pebbleforge"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn pebbleforge");
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    bin()
        .args(args)
        .output()
        .expect("spawn pebbleforge")
        .status
        .code()
        .expect("exit code")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_graph(dir: &Path, name: &str, g: &Dag) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, g.to_file_bytes()).unwrap();
    p
}

#[test]
fn c12_generation_is_byte_identical() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p3 = write_graph(d, "p3.json", &testkit::path(3));
    let diamond = write_graph(d, "diamond.json", &testkit::diamond());

    let recipes: Vec<Vec<String>> = vec![
        vec!["gen", "local-expander", "--n", "64", "--delta", "0.4", "--seed", "7"],
        vec!["gen", "local-expander", "--n", "96", "--delta", "0.8", "--seed", "3"],
        vec!["gen", "extreme-dr", "--n", "40", "--epsilon", "0.5", "--seed", "1"],
        vec!["gen", "extreme-dr", "--n", "20", "--epsilon", "0.8", "--seed", "9"],
        vec!["gen", "superconcentrator", "--m", "6", "--seed", "3"],
        vec!["gen", "superconcentrator", "--m", "9", "--seed", "4"],
        vec!["gen", "reduce-dr", path_str(&p3)],
        vec!["gen", "reduce-ss", path_str(&diamond)],
        vec!["gen", "main", "--n", "8", "--epsilon", "0.5", "--base", "certified-small", "--seed", "1"],
        vec![
            "gen", "main", "--n", "30", "--epsilon", "0.5", "--base", "superconcentrator-stack",
            "--seed", "2",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();

    for (i, recipe) in recipes.iter().enumerate() {
        let out_a = d.join(format!("g{i}_a.json"));
        let out_b = d.join(format!("g{i}_b.json"));
        for out in [&out_a, &out_b] {
            let mut args: Vec<String> = recipe.clone();
            args.push("--out".into());
            args.push(path_str(out).into());
            let argv: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
            run_ok(&argv);
        }
        let a = std::fs::read(&out_a).unwrap();
        let b = std::fs::read(&out_b).unwrap();
        assert_eq!(a, b, "recipe {i} not byte-identical: {recipe:?}");
        // The output is a loadable graph and the manifest is present.
        Dag::from_file_bytes(&a).unwrap();
        assert!(d.join(format!("g{i}_a.json.manifest.json")).exists());
    }
    println!("criterion 12 byte-identical regeneration: PASS ({:.2} s)", start.elapsed().as_secs_f64());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let k8 = write_graph(d, "k8.json", &testkit::complete(8));
    let p5 = write_graph(d, "p5.json", &testkit::path(5));

    // 0: property holds.
    assert_eq!(
        exit_code(&["verify", "depth-robust", path_str(&k8), "--e", "2", "--d", "6"]),
        0
    );
    // 1: property fails, with a machine-readable witness.
    let out = bin()
        .args(["verify", "depth-robust", path_str(&p5), "--e", "1", "--d", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["holds"], serde_json::json!(false));
    assert_eq!(v["detail"]["witness"], serde_json::json!([3]));

    // Witness round-trip: the reported counterexample re-checks.
    let witness = v["detail"]["witness"][0].to_string();
    assert_eq!(
        exit_code(&[
            "verify", "depth-robust", path_str(&p5), "--e", "1", "--d", "3", "--witness",
            &witness
        ]),
        0
    );
    // A set that does not break the bound is rejected.
    assert_eq!(
        exit_code(&[
            "verify", "depth-robust", path_str(&p5), "--e", "1", "--d", "3", "--witness", "1"
        ]),
        1
    );

    // 2: usage errors.
    assert_eq!(exit_code(&["gen", "local-expander", "--n", "4"]), 2);
    assert_eq!(exit_code(&["verify", "pebbling", "missing.json", "also-missing.json"]), 2);
    assert_eq!(
        exit_code(&["gen", "local-expander", "--n", "4", "--delta", "1.5", "--out", "x.json"]),
        2
    );
    assert_eq!(
        exit_code(&["verify", "good-nodes", path_str(&p5), "--gamma", "0"]),
        2
    );

    // 3: cap exceeded (exact search far beyond the subset budget).
    let big = write_graph(d, "p40.json", &testkit::path(40));
    assert_eq!(
        exit_code(&["verify", "depth-robust", path_str(&big), "--e", "12", "--d", "3"]),
        3
    );
    let out_peb = d.join("too-big.peb.json");
    let p20 = write_graph(d, "p20.json", &testkit::path(20));
    assert_eq!(
        exit_code(&[
            "pebble", "oracle", path_str(&p20), "--objective", "cc", "--mode", "seq", "--out",
            path_str(&out_peb)
        ]),
        3
    );
}

#[test]
fn pebble_flows_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p3 = write_graph(d, "p3.json", &testkit::path(3));
    let p4 = write_graph(d, "p4.json", &testkit::path(4));
    let k4 = write_graph(d, "k4.json", &testkit::complete(4));

    // Naive pebbling of P_3: cc 6; verifies.
    let peb = d.join("naive.peb.json");
    let csv = d.join("naive.csv");
    let out = run_ok(&[
        "pebble", "naive", path_str(&p3), "--out", path_str(&peb),
        "--metrics", path_str(&csv), "--block-size", "1",
    ]);
    assert_eq!(stdout_json(&out)["cc"], serde_json::json!(6));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("step,pebbles,blocks_at_s"));
    run_ok(&["verify", "pebbling", path_str(&p3), path_str(&peb)]);

    // A tampered pebbling fails verification with exit 1.
    let tampered = d.join("tampered.peb.json");
    let body = std::fs::read_to_string(&peb).unwrap();
    std::fs::write(&tampered, body.replace("[[],[1],[1,2],[1,2,3]]", "[[],[2],[1,2],[1,2,3]]"))
        .unwrap();
    let out = bin()
        .args(["verify", "pebbling", path_str(&p3), path_str(&tampered)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["detail"]["rule"], serde_json::json!("parents-missing"));

    // Oracle: parallel min cumulative cost of K_4 is 10; witness verifies.
    let witness = d.join("k4cc.peb.json");
    let out = run_ok(&[
        "pebble", "oracle", path_str(&k4), "--objective", "cc", "--mode", "par", "--out",
        path_str(&witness),
    ]);
    assert_eq!(stdout_json(&out)["value"], serde_json::json!(10));
    run_ok(&["verify", "pebbling", path_str(&k4), path_str(&witness)]);

    // Reducible black/white schedule on P_4 with S = {2}, d = 2.
    let bw = d.join("bw.peb.json");
    let out = run_ok(&[
        "pebble", "reducible-bw", path_str(&p4), "--d", "2", "--set", "2", "--out",
        path_str(&bw),
    ]);
    let v = stdout_json(&out);
    assert!(v["bw_cc"].as_u64().unwrap() <= 9);
    run_ok(&["verify", "bw-pebbling", path_str(&p4), path_str(&bw)]);
}

#[test]
fn verify_flows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // Local expander verification: generated graph holds, a chain does not.
    let le = d.join("le.json");
    run_ok(&[
        "gen", "local-expander", "--n", "48", "--delta", "0.4", "--seed", "7", "--out",
        path_str(&le),
    ]);
    run_ok(&["verify", "local-expander", path_str(&le), "--delta", "0.4", "--r-max", "8"]);
    run_ok(&[
        "verify", "local-expander", path_str(&le), "--delta", "0.4", "--r-max", "8", "--jobs",
        "4",
    ]);
    let p8 = write_graph(d, "p8.json", &testkit::path(8));
    let out = bin()
        .args(["verify", "local-expander", path_str(&p8), "--delta", "0.25", "--r-max", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert!(v["detail"]["r"].as_u64().unwrap() >= 2);

    // Superconcentrator certificate on a generated instance.
    let sc = d.join("sc.json");
    run_ok(&["gen", "superconcentrator", "--m", "8", "--seed", "3", "--out", path_str(&sc)]);
    run_ok(&["verify", "superconcentrator", path_str(&sc), "--k", "3", "--samples", "10"]);

    // Good-node report with connectivity check on a complete DAG.
    let k12 = write_graph(d, "k12.json", &testkit::complete(12));
    let out = run_ok(&[
        "verify", "good-nodes", path_str(&k12), "--removed", "3,4", "--gamma", "0.25",
        "--delta", "0.1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["holds"], serde_json::json!(true));
    assert!(v["detail"]["count"].as_u64().unwrap() >= 8);
}

#[test]
fn reduction_and_main_flows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p3 = write_graph(d, "p3.json", &testkit::path(3));

    // Chain reduction gives the 6-node chain plus a map file.
    let out_g = d.join("p3dr.json");
    let out = run_ok(&["gen", "reduce-dr", path_str(&p3), "--out", path_str(&out_g)]);
    assert_eq!(stdout_json(&out)["n"], serde_json::json!(6));
    let map: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("p3dr.json.map.json")).unwrap()).unwrap();
    assert_eq!(map["kind"], serde_json::json!("dr"));

    // Composed graph: structural sanity through the CLI surface.
    let main_g = d.join("main.json");
    let out = run_ok(&[
        "gen", "main", "--n", "10", "--epsilon", "0.5", "--base", "certified-small", "--seed",
        "1", "--out", path_str(&main_g),
    ]);
    let v = stdout_json(&out);
    assert!(v["indeg"].as_u64().unwrap() <= 2);
    assert!(d.join("main.json.overlay.json").exists());

    // External base via file.
    let base = write_graph(
        d,
        "base.json",
        &Dag::from_edges(5, &[(1, 3), (2, 3), (3, 4), (4, 5)]).unwrap(),
    );
    let ext = d.join("ext.json");
    run_ok(&[
        "gen", "main", "--n", "5", "--epsilon", "0.5", "--base", "external", "--base-file",
        path_str(&base), "--seed", "4", "--out", path_str(&ext),
    ]);

    // DOT export.
    let out = run_ok(&["dot", path_str(&p3)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 -> 2"));
}

#[test]
fn mhf_flow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let chain = write_graph(d, "p16.json", &testkit::path(16));

    let trace = d.join("trace.csv");
    let args = [
        "mhf", "evaluate", path_str(&chain), "--input", "deadbeef", "--w", "64", "--backend",
        "stub", "--stub-seed", "5", "--block-size", "128", "--trace", path_str(&trace),
    ];
    let out = run_ok(&args);
    let v = stdout_json(&out);
    assert_eq!(v["oracle_calls"], serde_json::json!(16));
    // Threshold count at 2 labels: 16 - 2 + 1; block sum: sum floor(i/2).
    assert_eq!(v["smc_threshold_count"], serde_json::json!(15));
    let expect: u64 = (1..=16u64).map(|i| i / 2).sum();
    assert_eq!(v["smc_block_sum"], serde_json::json!(expect));
    assert_eq!(v["labels"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().count(), 17);

    // Same seed twice: identical labels; different seed: different labels.
    let again = run_ok(&args);
    assert_eq!(stdout_json(&again)["labels"], v["labels"]);
    let mut other_args: Vec<&str> = args.to_vec();
    other_args[10] = "6";
    let other = run_ok(&other_args);
    assert_ne!(stdout_json(&other)["labels"], v["labels"]);

    // Arity mismatch is a usage error.
    assert_eq!(
        exit_code(&["mhf", "evaluate", path_str(&chain), "--input", "aa,bb", "--w", "64"]),
        2
    );
}
