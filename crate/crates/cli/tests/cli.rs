//! Drives the `qshrink` binary end to end through temporary files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = "3 3\n1 2\n2 3\n1 3\n";
const KNAPSACK: &str = "3 1 0\n3 4 5\n2 3 4\n6\n";

fn qshrink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshrink"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qshrink(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

#[test]
fn qubo_graph_shrink_solve_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tri.txt"), TRIANGLE).unwrap();
    ok(d, &["build-qubo", "--kind", "mis", "tri.txt", "--out", "q.json"]);
    let q = json(&std::fs::read_to_string(d.join("q.json")).unwrap());
    assert_eq!(q["n_vars"], 3);

    let g = json(&ok(d, &["to-maxcut", "q.json"]));
    assert_eq!(g["n_nodes"], 4);
    assert_eq!(g["var_map"][0], Value::Null);

    ok(d, &["shrink", "q.json", "--k", "3", "--problem", "tri.txt", "--kind", "mis", "--steps", "steps.jsonl", "--out", "s.json"]);
    let steps = std::fs::read_to_string(d.join("steps.jsonl")).unwrap();
    assert_eq!(steps.lines().count(), 1);
    let step = json(steps.lines().next().unwrap());
    for key in ["order", "i", "j", "sigma"] {
        assert!(step.get(key).is_some(), "step log lacks {key}");
    }

    ok(d, &["solve", "s.json", "--original", "q.json", "--out", "sol.json"]);
    let sol = json(&std::fs::read_to_string(d.join("sol.json")).unwrap());
    let picked: u64 = sol["bits"].as_array().unwrap().iter().map(|b| b.as_u64().unwrap()).sum();
    assert_eq!(picked, 1);
    let verdict = json(&ok(d, &["verify", "--kind", "mis", "tri.txt", "sol.json"]));
    assert_eq!(verdict["feasible"], true);
}

#[test]
fn exact_and_annealing_agree_on_small_qubo() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("k.txt"), KNAPSACK).unwrap();
    ok(d, &["build-qubo", "--kind", "mdkp", "k.txt", "--slack", "--out", "q.json"]);
    let exact = json(&ok(d, &["solve", "q.json", "--backend", "exact"]));
    let sa = json(&ok(d, &["--seed", "4", "solve", "q.json", "--backend", "sa", "--sweeps", "2000"]));
    assert_eq!(exact["energy"], sa["energy"]);
    assert_eq!(exact["bits"], serde_json::json!([1, 0, 1]));
}

#[test]
fn verify_and_repair_signal_feasibility_through_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tri.txt"), TRIANGLE).unwrap();
    std::fs::write(d.join("bad.json"), r#"{"instance":"tri","bits":[1,1,1]}"#).unwrap();
    let out = qshrink(d, &["verify", "--kind", "mis", "tri.txt", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));

    ok(d, &["repair", "--kind", "mis", "tri.txt", "bad.json", "--out", "fixed.json"]);
    let fixed = json(&std::fs::read_to_string(d.join("fixed.json")).unwrap());
    assert_eq!(fixed["repair"]["final_feasible"], true);
    assert_eq!(fixed["bits"], serde_json::json!([1, 0, 0]));
    ok(d, &["verify", "--kind", "mis", "tri.txt", "fixed.json"]);
}

#[test]
fn pipeline_report_reaches_the_known_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let report = json(&ok(
        dir.path(),
        &["pipeline", "--kind", "mis", fixture("1tc.8.txt").to_str().unwrap(), "--strategy", "half", "--optimum", "4"],
    ));
    assert_eq!(report["instance"], "1tc.8");
    assert_eq!(report["final_size"], 4);
    assert_eq!(report["final_objective"], 4.0);
    assert_eq!(report["rsq"], 100.0);
    assert_eq!(report["feasible_after"], true);
}

#[test]
fn config_file_values_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tri.txt"), TRIANGLE).unwrap();
    std::fs::write(
        d.join("cfg.toml"),
        "seed = 5\nlocal_search = false\n[solver]\nbackend = \"sa\"\n[shrink]\nlambda = 0.0\n",
    )
    .unwrap();
    let report = json(&ok(d, &["--config", "cfg.toml", "pipeline", "--kind", "mis", "tri.txt", "--k", "2"]));
    assert_eq!(report["seed"], 5);
    assert_eq!(report["constraint_aware"], false);
    assert_eq!(report["config"]["solver"]["backend"], "sa");
    assert_eq!(report["final_objective"], 1.0);
}

#[test]
fn bench_csv_is_byte_identical_across_reruns_and_thread_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = d.join("inst");
    std::fs::create_dir(&inst).unwrap();
    for name in ["1tc.8.txt", "1tc.16.txt", "metadata.txt"] {
        std::fs::copy(fixture(name), inst.join(name)).unwrap();
    }
    let args = ["bench", "--kind", "mis", "inst", "--no-timings", "--lambdas", "0,1.5", "--seed", "3"];
    let first = ok(d, &args);
    let second = ok(d, &args);
    let mut sequential = args.to_vec();
    sequential.push("--sequential");
    let third = ok(d, &sequential);
    assert_eq!(first, second);
    assert_eq!(first, third);

    let lines: Vec<&str> = first.lines().collect();
    assert!(lines[0].starts_with("Instance,Kind,Strategy,ConstraintAware,InitialSize,FinalSize"));
    assert_eq!(lines.len(), 1 + 2 * 3 * 2);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
}

#[test]
fn malformed_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("junk.json"), "{\"hello\": 1}").unwrap();
    let out = qshrink(d, &["solve", "junk.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}
