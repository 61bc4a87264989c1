//! End-to-end checks of the binary: exit codes, JSON shape, piping.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use ngacsafe::dacc::{ConstraintGraph, Dag, DaccInstance};
use ngacsafe::doc::{parse_policy, serialize_dacc, serialize_graph, serialize_policy};
use ngacsafe::reductions::{reduce_dacc_to_cosp, SimpleGraph};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ngacsafe"))
}

fn tmp(name: &str, contents: &str) -> String {
    let path = format!("{}/{name}", env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(&path, contents).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn single_edge_instance() -> DaccInstance<String, (String, String)> {
    let dag = Dag::new(
        ["s".to_string(), "t".to_string()],
        [(
            ("s".to_string(), "t".to_string()),
            ("s".to_string(), "t".to_string()),
        )],
    )
    .unwrap();
    let constraints = ConstraintGraph::new(dag.edge_ids());
    DaccInstance::new(dag, constraints, "s".to_string(), "t".to_string()).unwrap()
}

#[test]
fn validate_accepts_well_formed_model() {
    let model = reduce_dacc_to_cosp(&single_edge_instance());
    let path = tmp("cli-valid.json", &serialize_policy(&model));
    let out = bin().args(["validate", &path]).output().unwrap();
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "valid");
    assert_eq!(v["diagnostics"], Value::Array(vec![]));
}

#[test]
fn validate_rejects_garbage_with_exit_2() {
    let path = tmp("cli-garbage.json", "{ not json");
    let out = bin().args(["validate", &path]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn check_safety_reports_unsafe_with_witness() {
    let model = reduce_dacc_to_cosp(&single_edge_instance());
    let path = tmp("cli-unsafe.json", &serialize_policy(&model));
    let out = bin()
        .args(["check-safety", "--witness", &path])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "unsafe");
    assert_eq!(v["witness"]["user"], "u");
    assert_eq!(v["witness"]["resource"], "rs");
    assert!(!v["witness"]["sequence"].as_array().unwrap().is_empty());
    assert!(v["stats"]["tuplesChecked"].as_u64().unwrap() >= 1);
    assert!(v["stats"].get("elapsedMs").is_none());
}

#[test]
fn check_safety_timing_flag_adds_elapsed() {
    let model = reduce_dacc_to_cosp(&single_edge_instance());
    let path = tmp("cli-timing.json", &serialize_policy(&model));
    let out = bin()
        .args(["check-safety", "--timing", &path])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(json(&out)["stats"]["elapsedMs"].is_u64());
}

#[test]
fn check_safety_jobs_matches_sequential_verdict() {
    let model = reduce_dacc_to_cosp(&single_edge_instance());
    let path = tmp("cli-jobs.json", &serialize_policy(&model));
    let seq = bin().args(["check-safety", &path]).output().unwrap();
    let par = bin()
        .args(["check-safety", "--jobs", "4", &path])
        .output()
        .unwrap();
    assert_eq!(json(&seq)["verdict"], json(&par)["verdict"]);
}

#[test]
fn reduce_3col_of_k4_is_unreachable() {
    let graph_path = tmp("cli-k4.json", &serialize_graph(&SimpleGraph::complete(4)));
    let reduce = bin()
        .args(["reduce-3col", &graph_path])
        .output()
        .unwrap();
    assert!(reduce.status.success());
    let inst_path = tmp("cli-k4-inst.json", std::str::from_utf8(&reduce.stdout).unwrap());
    let out = bin().args(["solve-dacc", &inst_path]).output().unwrap();
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "unreachable");
    assert!(v.get("witnessPath").is_none());
}

#[test]
fn reduce_dacc_output_reparses_to_equal_model() {
    let inst = single_edge_instance();
    let inst_path = tmp("cli-inst.json", &serialize_dacc(&inst));
    let out = bin().args(["reduce-dacc", &inst_path]).output().unwrap();
    assert!(out.status.success());
    let printed = std::str::from_utf8(&out.stdout).unwrap();
    let reparsed = parse_policy(printed).unwrap();
    assert_eq!(reparsed, reduce_dacc_to_cosp(&inst));
}

#[test]
fn gen_triangles_pipes_into_bench_mis() {
    let gen = bin().args(["gen", "triangles", "3"]).output().unwrap();
    assert!(gen.status.success());

    let mut bench = bin()
        .args(["bench", "mis"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    bench
        .stdin
        .take()
        .unwrap()
        .write_all(&gen.stdout)
        .unwrap();
    let out = bench.wait_with_output().unwrap();
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["misEnumerated"], 27);
    assert_eq!(v["bruteForceSets"], 27);
    assert_eq!(v["naiveSubsets"], 512);
}

#[test]
fn bench_mis_with_k_argument() {
    let out = bin().args(["bench", "mis", "4"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["misEnumerated"], 81);
}

#[test]
fn gen_mutex_output_validates() {
    let gen = bin()
        .args(["gen", "mutex", "--users", "2", "--groups", "3,2"])
        .output()
        .unwrap();
    assert!(gen.status.success());
    let path = tmp("cli-mutex.json", std::str::from_utf8(&gen.stdout).unwrap());
    let out = bin().args(["validate", &path]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "valid");
}

#[test]
fn gen_mutex_rejects_tiny_group() {
    let out = bin()
        .args(["gen", "mutex", "--users", "1", "--groups", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_2() {
    let out = bin()
        .args(["check-safety", "/nonexistent/model.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stdin_dash_works() {
    let model = reduce_dacc_to_cosp(&single_edge_instance());
    let mut child = bin()
        .args(["check-safety", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(serialize_policy(&model).as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "unsafe");
}
