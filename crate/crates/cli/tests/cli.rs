use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ALICE_BOB: &str = r#"{
    "seed": 12,
    "users": [
        {"scheme": "naive", "id": "alice", "n": 6, "types": ["acquaintance", "colleague", "family"]},
        {"scheme": "naive", "id": "bob", "n": 6, "types": ["competitor", "classmate", "neighbor"]}
    ],
    "connections": [
        {"requester": "alice", "requester_group": "acquaintance", "target": "bob", "target_group": "competitor"}
    ],
    "policies": [
        {"owner": "bob", "group": "competitor", "permissions": ["ViewBasicProfile", "ViewPhotos"]}
    ],
    "attacks": [
        {"model": "seeker"},
        {"model": "passive", "coalition": ["alice"]}
    ]
}"#;

fn secgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn scenario_dir(body: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scenario.json"), body).unwrap();
    dir
}

#[test]
fn alice_bob_run() {
    let dir = scenario_dir(ALICE_BOB);
    let out = secgraph(dir.path(), &["run", "--input", "scenario.json", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");

    let graph = json(&o.join("graph.json"));
    assert_eq!(graph["edges"].as_array().unwrap().len(), 1);
    let edge = &graph["edges"][0];
    let tag_of = |s: &Value| {
        let sec = &graph["secretaries"][s.as_u64().unwrap().to_string()];
        (sec["owner"].as_str().unwrap().to_string(), sec["private_tag"].as_str().unwrap().to_string())
    };
    let mut sides = [tag_of(&edge[0]), tag_of(&edge[1])];
    sides.sort();
    assert_eq!(sides[0], ("alice".to_string(), "acquaintance#1".to_string()));
    assert_eq!(sides[1], ("bob".to_string(), "competitor#1".to_string()));

    let public = json(&o.join("public.json"));
    assert_eq!(public["edges"].as_array().unwrap().len(), 1);
    for s in &public["edges"][0].as_array().unwrap().clone() {
        assert_eq!(public["snodes"][s.as_u64().unwrap().to_string()]["public_tag"], "friend");
    }
    let public_text = fs::read_to_string(o.join("public.json")).unwrap();
    let dot = fs::read_to_string(o.join("public.dot")).unwrap();
    for secret in ["acquaintance", "competitor", "colleague", "classmate"] {
        assert!(!public_text.contains(secret) && !dot.contains(secret), "{secret} leaked");
    }
    assert_eq!(dot.lines().filter(|l| l.contains(" -- ")).count(), 1);

    let metrics = json(&o.join("metrics.json"));
    assert_eq!(metrics["empirical"]["edges"], 1);
    assert_eq!(json(&o.join("attack-0.json"))["model"], "seeker");
    assert_eq!(json(&o.join("attack-1.json"))["per_edge"].as_array().unwrap().len(), 1);
    assert_eq!(json(&o.join("policies.json"))["bob"]["owner"], "bob");
}

#[test]
fn empty_scenario_succeeds() {
    let dir = scenario_dir("{}");
    let out = secgraph(dir.path(), &["run", "--input", "scenario.json", "--out", "out"]);
    assert!(out.status.success());
    let o = dir.path().join("out");
    assert_eq!(json(&o.join("public.json"))["edges"].as_array().unwrap().len(), 0);
    assert_eq!(fs::read_to_string(o.join("public.dot")).unwrap().lines().filter(|l| l.contains("[label=")).count(), 0);
    assert!(!o.join("attack-0.json").exists());
}

#[test]
fn exit_codes() {
    let bad_json = scenario_dir("{\"users\": [");
    let out = secgraph(bad_json.path(), &["run", "--input", "scenario.json", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2));

    let unknown = scenario_dir(&ALICE_BOB.replace("\"target\": \"bob\"", "\"target\": \"carol\""));
    let out = secgraph(unknown.path(), &["run", "--input", "scenario.json", "--out", "out"]);
    assert_eq!(out.status.code(), Some(3));
    // rejected before anything ran
    assert!(!unknown.path().join("out").exists());

    let twice = ALICE_BOB.replace(
        "\"connections\": [",
        "\"connections\": [{\"requester\": \"bob\", \"requester_group\": \"neighbor\", \"target\": \"alice\", \"target_group\": \"family\"},",
    );
    let runtime = scenario_dir(&twice);
    let out = secgraph(runtime.path(), &["run", "--input", "scenario.json", "--out", "out"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("connections[1]"));
}

#[test]
fn runs_are_byte_identical() {
    let dir = scenario_dir(ALICE_BOB);
    for o in ["a", "b"] {
        assert!(secgraph(dir.path(), &["run", "--input", "scenario.json", "--out", o]).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        assert_eq!(
            fs::read(dir.path().join("a").join(&name)).unwrap(),
            fs::read(dir.path().join("b").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn step_by_step_commands() {
    let dir = scenario_dir(ALICE_BOB);
    let p = dir.path();
    let ok = |args: &[&str]| {
        let out = secgraph(p, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["gen", "--input", "scenario.json"]);
    assert_eq!(json(&p.join("out/graph.json"))["edges"].as_array().unwrap().len(), 0);
    ok(&["connect", "--input", "scenario.json"]);
    assert_eq!(json(&p.join("out/graph.json"))["edges"].as_array().unwrap().len(), 1);
    ok(&["export", "--public", "--dot"]);
    assert!(p.join("out/public.json").exists() && p.join("out/public.dot").exists());
    ok(&["metrics"]);
    assert_eq!(json(&p.join("out/metrics.json"))["empirical"]["users"], 2);

    let report: Value = serde_json::from_slice(&ok(&["attack", "--model", "passive", "--coalition", "alice", "--seed", "3"]).stdout).unwrap();
    assert_eq!(report["model"], "passive");
    assert!(report["summary"]["success_rate"].is_number());
    assert!(report["summary"]["analytic_reference"].is_number());

    let active: Value = serde_json::from_slice(
        &ok(&["attack", "--model", "active", "--attacker", "alice", "--target", "bob", "--probes", "12"]).stdout,
    )
    .unwrap();
    let hits: u64 = active["histogram"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(hits, 12);

    let acl: Value = serde_json::from_slice(&ok(&["acl", "eval", "--input", "scenario.json", "--owner", "bob", "--viewer", "alice"]).stdout).unwrap();
    assert_eq!(acl["permissions"], serde_json::json!(["ViewBasicProfile", "ViewPhotos"]));
    let guest: Value = serde_json::from_slice(&ok(&["acl", "eval", "--owner", "bob", "--viewer", "stranger"]).stdout).unwrap();
    assert_eq!(guest["permissions"], serde_json::json!(["ViewBasicProfile"]));

    let out = secgraph(p, &["attack", "--model", "passive", "--coalition", "ghost"]);
    assert_eq!(out.status.code(), Some(3));
    let out = secgraph(p, &["attack", "--model", "seeker", "--graph", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn random_generation() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--users", "6", "--snodes", "4", "--types", "2", "--degree", "2", "--seed", "5"];
    assert!(secgraph(dir.path(), &args).status.success());
    let graph = json(&dir.path().join("out/graph.json"));
    assert_eq!(graph["secretaries"].as_object().unwrap().len(), 24);
    assert_eq!(graph["edges"].as_array().unwrap().len(), 6);
}
