use std::process::{Command, Output};

use serde_json::Value;
use tamper_core::io::{attacks_to_json, parse_attacks, parse_plant, plant_to_json};
use tamper_core::{fixtures, StateId};
use tamper_oracle::{oracle_estimate, OracleBudget};

fn tamper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = tamper(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn write_fixture(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn estimate_from_files_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_fixture(&dir, "plant.json", fixtures::FIG1_PLANT);
    let attacks = write_fixture(&dir, "costs.json", fixtures::TABLE1_ATTACKS);
    let v = json_ok(&[
        "estimate",
        "--plant",
        &plant,
        "--attacks",
        &attacks,
        "--obs",
        "β α α",
        "--budget",
        "2",
    ]);

    let g = fixtures::fig1_plant();
    let m = fixtures::table1_attacks(&g);
    let w = g.parse_word("β α α").unwrap();
    let expected = oracle_estimate(&g, &m, &w, 2, OracleBudget::default()).unwrap();
    let got: Vec<(StateId, u32)> = v["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let x = g.state(e["state"].as_str().unwrap()).unwrap();
            (x, e["cost"].as_u64().unwrap() as u32)
        })
        .collect();
    assert_eq!(got, expected.into_iter().collect::<Vec<_>>());
    assert!(v["over_budget"].is_array());
}

#[test]
fn infeasible_observation_gives_empty_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let none = write_fixture(&dir, "none.json", fixtures::EMPTY_ATTACKS);
    let v = json_ok(&[
        "--fixture",
        "fig1",
        "--attacks",
        &none,
        "estimate",
        "--obs",
        "γ γ",
        "--budget",
        "0",
    ]);
    assert_eq!(v["estimates"], serde_json::json!([]));
}

#[test]
fn diagnose_fig4_is_diagnosable() {
    let v = json_ok(&["--fixture", "fig4", "diagnose", "--budget", "4"]);
    assert_eq!(v, serde_json::json!({ "diagnosable": true }));
}

#[test]
fn diagnose_fig6_reports_witness() {
    let v = json_ok(&[
        "--fixture",
        "fig6",
        "diagnose",
        "--budget",
        "2",
        "--witness",
    ]);
    assert_eq!(v["diagnosable"], false);
    let w = &v["witness"];
    assert!(!w["faulty"]["cycle"].as_array().unwrap().is_empty());
    assert!(w["normal"]["prefix"].is_array());
    assert!(w["observed_prefix"].is_array());
}

#[test]
fn cmin_values() {
    assert_eq!(
        json_ok(&["--fixture", "fig6", "cmin"]),
        serde_json::json!({ "cmin": 2 })
    );
    assert_eq!(
        json_ok(&["--fixture", "fig4", "cmin"]),
        serde_json::json!({ "cmin": null, "reason": "no modified F-confused cycle" })
    );
}

#[test]
fn output_is_byte_identical_across_runs() {
    let cases: &[&[&str]] = &[
        &[
            "--fixture",
            "fig1",
            "estimate",
            "--obs",
            "β α α",
            "--budget",
            "2",
            "--witness",
        ],
        &[
            "--fixture",
            "fig6",
            "diagnose",
            "--budget",
            "2",
            "--witness",
        ],
        &["--fixture", "fig6", "cmin", "--witness"],
        &["--fixture", "fig1", "observer"],
        &[
            "--fixture",
            "fig6",
            "export-dot",
            "verifier",
            "--budget",
            "2",
        ],
    ];
    for args in cases {
        let a = tamper(args);
        let b = tamper(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn malformed_json_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_fixture(&dir, "bad.json", "{\n  \"states\": [\"0\",\n");
    let out = tamper(&["--plant", &plant, "observer"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["line"], 3);
    assert!(err["column"].is_u64());
}

#[test]
fn unknown_symbol_is_an_input_error() {
    let out = tamper(&[
        "--fixture",
        "fig1",
        "estimate",
        "--obs",
        "ω",
        "--budget",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dead_state_is_a_precondition_violation() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_fixture(
        &dir,
        "dead.json",
        r#"{"states":["0","1"],"observable":["a"],"unobservable":["f"],"faults":["f"],
            "initial":["0"],"transitions":[{"from":"0","event":"f","to":"1"},{"from":"0","event":"a","to":"0"}]}"#,
    );
    for cmd in [&["diagnose", "--budget", "0"][..], &["cmin"][..]] {
        let mut args = vec!["--plant", plant.as_str()];
        args.extend_from_slice(cmd);
        let out = tamper(&args);
        assert_eq!(out.status.code(), Some(3), "{cmd:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["witness"]["kind"], "not_live");
        let state = err["witness"]["state"].as_str().unwrap();
        assert!(state == "1" || state == "(1,0)", "{state}");
    }
}

#[test]
fn fixtures_round_trip_through_json() {
    for (name, plant_json, attack_json) in fixtures::CORPUS {
        let g = parse_plant(plant_json).unwrap();
        let m = parse_attacks(attack_json, &g).unwrap();
        let g2 = parse_plant(&plant_to_json(&g)).unwrap();
        let m2 = parse_attacks(&attacks_to_json(&m, &g2), &g2).unwrap();
        assert_eq!(plant_to_json(&g), plant_to_json(&g2), "{name}");
        assert_eq!(attacks_to_json(&m, &g), attacks_to_json(&m2, &g2), "{name}");
    }
}

#[test]
fn observer_contains_estimation_chain() {
    let v = json_ok(&["--fixture", "fig1", "observer"]);
    let edges = v["transitions"].as_array().unwrap();
    let has = |from: &str, event: &str, to: &str| {
        edges
            .iter()
            .any(|e| e["from"] == from && e["event"] == event && e["to"] == to)
    };
    assert_eq!(v["initial"], "{0,1,2,3,4}");
    assert!(has("{0,1,2,3,4}", "α", "{2,3,4}"));
    assert!(has("{2,3,4}", "β", "{2,3}"));
    assert!(has("{2,3}", "α", "{3,4}"));
}

#[test]
fn observer_of_deterministic_observable_plant_is_the_plant() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_fixture(
        &dir,
        "det.json",
        r#"{"states":["p","q"],"observable":["a","b"],"initial":["p"],
            "transitions":[{"from":"p","event":"a","to":"q"},{"from":"q","event":"b","to":"p"}]}"#,
    );
    let v = json_ok(&["--plant", &plant, "observer"]);
    assert_eq!(v["states"], serde_json::json!(["{p}", "{q}"]));
    assert_eq!(
        v["transitions"],
        serde_json::json!([
            { "from": "{p}", "event": "a", "to": "{q}" },
            { "from": "{q}", "event": "b", "to": "{p}" },
        ])
    );
}

#[test]
fn dot_outputs_are_digraphs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vprime.dot");
    json_ok(&["--fixture", "fig6", "cmin", "--dot", out.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("digraph"));
    for graph in [
        "plant",
        "observer",
        "costed-plant",
        "verifier",
        "modified-verifier",
    ] {
        let o = tamper(&["--fixture", "fig6", "export-dot", graph, "--budget", "1"]);
        assert!(o.status.success(), "{graph}");
        assert!(o.stdout.starts_with(b"digraph"), "{graph}");
    }
    for graph in ["observation-dfa", "product"] {
        let o = tamper(&[
            "--fixture",
            "fig1",
            "export-dot",
            graph,
            "--obs",
            "β α α",
            "--budget",
            "2",
        ]);
        assert!(o.stdout.starts_with(b"digraph"), "{graph}");
    }
}
