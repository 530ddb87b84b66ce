use std::path::PathBuf;
use std::process::{Command, Output};

use iklkit::divergence::{ConditionReport, IklReport, OrientationReport};
use iklkit::{Cgm, Dag, Environment, EnvironmentSet, Intervention, Mechanism, VariableSpace};
use serde_json::Value;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iklkit"))
        .args(args)
        .env_remove("IKLKIT_LIMIT_CELLS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_f64().expect("finite number")
}

fn example1(args: &[&str]) -> Vec<String> {
    args.iter().map(|a| fixture(&format!("example1/{a}"))).collect()
}

fn figure2(args: &[&str]) -> Vec<String> {
    args.iter().map(|a| fixture(&format!("figure2/{a}"))).collect()
}

fn with<'a>(cmd: &'a str, files: &'a [String]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(files.iter().map(String::as_str));
    v
}

#[test]
fn example1_fixture_is_equivalent() {
    let files = example1(&["p.json", "e1.json", "e2.json"]);
    let out = run(&with("ikl", &files));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("over 2 environments"));
    assert!(text.trim_end().ends_with(": equivalent"), "{text}");
    let report: IklReport = serde_json::from_value(json(&with("ikl", &files))).unwrap();
    assert!(report.equivalent);
    assert!(report.ikl_value.value() <= 1e-12);
}

#[test]
fn perturbed_example1_blames_the_perturbed_variable() {
    let files = example1(&["q_perturbed.json", "e1.json", "e2.json"]);
    let out = run(&with("ikl", &files));
    assert!(out.status.success());
    assert!(stdout(&out).contains("not equivalent"));
    let report: IklReport = serde_json::from_value(json(&with("ikl", &files))).unwrap();
    assert!(report.ikl_value.value() > 1e-3);
    let (worst, _) = report
        .per_environment
        .iter()
        .flat_map(|e| e.decomposition.unintervened_terms.iter())
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert_eq!(*worst, 1);
}

fn example1_in_code(x2_rows: Vec<Vec<f64>>) -> (Cgm, EnvironmentSet) {
    let space = VariableSpace::binary(3).unwrap();
    let g = Dag::new(3, [(0, 1), (0, 2)]).unwrap();
    let mech = |child, rows| Mechanism::new(child, 2, vec![0], vec![2], rows).unwrap();
    let p = Cgm::new(
        space,
        g,
        vec![
            Mechanism::new(0, 2, vec![], vec![], vec![vec![0.4, 0.6]]).unwrap(),
            mech(1, vec![vec![0.85, 0.15], vec![0.3, 0.7]]),
            mech(2, vec![vec![0.2, 0.8], vec![0.65, 0.35]]),
        ],
    )
    .unwrap();
    let flat = vec![vec![0.5, 0.5]; 2];
    let envs = EnvironmentSet::new(vec![
        Environment::from_interventions("e1", &p, vec![Intervention::replace(mech(2, flat.clone()))]).unwrap(),
        Environment::from_interventions("e2", &p, vec![Intervention::replace(mech(1, flat))]).unwrap(),
    ])
    .unwrap();
    let q = p.with_mechanism(mech(1, x2_rows)).unwrap();
    (q, envs)
}

#[test]
fn json_report_matches_library_values() {
    let files = example1(&["q_perturbed.json", "e1.json", "e2.json"]);
    let first = run(&["--json", "ikl", &files[0], &files[1], &files[2]]);
    let second = run(&["--json", "ikl", &files[0], &files[1], &files[2]]);
    assert_eq!(first.stdout, second.stdout);
    let parsed: IklReport = serde_json::from_slice(&first.stdout).unwrap();
    let (q, envs) = example1_in_code(vec![vec![0.6, 0.4], vec![0.3, 0.7]]);
    let direct = iklkit::ikl(&envs, &q, 1e-9).unwrap();
    assert_eq!(parsed, direct);
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["ikl", "no/such/model.json", "no/such/env.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn malformed_and_mismatched_inputs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"edges\": [").unwrap();
    let e1 = fixture("example1/e1.json");
    let out = run(&["ikl", bad.to_str().unwrap(), &e1]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot parse"));

    let q = fixture("figure2/q_right.json");
    let out = run(&["ikl", &q, &e1]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_tables_are_capacity_errors() {
    let files = example1(&["p.json", "e1.json"]);
    let out = Command::new(env!("CARGO_BIN_EXE_iklkit"))
        .args(["ikl", &files[0], &files[1]])
        .env("IKLKIT_LIMIT_CELLS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn covering_environments_witness_every_edge() {
    let files = figure2(&["q_right.json", "do_x1.json", "e2.json"]);
    let out = run(&with("check-conditions", &files));
    assert!(stdout(&out).contains("all edges witnessed: yes"));
    let report: ConditionReport = serde_json::from_value(json(&with("check-conditions", &files))).unwrap();
    assert!(report.all_satisfied);
    assert_eq!(report.identified_edges.len(), 5);
}

#[test]
fn partial_and_null_environment_sets() {
    let partial: ConditionReport =
        serde_json::from_value(json(&with("check-conditions", &figure2(&["q_right.json", "e2.json"])))).unwrap();
    assert!(!partial.all_satisfied);
    assert!(!partial.identified_edges.is_empty() && partial.identified_edges.len() < 5);

    let null: ConditionReport =
        serde_json::from_value(json(&with("check-conditions", &figure2(&["q_right.json", "e0.json"])))).unwrap();
    assert!(null.identified_edges.is_empty());
}

#[test]
fn restricted_example2() {
    let e1 = json(&with("restricted", &figure2(&["q_right.json", "e1.json"])));
    assert_eq!(e1["identified_edges"], serde_json::json!(["X3->X5"]));
    assert!(number(&e1["ikl_value"]) <= 1e-12);

    let e2 = json(&with("restricted", &figure2(&["q_right.json", "e2.json"])));
    assert_eq!(e2["identified_edges"], serde_json::json!(["X2->X3", "X4->X3"]));
    let terms = &e2["per_environment"][0]["decomposition"]["unintervened_terms"];
    assert!(number(&terms["3"]) > 1e-6, "X4 term");
    assert!(number(&terms["1"]) <= 1e-12, "X2 term");

    let caveat = json(&with("restricted", &figure2(&["q_right.json", "e2_x1.json"])));
    let terms = &caveat["per_environment"][0]["decomposition"]["unintervened_terms"];
    assert!(number(&terms["1"]) > 1e-6, "X2 term with X1 shifted");

    let files = figure2(&["q_right.json", "e2.json"]);
    let mut args = with("restricted", &files);
    args.extend(["--edges", ""]);
    assert!(number(&json(&args)["ikl_value"]) == 0.0);
}

#[test]
fn restricted_flags_override_files() {
    let files = figure2(&["q_right.json", "e1.json", "e2.json"]);
    let mut args = with("restricted", &files);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2), "observed lists disagree");
    args.extend(["--observed", "X2,X3,X4,X5", "--edges", "X3->X5"]);
    let v = json(&args);
    assert!(number(&v["ikl_value"]) <= 1e-12);
}

fn orient(files: &[&str]) -> (OrientationReport, String) {
    let files = figure2(files);
    let text = stdout(&run(&with("orient", &files)));
    (serde_json::from_value(json(&with("orient", &files))).unwrap(), text)
}

fn left_graph() -> Dag {
    Dag::new(5, [(0, 1), (1, 2), (1, 3), (2, 3), (2, 4)]).unwrap()
}

#[test]
fn orientation_recovers_the_left_graph() {
    let (report, text) = orient(&["p.json", "graph_right.json", "do_x1.json", "e2.json"]);
    assert_eq!(report.survivors, vec![left_graph()]);
    assert_eq!(report.flagged_variables, vec![3]);
    assert!(text.contains("survivors: 1"));
}

#[test]
fn orientation_keeps_the_true_graph_and_ambiguity() {
    let (report, _) = orient(&["p.json", "p.json", "e2.json"]);
    assert!(report.survivors.contains(&left_graph()));
    assert!(report.flagged_variables.is_empty());

    let (report, _) = orient(&["p.json", "graph_right.json", "e2.json"]);
    assert!(report.survivors.len() > 1);
    assert!(report.survivors.contains(&left_graph()));
}

#[test]
fn project_reproduces_bundled_model() {
    let files = figure2(&["p.json", "graph_right.json"]);
    let out = run(&with("project", &files));
    assert!(out.status.success());
    let bundled = std::fs::read_to_string(fixture("figure2/q_right.json")).unwrap();
    assert_eq!(stdout(&out), bundled);
}

#[test]
fn project_onto_own_graph_recovers_mechanisms() {
    let p = fixture("example1/p.json");
    let projected: Value = serde_json::from_slice(&run(&["project", &p, &p]).stdout).unwrap();
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let tables = |v: &Value| -> Vec<f64> {
        v["mechanisms"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|m| m["table"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().clone()))
            .map(|x| x.as_f64().unwrap())
            .collect()
    };
    let (a, b) = (tables(&projected), tables(&original));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(projected["edges"], original["edges"]);
}

#[test]
fn decompose_and_validate() {
    let files = example1(&["q_perturbed.json", "e1.json", "e2.json"]);
    let v = json(&with("decompose", &files));
    for label in ["e1", "e2"] {
        let d = &v[label];
        let sum: f64 = ["intervened_terms", "unintervened_terms"]
            .iter()
            .flat_map(|k| d[k].as_object().unwrap().values().map(number))
            .sum::<f64>()
            + number(&d["residual"]);
        assert!((sum - number(&d["total"])).abs() < 1e-12);
    }
    let mut shared = with("decompose", &files);
    shared.push("--shared");
    assert!(run(&shared).status.success());

    let v = json(&with("validate-envs", &example1(&["e1.json", "e2.json"])));
    assert_eq!(v["intersection_empty"], Value::Bool(true));
    assert_eq!(v["has_empty_intervention"], Value::Bool(false));
}

#[test]
fn generate_is_deterministic_and_self_consistent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["--seed", "11", "generate", "--out", dir.path().to_str().unwrap(), "--envs", "3"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["model.json", "joint.json", "e0.json", "e1.json", "e2.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let p = |n: &str| a.path().join(n).display().to_string();
    let report: IklReport =
        serde_json::from_value(json(&["ikl", &p("model.json"), &p("e0.json"), &p("e1.json"), &p("e2.json")]))
            .unwrap();
    assert!(report.equivalent);
    let orient: OrientationReport =
        serde_json::from_value(json(&["orient", &p("joint.json"), &p("model.json"), &p("e1.json")])).unwrap();
    assert!(!orient.survivors.is_empty());
}
