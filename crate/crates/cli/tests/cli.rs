use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pants-atlas")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn types_counts() {
    let out = run(&["types", "--mode", "labelled", "--n", "6"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["count"], 105);
    let out = run(&["types", "--mode", "unlabelled", "--n", "8"]);
    assert_eq!(json(&out)["count"], 4);
    let out = run(&["types", "--dual-graphs", "--g", "2"]);
    assert_eq!(json(&out)["count"], 2);
    let out = run(&["types", "--triangulations", "--n", "9"]);
    assert_eq!(json(&out)["count"], 27);
}

#[test]
fn pants_types_as_csv() {
    let out = run(&["types", "--pants", "--n", "6", "--format", "csv", "--essential-only"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "a,b,c\n1,1,4\n1,2,3\n2,2,2\n");
}

#[test]
fn dot_output() {
    let out = run(&["types", "--dual-graphs", "--g", "2", "--format", "dot"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("graph").count(), 2);
}

#[test]
fn family_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["family", "--labelled-sphere", "--n", "5"], "labelled-sphere"),
        (&["family", "--all-pairs", "--n", "8"], "cyclic"),
        (&["family", "--all-chords", "--n", "9"], "triangulation"),
        (&["family", "--random-edges", "--n", "30", "--seed", "5"], "triangle-cover"),
        (&["family", "--genus1", "--m", "4"], "genus1"),
        (&["family", "--genus2", "--m", "3"], "genus2"),
    ];
    for (i, (args, kind)) in cases.iter().enumerate() {
        let file = dir.path().join(format!("f{i}.json"));
        let mut full = args.to_vec();
        full.extend(["--out", path(&file)]);
        let out = run(&full);
        assert!(out.status.success(), "{args:?}");
        let summary = String::from_utf8(out.stdout).unwrap();
        assert!(summary.contains("pass"), "{args:?}: {summary}");
        let out = run(&["verify", path(&file)]);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let rep = json(&out);
        assert_eq!(rep["kind"], *kind);
        assert_eq!(rep["universal"], true);
    }
}

#[test]
fn summary_goes_to_stderr_when_family_is_on_stdout() {
    let out = run(&["family", "--genus1", "--m", "2"]);
    assert!(out.status.success());
    let fam = json(&out);
    assert_eq!(fam["kind"], "genus1");
    assert_eq!(fam["family"].as_array().unwrap().len(), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bound 3^m = 9"));
}

#[test]
fn verify_reports_missing_types_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("small.json");
    let body = r#"{"kind":"index-set","n":12,"family":{"n":12,"s":[1,2,3]}}"#;
    std::fs::write(&file, body).unwrap();
    let out = run(&["verify", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    let rep = json(&out);
    assert_eq!(rep["universal"], false);
    assert!(!rep["failures"].as_array().unwrap().is_empty());

    let file = dir.path().join("chords.json");
    let body = r#"{"kind":"triangulation","n":5,"family":{"n":5,"edges":[[1,2],[2,3],[3,4],[4,5],[1,5]]}}"#;
    std::fs::write(&file, body).unwrap();
    assert_eq!(run(&["verify", path(&file)]).status.code(), Some(1));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    for body in [
        "not json",
        r#"{"kind":"mystery","n":4,"family":[]}"#,
        r#"{"kind":"cyclic","n":4,"family":[],"extra":1}"#,
        r#"{"kind":"triangulation","n":4,"family":{"n":4,"edges":[[1,1]]}}"#,
    ] {
        std::fs::write(&file, body).unwrap();
        assert_eq!(run(&["verify", path(&file)]).status.code(), Some(2), "{body}");
    }
    assert_eq!(run(&["verify", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn parameter_errors_exit_2() {
    assert_eq!(run(&["family", "--random-pants", "--n", "10", "--c", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--random-pants", "--n", "10", "--c", "0"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--labelled-sphere", "--n", "4", "--min-size", "3", "--max-size", "2"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--genus", "6"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--genus1"]).status.code(), Some(2));
    assert_eq!(run(&["family"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--genus1", "--genus2", "--m", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bounds_values() {
    assert_eq!(json(&run(&["bounds", "--labelled", "--n", "5"]))["lower_bound"], 10);
    assert_eq!(json(&run(&["bounds", "--pants-dec", "--n", "8"]))["lower_bound"], 8);
    let rep = json(&run(&["bounds", "--genus", "2", "--family-size", "4"]));
    assert_eq!(rep["lower_bound"], 4);
    assert_eq!(rep["satisfied"], true);
}

#[test]
fn certificate_on_all_chords() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    assert!(run(&["family", "--all-chords", "--n", "10", "--out", path(&file)]).status.success());
    let out = run(&["bounds", "--certificate", path(&file), "--ell", "3"]);
    assert!(out.status.success());
    let rep = json(&out);
    assert_eq!(rep["edges"], 45);
    assert_eq!(rep["cycles"], 120);
    assert_eq!(rep["satisfied"], true);
}

#[test]
fn experiment_csv_shape() {
    let out = run(&["experiment", "--n", "32,64", "--seeds", "2", "--no-timing", "--essential-only"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,c,seed,set_size,family_size,covered,total,runtime_ms");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..5].iter().all(|l| l.ends_with(",0")));
    assert!(lines[5].starts_with("# slope,"));
}

#[test]
fn thread_count_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_pants-atlas"))
        .args(["bounds", "--genus", "2"])
        .env("PANTS_ATLAS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
