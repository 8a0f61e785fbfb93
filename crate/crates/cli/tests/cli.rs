use std::path::Path;
use std::process::{Command, Output};

fn shapkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_fixture(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

const PAIR_MODEL: &str = r#"{"d":2,"active":[1,2],"values":[0.0,1.0,1.0,3.0]}"#;
const PARTIAL_MODEL: &str = r#"{"d":3,"active":[1,2],"values":[0.0,1.0,1.0,2.0,1.0,1.0,1.0,1.0]}"#;

#[test]
fn attribute_greedy_path_on_the_pair_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "m.json", PAIR_MODEL);
    let out = shapkit(&["attribute", &input, "--method", "greedy-path"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["phi"], serde_json::json!([2.0, 1.0]));
    assert_eq!(json["method"], "greedy-path");

    let out = shapkit(&["attribute", &input, "--method", "exact"]);
    let json = stdout_json(&out);
    assert_eq!(json["phi"], serde_json::json!([1.5, 1.5]));
}

#[test]
fn attribute_claim1_on_the_partially_active_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "m.json", PARTIAL_MODEL);
    let out = shapkit(&["attribute", &input, "--method", "claim1"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["phi"], serde_json::json!([0.5, 0.5, 0.0]));
}

#[test]
fn verify_exit_codes_follow_the_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "m.json", PAIR_MODEL);

    let out = shapkit(&["verify", &input, "--method", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = stdout_json(&out);
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["verdict"] == "holds"));

    let out = shapkit(&["verify", &input, "--method", "greedy-path"]);
    assert_eq!(out.status.code(), Some(1));
    let reports = stdout_json(&out);
    let symmetry = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["axiom"] == "restricted_symmetry")
        .unwrap();
    assert_eq!(symmetry["verdict"], "violated");
    assert_eq!(symmetry["witness"]["i"], 1);
    assert_eq!(symmetry["witness"]["j"], 2);

    let partial = write_fixture(dir.path(), "p.json", PARTIAL_MODEL);
    let out = shapkit(&["verify", &partial, "--method", "claim1"]);
    assert_eq!(out.status.code(), Some(1));
    let reports = stdout_json(&out);
    let accuracy = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["axiom"] == "local_accuracy")
        .unwrap();
    assert_eq!(accuracy["verdict"], "violated");
}

#[test]
fn demos_match_their_expected_values() {
    for which in ["counterexample", "claim-falsification", "no-go"] {
        let out = shapkit(&["demo", which]);
        assert_eq!(out.status.code(), Some(0), "demo {which}");
        let json = stdout_json(&out);
        assert_eq!(json["match"], true, "demo {which}");
    }
}

#[test]
fn compare_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let out = shapkit(&[
        "gen",
        "random-model",
        "-d",
        "7",
        "--seed",
        "5",
        "-o",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = shapkit(&[
        "compare",
        model.to_str().unwrap(),
        "--samples",
        "20000",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert!(json["max_abs_delta"]["regression"].as_f64().unwrap() <= 1e-9);
    assert!(json["timings_ms"]["exact"].as_f64().unwrap() >= 0.0);

    // a single-active-index model is handled analytically by every route
    let tiny = write_fixture(
        dir.path(),
        "tiny.json",
        r#"{"d":1,"active":[1],"values":[0.25,1.5]}"#,
    );
    let out = shapkit(&["compare", &tiny]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert!(json["max_abs_delta"]["sampled"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn gen_is_deterministic_and_schema_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = shapkit(&[
            "gen",
            "random-model",
            "-d",
            "5",
            "--seed",
            "11",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // the generated model feeds straight back into attribute
    let out = shapkit(&["attribute", a.to_str().unwrap()]);
    assert!(out.status.success());

    // games pin the empty coalition to zero
    let out = shapkit(&["gen", "random-game", "-d", "4", "--seed", "2"]);
    let json = stdout_json(&out);
    assert_eq!(json["values"][0], 0.0);
    assert_eq!(json["values"].as_array().unwrap().len(), 16);
    assert!(json.get("active").is_none());

    let out = shapkit(&["gen", "random-model", "-d", "30", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampled_attribution_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    shapkit(&[
        "gen",
        "random-model",
        "-d",
        "6",
        "--seed",
        "8",
        "-o",
        model.to_str().unwrap(),
    ]);
    let run = || {
        let out = shapkit(&[
            "attribute",
            model.to_str().unwrap(),
            "--method",
            "sampled",
            "--samples",
            "500",
            "--seed",
            "21",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn parse_and_usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();

    let malformed = write_fixture(dir.path(), "bad.json", "{\"d\":2,\"active\":[1],");
    let out = shapkit(&["attribute", &malformed]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("line"),
        "stderr should carry line info: {stderr}"
    );

    let short = write_fixture(
        dir.path(),
        "short.json",
        r#"{"d":3,"active":[1],"values":[0.0,1.0]}"#,
    );
    let out = shapkit(&["attribute", &short]);
    assert_eq!(out.status.code(), Some(2));

    let out = shapkit(&["attribute", "/nonexistent/input.json"]);
    assert_eq!(out.status.code(), Some(2));

    let input = write_fixture(dir.path(), "ok.json", PAIR_MODEL);
    let out = shapkit(&["attribute", &input, "--method", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
