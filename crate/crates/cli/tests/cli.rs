use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use strat_forge::{LinkTree, Partition, VerificationReport, WeightSystem};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strat-forge"))
        .args(args)
        .env_remove("STRAT_FORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

const FAST: [&str; 2] = ["--samples", "2000"];

#[test]
fn trivial_action_has_one_stratum() {
    let input = data("trivial.json");
    let o = run(&["stratify", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    let strata = v["partition"]["strata"].as_array().unwrap();
    assert_eq!(strata.len(), 1);
    assert_eq!(strata[0]["dimension"], 4);
}

#[test]
fn circle_report_passes() {
    let input = data("circle_1_-1.json");
    let o = run(&["report", "--input", input.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("2 strata, dimension 2"), "{text}");
    assert!(text.contains("verification: PASS"), "{text}");

    let o = run(&["report", "--input", input.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let tree: LinkTree = serde_json::from_value(v["link_tree"].clone()).unwrap();
    assert_eq!(tree.partition.strata.len(), 2);
    let origin = &tree.nodes[0];
    assert_eq!(origin.dimension, 0);
    // The link of the origin is a circle.
    let link = origin.children.as_ref().unwrap();
    assert_eq!(link.partition.strata.len(), 1);
    assert_eq!(link.partition.strata[0].dimension, 1);
    let report: VerificationReport = serde_json::from_value(v["verification"].clone()).unwrap();
    assert!(report.pass);
    assert_eq!(report.connectivity[0].result.components, 1);
}

#[test]
fn same_seed_is_byte_identical() {
    let input = data("circle_2_-2_1.json");
    let args = |seed: &'static str| {
        let mut a = vec!["verify", "--input", input.to_str().unwrap(), "--seed", seed];
        a.extend(FAST);
        run(&a)
    };
    let a = args("11");
    let b = args("11");
    let c = args("12");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn outputs_round_trip() {
    let input = data("z2xz2_contact.json");
    let o = run(&["report", "--input", input.to_str().unwrap(), "--format", "json", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let ws: WeightSystem = serde_json::from_value(v["system"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&ws).unwrap(), v["system"]);
    let tree: LinkTree = serde_json::from_value(v["link_tree"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&tree).unwrap(), v["link_tree"]);
    let report: VerificationReport = serde_json::from_value(v["verification"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), v["verification"]);

    let o = run(&["stratify", "--input", input.to_str().unwrap()]);
    let v = json(&o);
    let p: Partition = serde_json::from_value(v["partition"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&p).unwrap(), v["partition"]);
}

#[test]
fn out_file_matches_stdout() {
    let input = data("circle_1_-1.json");
    let out = scratch("out_file_matches_stdout.json");
    let o = run(&["links", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let o = run(&["links", "--input", input.to_str().unwrap()]);
    assert_eq!(std::fs::read(&out).unwrap(), o.stdout);
}

#[test]
fn pinned_goldens_match() {
    for (command, input, golden) in [
        ("stratify", "circle_1_-1.json", "golden_stratify_circle_1_-1.json"),
        ("links", "circle_2_-2_1.json", "golden_links_circle_2_-2_1.json"),
    ] {
        let (input, golden) = (data(input), data(golden));
        let o = run(&[command, "--input", input.to_str().unwrap(), "--golden", golden.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{command}: {}", stderr(&o));
        assert_eq!(o.stdout, std::fs::read(&golden).unwrap());
    }
}

#[test]
fn corrupted_golden_exits_2() {
    let input = data("circle_2_-2_1.json");
    let golden = std::fs::read_to_string(data("golden_links_circle_2_-2_1.json")).unwrap();

    // A stratum dimension that contradicts the stored local-model ledger.
    let mut v: Value = serde_json::from_str(&golden).unwrap();
    v["link_tree"]["partition"]["strata"][0]["dimension"] = Value::from(4);
    let corrupt = scratch("corrupt_dimension.json");
    std::fs::write(&corrupt, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["links", "--input", input.to_str().unwrap(), "--golden", corrupt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("integrity violation ["), "{}", stderr(&o));

    // A consistent but different artifact.
    let mut v: Value = serde_json::from_str(&golden).unwrap();
    v["command"] = Value::from("stratify");
    let corrupt = scratch("corrupt_command.json");
    std::fs::write(&corrupt, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["links", "--input", input.to_str().unwrap(), "--golden", corrupt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[golden]"), "{}", stderr(&o));

    // Truncated file.
    let corrupt = scratch("corrupt_truncated.json");
    std::fs::write(&corrupt, &golden[..golden.len() / 2]).unwrap();
    let o = run(&["links", "--input", input.to_str().unwrap(), "--golden", corrupt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // Schema bump.
    let mut v: Value = serde_json::from_str(&golden).unwrap();
    v["schema_version"] = Value::from(99);
    let corrupt = scratch("corrupt_schema.json");
    std::fs::write(&corrupt, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["links", "--input", input.to_str().unwrap(), "--golden", corrupt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[schema-version]"), "{}", stderr(&o));
}

#[test]
fn malformed_input_exits_1_with_position() {
    let bad = scratch("malformed.json");
    std::fs::write(&bad, "{\n  \"torus_rank\": 1,\n  \"weights\": [[1, -1]\n}\n").unwrap();
    let o = run(&["stratify", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("malformed.json:4:1"), "{err}");

    std::fs::write(&bad, r#"{"torus_rank": 1, "weights": [[1, -1]], "colour": 3}"#).unwrap();
    let o = run(&["stratify", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));

    let o = run(&["stratify", "--input", scratch("does_not_exist.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["stratify"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let input = data("trivial.json");
    let o = run(&["links", "--input", input.to_str().unwrap(), "--max-depth", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_strat-forge"))
        .args(["stratify", "--input", input.to_str().unwrap()])
        .env("STRAT_FORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_output() {
    let input = data("circle_2_-2_1.json");
    let mut args = vec!["verify", "--input", input.to_str().unwrap(), "--seed", "3"];
    args.extend(FAST);
    let capped = Command::new(env!("CARGO_BIN_EXE_strat-forge"))
        .args(&args)
        .env("STRAT_FORGE_THREADS", "1")
        .output()
        .unwrap();
    let free = run(&args);
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(capped.stdout, free.stdout);
}

#[test]
fn too_many_coordinates_is_an_input_error() {
    let input = data("circle_2_-2_1.json");
    let o = run(&["stratify", "--input", input.to_str().unwrap(), "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceed"), "{}", stderr(&o));
}

#[test]
fn empty_contact_quotient_is_not_an_error() {
    let input = data("empty_contact.json");
    for command in ["stratify", "verify"] {
        let o = run(&[command, "--input", input.to_str().unwrap(), "--samples", "1000"]);
        assert_eq!(o.status.code(), Some(0), "{command}: {}", stderr(&o));
    }
    let o = run(&["report", "--input", input.to_str().unwrap(), "--samples", "1000"]);
    assert!(stdout(&o).contains("the quotient is empty"));
}
