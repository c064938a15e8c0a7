//! Black-box tests of the binary: exit codes, JSON output shapes, chart and
//! SVG rendering, and the environment-variable truncation default.

use std::path::PathBuf;
use std::process::{Command, Output};

use kuenneth::koszul::TorTable;
use kuenneth::pipeline::DLActionTable;

fn kuenneth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kuenneth"))
        .args(args)
        .env_remove("KUENNETH_MAX_DEGREE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn tor_json_round_trips() {
    let out = kuenneth(&["tor", "--ring", "ku", "--prime", "2", "--max-degree", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table: TorTable = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table.prime, 2);
    assert_eq!(table.ring, "ku");
    assert!(table.one_line_generated);
    assert_eq!(table.classes.len(), 4);
}

#[test]
fn dl_action_json_round_trips() {
    let out = kuenneth(&["dl-action", "--ring", "BP2", "--prime", "2", "--max-degree", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table: DLActionTable = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table.nonzero_entries().len(), 4);
}

#[test]
fn chart_output_is_ascii_safe_on_request() {
    let out = kuenneth(&[
        "tor", "--ring", "ku", "--max-degree", "8", "--format", "chart", "--ascii-safe",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.is_ascii(), "chart should be plain ASCII:\n{text}");
    assert!(text.contains("2b*vb"));

    let unicode = kuenneth(&["tor", "--ring", "ku", "--max-degree", "8", "--format", "chart"]);
    assert!(stdout(&unicode).contains("v\u{0304}"));
}

#[test]
fn svg_output_is_svg() {
    let out = kuenneth(&[
        "dl-action", "--ring", "ku", "--max-degree", "8", "--format", "svg",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("<svg"), "{text}");
    assert!(text.contains("</svg>"));
}

#[test]
fn realizable_reports_obstruction() {
    let out = kuenneth(&["realizable", "--ideal", "2,x1", "--prime", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "obstructed");
    assert_eq!(v["witness"]["in_ideal"], "x1");
    assert_eq!(v["witness"]["escapes"], "x3");
}

#[test]
fn conjugate_prints_element_string() {
    let out = kuenneth(&["conjugate", "--xi", "2", "--prime", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("xi1^3"), "{text}");

    let both = kuenneth(&["conjugate", "--xi", "2", "--method", "compositions", "--prime", "2"]);
    assert_eq!(stdout(&both), text);
}

#[test]
fn collapse_failure_exits_3() {
    let out = kuenneth(&[
        "dl-action", "--ring", "MU", "--module", "hurewicz", "--max-degree", "8",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("collapse hypothesis"));
}

#[test]
fn bad_ideal_exits_4() {
    let out = kuenneth(&["realizable", "--ideal", "y1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("unsupported ideal shape"));
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const KOSZUL_RESOLUTION: &str = r#"{
    "ring-ref": {
        "prime": 2,
        "truncation": 6,
        "generators": [{"name": "x", "degree": 1}]
    },
    "terms": [[{"gen": "e", "degree": 0}], [{"gen": "f", "degree": 1}]],
    "differentials": [[["x"]]],
    "augmentation": ["1"]
}"#;

#[test]
fn lift_succeeds_and_certifies() {
    let src = write_tmp("lift_src.json", KOSZUL_RESOLUTION);
    let tgt = write_tmp("lift_tgt.json", KOSZUL_RESOLUTION);
    let map = write_tmp("lift_map.json", r#"{"images": {}}"#);
    let out = kuenneth(&[
        "lift",
        "--source", src.to_str().unwrap(),
        "--target", tgt.to_str().unwrap(),
        "--map", map.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["certified"], true);
    assert_eq!(v["t_max"], 6);
}

#[test]
fn lift_beyond_truncation_exits_5() {
    let src = write_tmp("lift5_src.json", KOSZUL_RESOLUTION);
    let tgt = write_tmp("lift5_tgt.json", KOSZUL_RESOLUTION);
    let map = write_tmp("lift5_map.json", r#"{"images": {}}"#);
    let out = kuenneth(&[
        "lift",
        "--source", src.to_str().unwrap(),
        "--target", tgt.to_str().unwrap(),
        "--map", map.to_str().unwrap(),
        "--max-degree", "10",
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    let out = kuenneth(&["tor", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncation_floor_is_enforced() {
    let out = kuenneth(&["tor", "--ring", "ku", "--max-degree", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least 4"));
}

#[test]
fn env_var_supplies_default_truncation() {
    let out = Command::new(env!("CARGO_BIN_EXE_kuenneth"))
        .args(["tor", "--ring", "ku"])
        .env("KUENNETH_MAX_DEGREE", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let table: TorTable = serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(table.t_max, 8);

    let bad = Command::new(env!("CARGO_BIN_EXE_kuenneth"))
        .args(["tor", "--ring", "ku"])
        .env("KUENNETH_MAX_DEGREE", "eight")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn descriptor_file_matches_builtin() {
    let builtin = kuenneth(&["tor", "--ring", "ku", "--max-degree", "8"]);
    let desc = write_tmp(
        "ku_copy.toml",
        r#"
name = "ku"
default-truncation = 8

[[generators]]
name = "v"
degree = 2
detection-index = 2

[sequence]
p-detection-index = 1
"#,
    );
    let from_file = kuenneth(&["tor", "--descriptor", desc.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&builtin));
}

#[test]
fn output_flag_writes_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("tor_out.json");
    let out = kuenneth(&[
        "tor", "--ring", "ku", "--max-degree", "8",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let contents = std::fs::read_to_string(&path).unwrap();
    let table: TorTable = serde_json::from_str(&contents).unwrap();
    assert_eq!(table.classes.len(), 4);
}
