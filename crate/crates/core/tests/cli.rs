//! End-to-end runs of the `rms` binary: exit codes, human and JSON
//! output, and determinism of scripted and seeded simulations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rms"))
        .args(args)
        .env("RMS_COLOR", "0")
        .output()
        .expect("binary runs")
}

fn sample() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples/traveller.rms")
        .to_string_lossy()
        .into_owned()
}

fn script(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn tmp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn check_accepts_the_sample() {
    let out = rms(&["check", &sample()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("global G: well-formed"), "got: {text}");
    assert!(text.contains("session Main: accepted"), "got: {text}");
}

#[test]
fn check_json_round_trips() {
    let out = rms(&["check", &sample(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["outcome"], "accepted");
    assert_eq!(doc["globals"][0]["wellFormed"], true);
    assert_eq!(doc["sessions"][0]["name"], "Main");
}

#[test]
fn parse_errors_exit_2_with_a_position() {
    let bad = tmp_file("bad.rms", "global G = p -> q { a.end }\nsession X : {\n");
    let out = rms(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_files_exit_3() {
    let out = rms(&["check", "/no/such/file.rms"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn project_prints_every_participant() {
    let out = rms(&["project", &sample(), "--type", "G"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for p in ["Tr:", "Ht:", "Al:"] {
        assert!(text.contains(p), "missing {p} in: {text}");
    }
}

#[test]
fn project_on_one_participant_pins_the_type() {
    let out = rms(&["project", &sample(), "--type", "G", "--on", "Ht"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "Ht: Tr?{ qr(Str).ckpt A { Tr!{ av.end, nAv.end } } }"
    );
}

#[test]
fn project_unknown_type_exits_2() {
    let out = rms(&["project", &sample(), "--type", "H"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no global type named `H`"));
}

#[test]
fn project_undefined_projection_exits_1() {
    let bad = tmp_file(
        "clash.rms",
        "global B = p -> q { a.q -> r { x(Int).end }, b.q -> r { x(Int).end } }\n",
    );
    let out = rms(&["project", bad.to_str().unwrap(), "--type", "B"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("undefined"), "got: {}", stdout(&out));
}

#[test]
fn scripted_simulation_is_deterministic_and_complete() {
    let args = ["simulate", &sample(), "--script", &script("booking.steps")];
    let a = rms(&args.map(String::from).iter().map(String::as_str).collect::<Vec<_>>());
    let b = rms(&args.map(String::from).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout, "scripted runs must be byte-identical");
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 8, "7 steps + 1 final line: {text}");
    // Histories survive completion: both checkpoints stay available.
    assert!(text.contains("final Main: { Al |> < ["), "got: {text}");
}

#[test]
fn the_rollback_script_returns_to_completion() {
    let out = rms(&["simulate", &sample(), "--script", &script("booking-rollback.steps")]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("roll B"), "got: {text}");
    assert!(text.contains("roll A"), "got: {text}");
}

#[test]
fn disabled_directives_exit_1_with_the_enabled_set() {
    let bad = tmp_file("bad.steps", "choose Ht av\n");
    let out = rms(&["simulate", &sample(), "--script", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("`choose Ht av` is not enabled"), "stderr: {err}");
    assert!(err.contains("enabled steps:"), "stderr: {err}");
}

#[test]
fn seeded_simulation_reproduces() {
    let args = ["simulate", &sample(), "--seed", "5", "--steps", "12"];
    let a = rms(&args);
    let b = rms(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "the same seed must replay the same trace");
}

#[test]
fn simulate_json_carries_the_trace() {
    let out = rms(&[
        "simulate",
        &sample(),
        "--script",
        &script("booking.steps"),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["trace"].as_array().unwrap().len(), 7);
    // Checkpointed histories remain, so the session can still roll back.
    assert_eq!(doc["terminated"], false);
    assert_eq!(doc["final"][0]["session"], "Main");
}

#[test]
fn verify_reports_the_documented_verdicts() {
    let out = rms(&["verify", &sample(), "--depth", "14"]);
    assert_eq!(out.status.code(), Some(1), "overall is violated");
    let text = stdout(&out);
    assert!(text.contains("subject-reduction: violated"), "got: {text}");
    assert!(text.contains("session-fidelity: holds"), "got: {text}");
    assert!(text.contains("progress: holds"), "got: {text}");
    assert!(text.contains("overall: violated"), "got: {text}");
}

#[test]
fn verify_can_restrict_the_property_set() {
    let out = rms(&["verify", &sample(), "--depth", "14", "--props", "fidelity,progress"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("subject-reduction"), "got: {text}");
    assert!(text.contains("overall: holds"), "got: {text}");
}

#[test]
fn verify_json_matches_the_human_verdicts() {
    let out = rms(&["verify", &sample(), "--depth", "14", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["overall"], "violated");
    let props = doc["sessions"][0]["report"]["properties"].as_array().unwrap();
    assert_eq!(props[0]["property"], "subject-reduction");
    assert_eq!(props[0]["verdict"], "violated");
    assert_eq!(props[1]["verdict"], "holds");
    assert_eq!(props[2]["verdict"], "holds");
}

#[test]
fn unknown_properties_exit_2() {
    let out = rms(&["verify", &sample(), "--props", "liveness"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown property"));
}

#[test]
fn fmt_is_idempotent() {
    let out = rms(&["fmt", &sample()]);
    assert_eq!(out.status.code(), Some(0));
    let once = stdout(&out);
    let tmp = tmp_file("fmt.rms", &once);
    let again = rms(&["fmt", tmp.to_str().unwrap()]);
    assert_eq!(stdout(&again), once, "formatting must be a fixed point");
}

#[test]
fn fmt_write_rewrites_in_place() {
    let original = std::fs::read_to_string(sample()).unwrap();
    let tmp = tmp_file("rewrite.rms", &original);
    let out = rms(&["fmt", tmp.to_str().unwrap(), "--write"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let formatted = std::fs::read_to_string(&tmp).unwrap();
    let shown = rms(&["fmt", &sample()]);
    assert_eq!(formatted, stdout(&shown));
}
