use std::path::{Path, PathBuf};

use subobs::{fixtures, parse_desa, serialize_plant, DesaDocument, StateNames};
use subobs_cli::{run, EXIT_FAILS, EXIT_NO_SUPERVISOR, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn call(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("subobs").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn f1_is_not_opaque() {
    let (code, out, _) = call(&["verify-opacity", &fixture("f1.desa")]);
    assert_eq!(code, EXIT_FAILS);
    assert!(out.contains("not opaque"));
}

#[test]
fn synthesized_closed_loop_is_opaque() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.desa").display().to_string();
    let (code, _, _) = call(&["synthesize", &fixture("f1.desa"), "--closed-loop", &closed]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(call(&["verify-opacity", &closed]).0, EXIT_OK);
}

#[test]
fn unenforceable_plant_has_no_supervisor() {
    let (code, out, err) = call(&["synthesize", &fixture("unenforceable.desa")]);
    assert_eq!(code, EXIT_NO_SUPERVISOR);
    assert!(out.contains("null"));
    assert!(err.contains("no opacity-enforcing supervisor"));
    assert_eq!(call(&["synthesize", "--fast", &fixture("unenforceable.desa")]).0, EXIT_NO_SUPERVISOR);
}

#[test]
fn worked_example_supervisor_matches_fixture() {
    let expected = std::fs::read_to_string(fixture("worked_example_supervisor.desa")).unwrap();
    for fast in [false, true] {
        let mut args = vec!["synthesize"];
        if fast {
            args.push("--fast");
        }
        let path = fixture("worked_example.desa");
        args.push(&path);
        let (code, out, _) = call(&args);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, expected);
    }
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("m.desa");
    let (code, out, _) = call(&["compose", &fixture("secret_loop.desa"), "-o", &target.display().to_string()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(matches!(parse_desa(&text), Ok(DesaDocument::Product { .. })));
}

#[test]
fn refine_removes_the_requested_state() {
    let dir = tempfile::tempdir().unwrap();
    let (_, composed, _) = call(&["compose", &fixture("f1.desa")]);
    let m = write(dir.path(), "m.desa", &composed);
    assert!(composed.contains("state 2|2 marked\n"));
    let (code, out, _) = call(&["refine", &m, "--delta", "2|2"]);
    assert_eq!(code, EXIT_OK);
    assert!(!out.contains("2|2"));
    assert!(out.contains("state 0|0,1"));

    let (code, _, err) = call(&["refine", &m, "--delta", "7|7"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("7|7"));
}

#[test]
fn structural_checks() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = fixture("f1.desa");
    let sub = fixtures::f1().delete_states(&[subobs::StateId(2)].into_iter().collect());
    let sub = write(dir.path(), "sub.desa", &serialize_plant(&sub, &StateNames::default()));
    assert_eq!(call(&["check", "subautomaton", &sub, &f1]).0, EXIT_OK);
    assert_eq!(call(&["check", "subautomaton", &f1, &sub]).0, EXIT_FAILS);
    assert_eq!(call(&["check", "subobserver", &sub, &f1]).0, EXIT_OK);
    assert_eq!(call(&["check", "spa", &fixture("worked_example.desa")]).0, EXIT_OK);
    assert_eq!(call(&["check", "consistency", &fixture("secret_loop.desa")]).0, EXIT_OK);
    assert_eq!(call(&["check", "consistency", &f1, "--depth", "3"]).0, EXIT_OK);
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["observe", "/nonexistent/plant.desa"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.desa", "event a ctrl obs\ntrans 0 a 1\n");
    let (code, _, err) = call(&["synthesize", &bad]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error:"));
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn generated_plants_are_reproducible() {
    let args = ["gen-random", "--seed", "42", "--states", "6", "--events", "3"];
    let (code, first, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(call(&args).1, first);
    assert!(matches!(parse_desa(&first), Ok(DesaDocument::Plant { .. })));
    assert_ne!(call(&["gen-random", "--seed", "43", "--states", "6", "--events", "3"]).1, first);
    assert_eq!(call(&["gen-random", "--seed", "1", "--states", "3", "--density", "2"]).0, EXIT_USAGE);
}

#[test]
fn fuzz_finds_no_mismatches() {
    let (code, out, err) = call(&["fuzz", "--runs", "300", "--seed", "9"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out, "300 runs, 0 mismatches\n");
}

#[test]
fn bench_emits_csv() {
    let (code, out, err) =
        call(&["bench", "--min-states", "20", "--max-states", "80", "--steps", "3", "--trials", "1"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "plant_states,product_states,refine_s,naive_s,synthesize_s");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
    assert!(err.contains("R^2"));
}

#[test]
fn observer_output_is_a_plant_document() {
    let (code, out, _) = call(&["observe", &fixture("secret_loop.desa")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("{8,9}"), "{out}");
}
