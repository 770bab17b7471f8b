//! The command line, driven in-process through `cli::run` and, for the
//! environment variable, through the built binary.

use std::path::PathBuf;
use std::process::Command;

use boxltl::cli::{run, BUDGET_ENV, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_IO, EXIT_OK};
use boxltl::speclang::parse_machine;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("boxltl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn boxltl(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("boxltl").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

#[test]
fn parse_prints_a_reparsable_machine() {
    let r = boxltl(&["parse", &fixture("counter.ebm"), "--ltl", &fixture("counter.ltl")]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("machine Counter"));
    assert!(r.out.contains("event dec"));
}

#[test]
fn parse_errors_exit_one_with_a_location() {
    let path = scratch("broken.ebm");
    std::fs::write(&path, "machine Broken\nvariables x\ninit\n  x := \nend\n").unwrap();
    let r = boxltl(&["parse", path.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.err.contains("5:1"), "{}", r.err);
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let counter = fixture("counter.ebm");
    assert_eq!(boxltl(&["check", &counter, "[] <> n = 0"]).code, EXIT_OK);
    let fails = boxltl(&["check", &counter, "[] <> n = 2"]);
    assert_eq!(fails.code, EXIT_FAIL);
    assert!(fails.out.contains("cycle"), "{}", fails.out);
    assert_eq!(boxltl(&["--budget", "3", "check", &counter, "[] <> n = 0"]).code, EXIT_INDETERMINATE);
}

#[test]
fn check_reads_formula_files() {
    let r = boxltl(&["--format", "json", "check", &fixture("counter.ebm"), &format!("@{}", fixture("counter.ltl"))]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v.to_string().matches("holds").count(), 4, "{}", r.out);
}

#[test]
fn io_and_usage_errors_exit_two() {
    assert_eq!(boxltl(&["check", &fixture("missing.ebm"), "[] true"]).code, EXIT_IO);
    assert_eq!(boxltl(&["frobnicate"]).code, EXIT_IO);
    assert_eq!(boxltl(&["check", &fixture("counter.ebm")]).code, EXIT_IO);
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(boxltl(&["verify", bad.to_str().unwrap(), &fixture("counter.ebm")]).code, EXIT_IO);
}

#[test]
fn prove_then_verify() {
    let counter = fixture("counter.ebm");
    let proof = scratch("reach.json");
    let p = proof.to_str().unwrap();
    let r = boxltl(&["--hints", &fixture("counter.hints.json"), "prove", &counter, "[] <> (n = 0)", "-o", p]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.starts_with("[EXT]"), "{}", r.out);
    assert_eq!(boxltl(&["verify", p, &counter]).code, EXIT_OK);
    // Countdown also decreases n, so the tree carries over.
    assert_eq!(boxltl(&["verify", p, &fixture("countdown.ebm")]).code, EXIT_OK);
    // A counter that can stall at 1 breaks the variant.
    let stall = scratch("stall.ebm");
    let text = std::fs::read_to_string(&counter).unwrap();
    std::fs::write(&stall, format!("{text}\nevent stall\n  where n = 1\n  then\n    n := 1\nend\n")).unwrap();
    let rejected = boxltl(&["verify", p, stall.to_str().unwrap()]);
    assert_eq!(rejected.code, EXIT_FAIL);
    assert!(rejected.out.contains("var_c"), "{}", rejected.out);
}

#[test]
fn prove_refuses_false_goals_and_missing_variants() {
    let counter = fixture("counter.ebm");
    let refused = boxltl(&["prove", &counter, "[] <> (n = 2)"]);
    assert_eq!(refused.code, EXIT_FAIL);
    let no_hint = boxltl(&["prove", &counter, "[] <> (n = 0)"]);
    assert_eq!(no_hint.code, EXIT_FAIL);
    assert!(no_hint.err.contains("hint"), "{}", no_hint.err);
    assert_eq!(boxltl(&["--auto-refine", "prove", &counter, "[] <> (n = 0)"]).code, EXIT_OK);
}

#[test]
fn refine_writes_machine_and_sidecar() {
    let out = scratch("counter_conv.ebm");
    let r = boxltl(&[
        "refine",
        &fixture("counter.ebm"),
        "--mode",
        "conv",
        "--phi",
        "n != 0",
        "--extend",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let m = parse_machine(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(m.name, "Counter_conv");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(sidecar["checks"].as_array().is_some_and(|c| !c.is_empty()), "{sidecar}");
}

#[test]
fn refine_precondition_failure_is_reported() {
    let r = boxltl(&["refine", &fixture("two_loop.ebm"), "--mode", "conv", "--phi", "x = a", "--extend"]);
    assert_eq!(r.code, EXIT_FAIL, "{}", r.out);
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let m = fixture("two_branch.ebm");
    let a = boxltl(&["--seed", "3", "simulate", &m, "--steps", "10"]);
    let b = boxltl(&["--seed", "3", "simulate", &m, "--steps", "10"]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.out, b.out);
    let seen: std::collections::BTreeSet<String> =
        (0..16).map(|s| boxltl(&["--seed", &s.to_string(), "simulate", &m, "--steps", "4"]).out).collect();
    assert!(seen.len() > 1, "every seed took the same branch");
    let json = boxltl(&["--format", "json", "simulate", &m, "--extend", "--steps", "5"]);
    let v: serde_json::Value = serde_json::from_str(&json.out).unwrap();
    assert_eq!(v["end"], "steps");
}

#[test]
fn budget_environment_variable_sets_the_default() {
    let bin = env!("CARGO_BIN_EXE_boxltl");
    let counter = fixture("counter.ebm");
    let status = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(bin);
        c.env_remove(BUDGET_ENV);
        if let Some(v) = env {
            c.env(BUDGET_ENV, v);
        }
        c.args(extra).args(["check", counter.as_str(), "[] <> n = 0"]);
        c.output().unwrap().status.code().unwrap()
    };
    assert_eq!(status(None, &[]), EXIT_OK);
    assert_eq!(status(Some("3"), &[]), EXIT_INDETERMINATE);
    assert_eq!(status(Some("3"), &["--budget", "1000"]), EXIT_OK);
    assert_eq!(status(Some("lots"), &[]), EXIT_IO);
}
