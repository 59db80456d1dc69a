use std::path::PathBuf;
use std::process::Command;

fn model(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rqpap")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn rq_lines(text: &str) -> Vec<&str> {
    text.lines().filter_map(|l| l.strip_prefix("#RQ ")).collect()
}

#[test]
fn parse_echoes_terms() {
    let (code, out) = run(&["parse", &model("handshake.rqp")]);
    assert_eq!(code, 0);
    assert!(rq_lines(&out).contains(&"TERM expected tau . done"), "{out}");
    assert!(rq_lines(&out).contains(&"SPEC P 2"), "{out}");
}

#[test]
fn lts_export_and_resource_limit() {
    let (code, out) = run(&["lts", &model("axioms.rqp"), "--term", "undo_r"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("F 0 a 1\nF 1 b 2\nR 1 a[1] 0\nR 2 b[2] 1\nT 2\n"), "{out}");
    let (code, out) = run(&["lts", &model("handshake.rqp"), "--term", "system", "--max-states", "3"]);
    assert_eq!(code, 3);
    assert!(rq_lines(&out).contains(&"TRUNCATED yes"));
}

#[test]
fn bisim_verdicts_and_exit_codes() {
    let m = model("handshake.rqp");
    let (code, out) = run(&["bisim", &m, "--left", "hidden", "--right", "expected", "--mode", "rooted", "--forward-only", "--witness"]);
    assert_eq!(code, 0, "{out}");
    let lines = rq_lines(&out);
    assert_eq!(lines[0], "RELATED yes");
    assert!(lines[1..].iter().all(|l| l.starts_with("WITNESS ")));
    let (code, out) = run(&["bisim", &m, "--left", "hidden", "--right", "premature", "--mode", "rooted", "--forward-only"]);
    assert_eq!(code, 1);
    assert_eq!(rq_lines(&out), ["RELATED no", "DISTINGUISH root: right fwd:done unmatched"]);
    let (code, _) = run(&["bisim", &m, "--left", "hidden", "--right", "premature", "--mode", "branching", "--forward-only"]);
    assert_eq!(code, 0);
    // Concrete model: quantum states take part in the comparison.
    let (code, out) = run(&["bisim", &m, "--left", "system", "--right", "sequential"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn axiom_instances() {
    let m = model("axioms.rqp");
    let verdict = |l: &str, r: &str| run(&["bisim", &m, "--left", l, "--right", r]).0;
    assert_eq!(verdict("rqp1_l", "rqp1_r"), 0);
    assert_eq!(verdict("rqp4_l", "rqp4_r"), 1);
    assert_eq!(verdict("rqe24_l", "rqe24_r"), 0);
    assert_eq!(verdict("rqe28_l", "rqe28_r"), 0);
    assert_eq!(verdict("undo_l", "undo_r"), 0);
}

#[test]
fn normalize_prints_trace_and_audit() {
    let (code, out) = run(&["normalize", &model("axioms.rqp"), "--term", "rqe24_l", "--trace", "--audit"]);
    assert_eq!(code, 0, "{out}");
    let lines = rq_lines(&out);
    assert_eq!(lines[0], "RQE24 @ e : 16777216 -> 941192");
    assert!(lines.contains(&"NORMAL (a . b) | (a . c)"));
    assert!(lines.contains(&"AUDIT_REPORTED RQP6 @ e : 32768 -> 16777216"));
    assert_eq!(*lines.last().unwrap(), "AUDIT pass");

    let (_, out) = run(&["normalize", &model("axioms.rqp"), "--term", "stuck"]);
    assert_eq!(rq_lines(&out), ["NORMAL (a | b) ## a"]);
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    assert_eq!(run(&["sweep", "nonsense"]).0, 2);
    assert_eq!(run(&["bisim", "/nonexistent.rqp", "--left", "a", "--right", "b"]).0, 2);
    assert_eq!(run(&["lts", &model("axioms.rqp"), "--term", "missing"]).0, 2);
    assert_eq!(run(&["verify-e91", "--pairs", "3"]).0, 2);
    let bad = std::env::temp_dir().join("rqpap-cli-bad.rqp");
    std::fs::write(&bad, "qop a;\nterm t = a . ;\n").unwrap();
    assert_eq!(run(&["parse", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn sweep_report_format() {
    let (code, out) = run(&["sweep", "quantum", "--seed", "7", "--budget", "10"]);
    assert_eq!(code, 0);
    let lines = rq_lines(&out);
    assert_eq!(lines[0], "SWEEP quantum seed=7 budget=10 instances=14 failures=0");
    assert_eq!(*lines.last().unwrap(), "RESULT pass");
}
