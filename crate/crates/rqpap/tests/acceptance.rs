//! One line per acceptance criterion, at the full parameters.
//!
//! Lines are written straight to standard output so they appear even when
//! the harness captures test output.

use std::io::Write;
use std::time::Duration;

use rqpap::e91::{verify_e91, E91Options};
use rqpap::sweep::{run, SweepKind, SweepReport};

fn line(n: u32, ok: bool, detail: String) -> bool {
    let verdict = if ok { "pass" } else { "fail" };
    let _ = writeln!(std::io::stdout().lock(), "criterion {n}: {verdict} ({detail})");
    ok
}

fn sweep(n: u32, kind: SweepKind, limit: Option<Duration>) -> bool {
    let r: SweepReport = run(kind, 1, None).expect("sweep runs");
    let in_time = limit.is_none_or(|l| r.elapsed < l);
    let mut detail = format!(
        "{} instances={} failures={} time={}ms",
        kind.name(),
        r.instances,
        r.failures.len(),
        r.elapsed.as_millis()
    );
    if let Some(l) = limit {
        detail.push_str(&format!(" limit={}s", l.as_secs()));
    }
    if let Some(f) = r.failures.first() {
        let first: String = f.chars().take(160).collect();
        detail.push_str(&format!("; first: {first}"));
    }
    line(n, r.passed() && in_time, detail)
}

#[test]
fn acceptance() {
    let mut results = Vec::new();

    let e = verify_e91(&E91Options::default()).expect("model builds");
    results.push(line(
        1,
        e.passed() && e.elapsed < Duration::from_secs(5),
        format!(
            "related={} classes={} time={}ms{}",
            e.verdict.related,
            e.classes,
            e.elapsed.as_millis(),
            e.verdict.distinguishing.as_ref().map(|d| format!("; {d}")).unwrap_or_default()
        ),
    ));
    results.push(sweep(2, SweepKind::Soundness, Some(Duration::from_secs(60))));
    results.push(sweep(3, SweepKind::Completeness, Some(Duration::from_secs(120))));
    results.push(sweep(4, SweepKind::Roundtrip, None));
    results.push(sweep(5, SweepKind::Oracle, Some(Duration::from_secs(60))));
    results.push(sweep(6, SweepKind::Congruence, None));
    results.push(sweep(7, SweepKind::Quantum, None));
    results.push(sweep(8, SweepKind::NormalForm, None));
    results.push(sweep(9, SweepKind::Weight, None));

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
