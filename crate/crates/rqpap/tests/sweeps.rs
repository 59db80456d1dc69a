use rqpap::sweep::{run, SweepKind};

#[test]
fn quick_sweeps_that_hold() {
    for (kind, budget) in [
        (SweepKind::Quantum, 20),
        (SweepKind::Oracle, 60),
        (SweepKind::Congruence, 15),
        (SweepKind::Roundtrip, 2),
    ] {
        let r = run(kind, 3, Some(budget)).unwrap();
        assert!(r.instances > 0, "{}", kind.name());
        assert!(r.passed(), "{}", r.render(5));
    }
}

#[test]
fn soundness_of_merge_rules_at_small_budget() {
    let r = run(SweepKind::Soundness, 5, Some(8)).unwrap();
    let note = |rule: &str| r.notes.iter().find(|n| n.starts_with(&format!("{rule} "))).cloned().unwrap();
    for rule in ["RQC8", "RQC11", "RQC16", "RQE18", "RQE21", "RQE25", "RQE29", "RQE37"] {
        assert!(note(rule).contains("failures=0/8"), "{}", note(rule));
    }
}

#[test]
fn reports_are_deterministic_per_seed() {
    let a = run(SweepKind::Congruence, 11, Some(5)).unwrap();
    let b = run(SweepKind::Congruence, 11, Some(5)).unwrap();
    assert_eq!(a.instances, b.instances);
    assert_eq!(a.failures, b.failures);
    assert_eq!(a.notes, b.notes);
}

#[test]
fn population_sweeps_report_without_aborting() {
    for kind in [SweepKind::Completeness, SweepKind::NormalForm, SweepKind::Weight] {
        let r = run(kind, 1, Some(1)).unwrap();
        assert!(r.instances > 0);
        assert!(r.render(0).ends_with(if r.passed() { "RESULT pass\n" } else { "RESULT fail\n" }));
    }
    // The weight order does not drop on reassociating a static product.
    let r = run(SweepKind::Weight, 1, Some(2)).unwrap();
    assert!(r.failures.iter().all(|f| f.starts_with("RQP3 ")), "{:?}", &r.failures[..3.min(r.failures.len())]);
}
