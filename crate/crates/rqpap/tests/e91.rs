use std::collections::{BTreeSet, VecDeque};

use rqpap::e91::{build_e91, measured_pairs, verify_e91, E91Options, RhoCheck};
use rqpap_core::qstate::TOLERANCE;
use rqpap_core::sos::{build_forward_lts, Configuration, LabeledGraph, Sos, StepLimits};
use rqpap_core::term::ActionLabel;

fn forward_graph(o: &E91Options, which: &str) -> LabeledGraph {
    let e = build_e91(o).unwrap();
    let sos = Sos::new(e.model());
    let c = Configuration::initial(e.term(which).clone(), &e.model().backend);
    build_forward_lts(&c, &sos, StepLimits::default()).unwrap().graph
}

/// States reachable from `from` by silent steps only.
fn tau_reach(g: &LabeledGraph, from: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for (l, t) in g.forward_from(s) {
            if *l == ActionLabel::Tau && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen
}

fn can(g: &LabeledGraph, states: &BTreeSet<usize>, label: &str) -> BTreeSet<usize> {
    let l = ActionLabel::act(label);
    states.iter().flat_map(|&s| g.forward_from(s).filter(|(m, _)| **m == l).map(|(_, t)| t)).collect()
}

#[test]
fn linear_chain_collapses_to_the_external_loop() {
    let r = verify_e91(&E91Options::default()).unwrap();
    let stage = r.stages.iter().find(|s| s.name == "linear-abstracted-vs-loop").unwrap();
    assert!(stage.verdict.related);
    assert_eq!(r.rhs_states, 2);
}

#[test]
fn derivation_lists_the_nine_encapsulated_equations() {
    let e = build_e91(&E91Options::default()).unwrap();
    assert_eq!(e.derivation.iter().filter(|l| l.starts_with("encap{H}(")).count(), 9);
}

#[test]
fn alice_can_accept_a_second_token_before_bob_delivers() {
    // After Alice's `cmp` she restarts while Bob still owes `cmp . send_B`,
    // so the abstracted system offers `receive_A` twice in a row.
    let o = E91Options::default();
    let g = forward_graph(&o, "lhs");
    let after_first = can(&g, &tau_reach(&g, g.root), "receive_A");
    let settled: BTreeSet<usize> = after_first.iter().flat_map(|&s| tau_reach(&g, s)).collect();
    assert!(!can(&g, &settled, "receive_A").is_empty());
    let r = verify_e91(&o).unwrap();
    assert!(!r.verdict.related);
    assert!(!r.passed());
}

#[test]
fn concrete_run_ends_each_round_with_measured_pairs() {
    let o = E91Options { concrete: true, ..E91Options::default() };
    let r = verify_e91(&o).unwrap();
    assert_eq!(r.rho, Some(RhoCheck::Ok));
    let m = measured_pairs(1);
    assert!((m.get(0, 0).re - 0.5).abs() < TOLERANCE && (m.get(3, 3).re - 0.5).abs() < TOLERANCE);
    assert!(m.get(0, 3).norm() < TOLERANCE);
}

#[test]
fn swapped_measurements_deadlock_before_any_round() {
    let o = E91Options { concrete: true, swapped_measurements: true, ..E91Options::default() };
    let r = verify_e91(&o).unwrap();
    assert_eq!(r.rho, Some(RhoCheck::Unreached));
    assert!(!r.passed());
    let g = forward_graph(&o, "lhs");
    assert!(!g.forward.iter().any(|(_, l, _)| *l == ActionLabel::act("send_B")));
}

#[test]
fn larger_instances_name_their_copies() {
    let two = E91Options { pairs: 2, tokens: 2, ..E91Options::default() };
    let e = build_e91(&two).unwrap();
    for n in ["M_qa1_Ka", "M_qb2_Kb", "receive_A1", "send_B2"] {
        assert!(e.source.contains(n), "{n}");
    }
    assert!(build_e91(&E91Options { pairs: 3, ..E91Options::default() }).is_err());
}
