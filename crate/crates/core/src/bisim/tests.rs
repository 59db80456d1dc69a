use alloc::vec;

use super::*;
use crate::model::{Backend, Model};
use crate::qstate::{bell_state, QuantumEffect};
use crate::sos::lts::build_lts;
use crate::term::{ParOp, Term};

fn lts(t: Term) -> LabeledGraph {
    let m = Model::permissive();
    let sos = Sos::new(&m);
    build_lts(&Configuration::initial(t, &Backend::Symbolic), &sos, StepLimits::default()).unwrap().graph
}

fn a() -> Term {
    Term::act("a")
}
fn b() -> Term {
    Term::act("b")
}
fn tau() -> Term {
    Term::tau()
}

fn all_modes(l: &LabeledGraph, r: &LabeledGraph) -> [bool; 3] {
    [Equivalence::Fr, Equivalence::Branching, Equivalence::Rooted].map(|m| {
        let v = check(m, l, r).unwrap();
        if let Some(w) = &v.witness {
            validate_witness(m, l, r, w).unwrap();
        }
        v.related
    })
}

#[test]
fn strong_examples() {
    let v = fr_bisimilar(&lts(Term::plus(a(), a())), &lts(a())).unwrap();
    assert!(v.related);
    assert!(fr_bisimilar(&lts(Term::par(ParOp::Ent, a(), a())), &lts(a())).unwrap().related);
    let v = fr_bisimilar(&lts(a()), &lts(b())).unwrap();
    assert!(!v.related);
    assert_eq!(v.distinguishing.as_deref(), Some("fwd:a"));
    assert!(v.export(false).starts_with("RELATED no\nDISTINGUISH fwd:a"));
}

#[test]
fn reverse_labels_distinguish() {
    // both offer a then b, but the keys recorded differ in a two-step sum
    let left = lts(Term::seq(a(), b()));
    let right = lts(Term::par(ParOp::Static, a(), b()));
    let v = fr_bisimilar(&left, &right).unwrap();
    assert!(!v.related);
    assert!(!fr_bisimilar_naive(&left, &right).unwrap());
}

#[test]
fn branching_examples() {
    // hand relation: {(τ·a, a), (a, a), (a[1], a[1])}
    assert_eq!(all_modes(&lts(Term::seq(tau(), a())), &lts(a())), [false, true, false]);
    assert_eq!(
        all_modes(&lts(Term::seq(a(), Term::seq(tau(), b()))), &lts(Term::seq(a(), b()))),
        [false, true, true]
    );
    let choice = all_modes(&lts(Term::plus(a(), Term::seq(tau(), b()))), &lts(Term::plus(a(), b())));
    assert_eq!(choice, [false, false, false]);
    let same = lts(Term::plus(a(), b()));
    assert_eq!(all_modes(&same, &same), [true, true, true]);
}

#[test]
fn rooted_failure_is_described() {
    let v = rooted_branching_fr_bisimilar(&lts(Term::seq(tau(), a())), &lts(a())).unwrap();
    assert_eq!(v.distinguishing.as_deref(), Some("root: left fwd:tau unmatched"));
}

#[test]
fn truncated_input_is_rejected() {
    let mut g = lts(a());
    g.truncated = true;
    assert_eq!(fr_bisimilar(&g, &lts(a())), Err(BisimError::Truncated));
}

#[test]
fn naive_agrees_on_examples() {
    let terms = [
        a(),
        b(),
        Term::plus(a(), a()),
        Term::plus(a(), b()),
        Term::seq(a(), b()),
        Term::par(ParOp::Static, a(), b()),
        Term::par(ParOp::Full, a(), b()),
        Term::par(ParOp::Ent, a(), a()),
    ];
    for s in &terms {
        for t in &terms {
            let (l, r) = (lts(s.clone()), lts(t.clone()));
            assert_eq!(fr_bisimilar(&l, &r).unwrap().related, fr_bisimilar_naive(&l, &r).unwrap());
        }
    }
}

#[test]
fn classes_of_one_graph() {
    let g = lts(Term::plus(a(), b()));
    let c = bisimulation_classes(&g);
    assert_eq!(c.len(), 3);
    assert_ne!(c[1], c[2]);
}

fn concrete_model() -> Model {
    let mut m = Model::permissive();
    m.set_effect("a", QuantumEffect::measure_standard(vec![0]));
    m.set_effect("b", QuantumEffect::measure_standard(vec![0]));
    m.backend = Backend::Concrete(bell_state(1).unwrap());
    m
}

#[test]
fn configurations_compare_with_their_states() {
    let m = concrete_model();
    let sos = Sos::new(&m);
    let c = |t: Term| Configuration::initial(t, &m.backend);
    let v = config_equivalent(&c(Term::plus(a(), a())), &c(a()), &sos, Equivalence::Fr, StepLimits::default()).unwrap();
    assert!(v.verdict.related && !v.alarm);
    // same effect, different label
    let v = config_equivalent(&c(a()), &c(b()), &sos, Equivalence::Fr, StepLimits::default()).unwrap();
    assert!(!v.verdict.related && !v.alarm);
    let other = Configuration::initial(a(), &Backend::Concrete(bell_state(2).unwrap()));
    assert_eq!(
        config_equivalent(&c(a()), &other, &sos, Equivalence::Fr, StepLimits::default()),
        Err(BisimError::StateMismatch)
    );
}
