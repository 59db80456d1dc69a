use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use rqpap_core::model::{Backend, Model};
use rqpap_core::parser::parse_term;
use rqpap_core::qstate::{bell_state, named_gate, QuantumEffect};
use rqpap_core::sos::{build_lts, Configuration, Sos, StepLimits};
use rqpap_core::term::{ac_canonical, name, ActionLabel, ParOp, Term};

fn symbolic() -> Model {
    let mut m = Model::new();
    for q in ["a", "b", "c"] {
        m.declare_qop(q).unwrap();
    }
    m.declare_comm("s").unwrap();
    m.declare_comm("r").unwrap();
    m.set_gamma("s", "r", "k").unwrap();
    m
}

fn concrete() -> Model {
    let mut m = symbolic();
    let gate = |g: &str, q: usize| QuantumEffect::Unitary { matrix: named_gate(g).unwrap(), targets: vec![q] };
    m.set_effect("a", gate("hadamard", 0));
    m.set_effect("b", gate("pauli_x", 1));
    m.set_effect("c", QuantumEffect::measure_standard(vec![0]));
    m.backend = Backend::Concrete(bell_state(1).unwrap());
    m
}

fn export(model: &Model, text: &str) -> String {
    let sos = Sos::new(model);
    let c = Configuration::initial(parse_term(text).unwrap(), &model.backend);
    build_lts(&c, &sos, StepLimits::default()).unwrap().graph.export()
}

#[test]
fn sequence_export_is_numbered_breadth_first() {
    let expected = "F 0 a 1\nF 1 b 2\nR 1 a[1] 0\nR 2 b[2] 1\nT 2\n";
    assert_eq!(export(&symbolic(), "a . b"), expected);
}

#[test]
fn choice_export_keeps_the_discarded_branch() {
    let expected = "F 0 a 1\nF 0 b 2\nR 1 a[1] 0\nR 2 b[1] 0\nT 1\nT 2\n";
    assert_eq!(export(&symbolic(), "a + b"), expected);
}

#[test]
fn communication_export() {
    // Only the merged step is possible; both halves share key 1.
    let expected = "F 0 k 1\nR 1 k[1] 0\nT 1\n";
    assert_eq!(export(&symbolic(), "s >< r"), expected);
}

#[test]
fn entanglement_of_different_operations_is_inert() {
    assert_eq!(export(&symbolic(), "a ## b"), "");
    assert_eq!(export(&symbolic(), "a[1] ## b[1]"), "");
}

fn fresh_term() -> impl Strategy<Value = Term> {
    let leaf = prop::sample::select(vec!["a", "b", "c", "s", "r"]).prop_map(Term::act);
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::plus(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::seq(x, y)),
            (0usize..4, inner.clone(), inner).prop_map(|(i, x, y)| Term::par(ParOp::ALL[i], x, y)),
        ]
    })
}

fn labels(t: &Term, model: &Model) -> BTreeMap<usize, Vec<(bool, ActionLabel, usize)>> {
    let sos = Sos::new(model);
    let g = build_lts(&Configuration::initial(t.clone(), &model.backend), &sos, StepLimits::default()).unwrap().graph;
    let mut out: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for (s, l, t) in g.forward {
        out.entry(s).or_default().push((true, l, t));
    }
    for (s, l, t) in g.reverse {
        out.entry(s).or_default().push((false, l, t));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn encapsulation_only_removes_transitions(t in fresh_term()) {
        let m = symbolic();
        let h: BTreeSet<_> = [name("s"), name("a")].into();
        let sos = Sos::new(&m);
        let inner = build_lts(&Configuration::initial(t.clone(), &m.backend), &sos, StepLimits::default()).unwrap();
        let outer = build_lts(&Configuration::initial(Term::encap(h.clone(), t), &m.backend), &sos, StepLimits::default()).unwrap();
        prop_assert!(outer.state_count() <= inner.state_count());
        // joint quantum steps of an entanglement merge pass through on purpose
        for c in &outer.configs {
            for st in c.forward_steps(&sos).unwrap().into_iter().filter(|st| !st.entangled) {
                prop_assert!(!st.label.base().is_some_and(|n| h.contains(n)), "{} escaped encapsulation", st.label);
            }
        }
    }

    #[test]
    fn abstraction_renames_without_changing_shape(t in fresh_term()) {
        let m = symbolic();
        let i = [name("b"), name("k")];
        let plain = labels(&t, &m);
        let hidden = labels(&Term::abstraction(i.clone(), t), &m);
        prop_assert_eq!(plain.len(), hidden.len());
        for (s, edges) in &plain {
            let mut renamed: Vec<_> = edges
                .iter()
                .map(|(f, l, t)| {
                    let l = if l.base().is_some_and(|n| i.contains(n)) { ActionLabel::Tau } else { l.clone() };
                    (*f, l, *t)
                })
                .collect();
            let mut got = hidden[s].clone();
            renamed.sort();
            got.sort();
            prop_assert_eq!(renamed, got);
        }
    }

    #[test]
    fn concrete_edges_project_onto_symbolic_edges(t in fresh_term()) {
        let (sm, cm) = (symbolic(), concrete());
        let (ss, cs) = (Sos::new(&sm), Sos::new(&cm));
        let sym = build_lts(&Configuration::initial(t.clone(), &sm.backend), &ss, StepLimits::default()).unwrap();
        let conc = build_lts(&Configuration::initial(t, &cm.backend), &cs, StepLimits { max_states: 4_000, ..StepLimits::default() }).unwrap();
        let index: BTreeMap<Term, usize> = sym.configs.iter().enumerate().map(|(i, c)| (ac_canonical(&c.term), i)).collect();
        let project = |s: usize| index.get(&ac_canonical(&conc.configs[s].term)).copied();
        let sym_edges: BTreeSet<_> = sym.graph.forward.iter().chain(&sym.graph.reverse).cloned().collect();
        for (s, l, t) in conc.graph.forward.iter().chain(&conc.graph.reverse) {
            let (ps, pt) = (project(*s), project(*t));
            prop_assert!(ps.is_some() && pt.is_some(), "concrete state outside the symbolic graph");
            prop_assert!(sym_edges.contains(&(ps.unwrap(), l.clone(), pt.unwrap())), "edge {l} has no symbolic image");
        }
        for s in 0..conc.state_count() {
            prop_assert_eq!(conc.graph.terminal[s], sym.graph.terminal[project(s).unwrap()]);
        }
    }
}

#[test]
fn encapsulation_passes_only_the_entangled_step() {
    let m = symbolic();
    let sos = Sos::new(&m);
    let t = Term::encap(BTreeSet::from([name("a")]), parse_term("(a ## a) . a").unwrap());
    let lts = build_lts(&Configuration::initial(t, &m.backend), &sos, StepLimits::default()).unwrap();
    assert_eq!(lts.graph.export(), "F 0 a 1\nR 1 a[1] 0\n");
}
