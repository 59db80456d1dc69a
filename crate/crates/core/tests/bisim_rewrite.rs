use rqpap_core::bisim::{check, fr_bisimilar, validate_witness, Equivalence};
use rqpap_core::model::Model;
use rqpap_core::parser::{parse_term, render};
use rqpap_core::rewrite::{normalize, weight_audit, RuleId, DEFAULT_FUEL};
use rqpap_core::sos::{build_lts, Configuration, LabeledGraph, Sos, StepLimits};

fn model() -> Model {
    let mut m = Model::new();
    for q in ["a", "b", "c"] {
        m.declare_qop(q).unwrap();
    }
    m
}

fn graph(m: &Model, text: &str) -> LabeledGraph {
    let sos = Sos::new(m);
    let c = Configuration::initial(parse_term(text).unwrap(), &m.backend);
    build_lts(&c, &sos, StepLimits::default()).unwrap().graph
}

fn related(mode: Equivalence, l: &str, r: &str) -> bool {
    let m = model();
    let (g, h) = (graph(&m, l), graph(&m, r));
    let v = check(mode, &g, &h).unwrap();
    if let Some(w) = &v.witness {
        validate_witness(mode, &g, &h, w).unwrap();
    }
    v.related
}

#[test]
fn choice_is_idempotent_but_does_not_distribute_over_prefix() {
    assert!(related(Equivalence::Fr, "a + a", "a"));
    assert!(related(Equivalence::Fr, "a . (b + c)", "a . (b + c) + a . (b + c)"));
    assert!(!related(Equivalence::Fr, "a . (b + c)", "a . b + a . c"));
}

#[test]
fn reverse_steps_separate_terms_that_agree_forward() {
    // Both can do a then b, but only the left can undo a after b.
    assert!(!related(Equivalence::Fr, "a | b", "a . b + b . a"));
}

#[test]
fn silent_steps_under_branching_and_rooted_checks() {
    assert!(related(Equivalence::Branching, "a . tau . b", "a . b"));
    assert!(related(Equivalence::Rooted, "a . tau . b", "a . b"));
    assert!(related(Equivalence::Branching, "tau . a", "a"));
    assert!(!related(Equivalence::Rooted, "tau . a", "a"));
    assert!(!related(Equivalence::Fr, "a . tau . b", "a . b"));
}

#[test]
fn distinguishing_formula_is_reported() {
    let m = model();
    let v = fr_bisimilar(&graph(&m, "a . b"), &graph(&m, "a . c")).unwrap();
    assert!(!v.related);
    let f = v.distinguishing.expect("formula");
    assert!(f.contains("fwd:a"), "{f}");
}

#[test]
fn sound_rules_preserve_behavior_on_small_terms() {
    let m = model();
    for text in ["a ## a", "(a . b) ## (a . c)", "a ## b", "(a + b) ## a", "(a . b . c) ## (a . b)", "a[1] ## a[1]"] {
        let t = parse_term(text).unwrap();
        let (nf, _) = normalize(&t, &m, DEFAULT_FUEL).unwrap();
        let sos = Sos::new(&m);
        let g1 = build_lts(&Configuration::initial(t, &m.backend), &sos, StepLimits::default()).unwrap().graph;
        let g2 = build_lts(&Configuration::initial(nf.clone(), &m.backend), &sos, StepLimits::default()).unwrap().graph;
        assert!(fr_bisimilar(&g1, &g2).unwrap().related, "{text} -> {}", render(&nf));
    }
}

#[test]
fn static_parallel_does_not_distribute_over_choice() {
    // On the left every `b` synchronizes and terminates; on the right the
    // `c | b` summand lets `b` run alone.
    assert!(!related(Equivalence::Fr, "(b + c) | b", "b | b + c | b"));
}

#[test]
fn entanglement_rules_lower_the_weight() {
    let m = model();
    let (_, trace) = normalize(&parse_term("(a . b) ## (a . c)").unwrap(), &m, DEFAULT_FUEL).unwrap();
    assert_eq!(trace.steps[0].rule, RuleId::Rqe(24));
    let audit = weight_audit(&trace);
    assert!(audit.passed(), "{:?}", audit.lines);
}
