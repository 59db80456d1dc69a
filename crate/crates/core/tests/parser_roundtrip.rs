use proptest::prelude::*;

use rqpap_core::parser::{parse_term, render, ParseErrorKind};
use rqpap_core::term::{name, ParOp, Term};

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => prop::sample::select(vec!["a", "b", "c"]).prop_map(Term::act),
        2 => (prop::sample::select(vec!["a", "b"]), 1u32..5).prop_map(|(l, k)| Term::hist(l, k)),
        1 => Just(Term::delta()),
        1 => Just(Term::tau()),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::plus(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::seq(x, y)),
            (0usize..4, inner.clone(), inner.clone()).prop_map(|(i, x, y)| Term::par(ParOp::ALL[i], x, y)),
            inner.clone().prop_map(|x| Term::encap([name("a")], x)),
            inner.prop_map(|x| Term::abstraction([name("b"), name("c")], x)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn render_then_parse_is_identity(t in term()) {
        let text = render(&t);
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, t, "{}", text);
    }

    #[test]
    fn rendering_is_stable(t in term()) {
        let once = render(&t);
        prop_assert_eq!(render(&parse_term(&once).unwrap()), once);
    }
}

#[test]
fn precedence_of_sequence_over_parallel_over_choice() {
    let t = parse_term("a . b | c + d").unwrap();
    let expected = Term::plus(Term::par(ParOp::Static, Term::seq(Term::act("a"), Term::act("b")), Term::act("c")), Term::act("d"));
    assert_eq!(t, expected);
}

#[test]
fn mixing_parallel_operators_needs_parentheses() {
    let e = parse_term("a | b || c").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::MixedParallel(..)), "{e}");
    assert!(parse_term("(a | b) || c").is_ok());
}

#[test]
fn errors_carry_positions() {
    let e = parse_term("a .\n  + b").unwrap_err();
    assert_eq!(e.span.line, 2);
    assert_eq!(e.span.column, 3);
}
