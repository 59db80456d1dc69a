//! Closed instances of the axioms for the soundness sweep.

use rand::seq::SliceRandom;
use rand::Rng;

use rqpap_core::model::{Backend, Model};
use rqpap_core::qstate::{bell_state, named_gate, QuantumEffect};
use rqpap_core::rewrite::RuleId;
use rqpap_core::sos::Configuration;
use rqpap_core::term::{name, Name, ParOp, Term};

use crate::gen::random_term_with;

pub const QOPS: [&str; 3] = ["a", "b", "c"];

/// Quantum operations `a`, `b`, `c`; communication actions `s`, `r` with
/// `γ(s, r) = k`. The concrete variant starts from a Bell pair with `a` a
/// Hadamard on qubit 0, `b` a bit flip on qubit 1 and `c` a measurement of
/// qubit 0.
pub fn axiom_model(concrete: bool) -> Model {
    let mut m = Model::new();
    for q in QOPS {
        m.declare_qop(q).expect("fresh model");
    }
    m.set_gamma("s", "r", "k").expect("fresh model");
    if concrete {
        let gate = |g: &str, q: usize| QuantumEffect::Unitary { matrix: named_gate(g).unwrap(), targets: vec![q] };
        m.set_effect("a", gate("hadamard", 0));
        m.set_effect("b", gate("pauli_x", 1));
        m.set_effect("c", QuantumEffect::measure_standard(vec![0]));
        m.backend = Backend::Concrete(bell_state(1).expect("bell state"));
    }
    m
}

pub fn configuration(t: &Term, backend: &Backend) -> Configuration {
    Configuration::initial(t.clone(), backend)
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub rule: RuleId,
    pub lhs: Term,
    pub rhs: Term,
}

/// The rules with an axiom behind them; base rules are excluded.
pub fn axiom_rules() -> Vec<RuleId> {
    RuleId::all().into_iter().filter(|r| !r.is_base()).collect()
}

fn seq(x: Term, y: Term) -> Term {
    Term::seq(x, y)
}

fn par(op: ParOp, x: Term, y: Term) -> Term {
    Term::par(op, x, y)
}

/// Draws one instance of `rule` with variables of depth at most `depth`.
pub fn instantiate(rule: RuleId, r: &mut impl Rng, depth: usize) -> Instance {
    let labels: Vec<Name> = QOPS.iter().map(|q| name(q)).collect();
    let mut var = || {
        let d = r.gen_range(1..=depth);
        random_term_with(r, d, &labels)
    };
    let (x, y, z) = (var(), var(), var());
    let u = *QOPS.choose(r).unwrap();
    let w = *QOPS.iter().filter(|q| **q != u).collect::<Vec<_>>().choose(r).unwrap();
    // (υ, m) ≠ (ω, n): either the labels or the keys differ
    let (hw, key) = if r.gen_bool(0.5) { (u, 2) } else { (*w, 1) };
    let (cs, cr) = if r.gen_bool(0.5) { ("s", "r") } else { ("r", "s") };
    let act = Term::act;
    let hist = |l: &str, k| Term::hist(l, k);
    let (full, comm, ent, stat) = (ParOp::Full, ParOp::Comm, ParOp::Ent, ParOp::Static);
    let (lhs, rhs) = match rule {
        RuleId::Rqp(1) => (
            par(full, x.clone(), y.clone()),
            Term::sum([par(stat, x.clone(), y.clone()), par(comm, x.clone(), y.clone()), par(ent, x, y)]),
        ),
        RuleId::Rqp(2) => (par(stat, x.clone(), x.clone()), x),
        RuleId::Rqp(3) => (
            par(stat, par(stat, x.clone(), y.clone()), z.clone()),
            par(stat, x, par(stat, y, z)),
        ),
        RuleId::Rqp(4) => (
            par(stat, x.clone(), Term::plus(y.clone(), z.clone())),
            Term::plus(par(stat, x.clone(), y), par(stat, x, z)),
        ),
        RuleId::Rqp(5) => (
            par(stat, Term::plus(x.clone(), y.clone()), z.clone()),
            Term::plus(par(stat, x, z.clone()), par(stat, y, z)),
        ),
        RuleId::Rqp(6) => (
            seq(x.clone(), par(stat, y.clone(), z.clone())),
            par(stat, seq(x.clone(), y), seq(x, z)),
        ),
        RuleId::Rqp(7) => (
            seq(par(stat, x.clone(), y.clone()), z.clone()),
            par(stat, seq(x, z.clone()), seq(y, z)),
        ),
        RuleId::Rqc(n @ 8..=15) => {
            let h = n % 2 == 1;
            let atom = |l: &str| if h { hist(l, 1) } else { act(l) };
            let (nu, mu, k) = (atom(cs), atom(cr), atom("k"));
            match (n - 8) / 2 {
                0 => (par(comm, nu, mu), k),
                1 => (par(comm, nu, seq(mu, y.clone())), seq(k, y)),
                2 => (par(comm, seq(nu, x.clone()), mu), seq(k, x)),
                _ => (par(comm, seq(nu, x.clone()), seq(mu, y.clone())), seq(k, par(full, x, y))),
            }
        }
        RuleId::Rqc(16) => (
            par(comm, Term::plus(x.clone(), y.clone()), z.clone()),
            Term::plus(par(comm, x, z.clone()), par(comm, y, z)),
        ),
        RuleId::Rqc(17) => (
            par(comm, x.clone(), Term::plus(y.clone(), z.clone())),
            Term::plus(par(comm, x.clone(), y), par(comm, x, z)),
        ),
        RuleId::Rqe(n @ 18..=25) => {
            let v = if n % 2 == 1 { hist(u, 1) } else { act(u) };
            match (n - 18) / 2 {
                0 => (par(ent, v.clone(), v.clone()), v),
                1 => (par(ent, v.clone(), seq(v.clone(), y.clone())), seq(v, y)),
                2 => (par(ent, seq(v.clone(), x.clone()), v.clone()), seq(v, x)),
                _ => (par(ent, seq(v.clone(), x.clone()), seq(v.clone(), y.clone())), seq(v, par(full, x, y))),
            }
        }
        RuleId::Rqe(26) => (
            par(ent, Term::plus(x.clone(), y.clone()), z.clone()),
            Term::plus(par(ent, x, z.clone()), par(ent, y, z)),
        ),
        RuleId::Rqe(27) => (
            par(ent, x.clone(), Term::plus(y.clone(), z.clone())),
            Term::plus(par(ent, x.clone(), y), par(ent, x, z)),
        ),
        RuleId::Rqe(30) => (par(ent, Term::delta(), x), Term::delta()),
        RuleId::Rqe(31) => (par(ent, x, Term::delta()), Term::delta()),
        RuleId::Rqe(n @ 28..=37) => {
            let h = n % 2 == 1;
            let (v, o) = if h { (hist(u, 1), hist(hw, key)) } else { (act(u), act(w)) };
            let lhs = match n {
                28 | 29 => par(ent, v, o),
                32 | 33 => par(ent, v, seq(o, y)),
                34 | 35 => par(ent, seq(v, x), o),
                _ => par(ent, seq(v, x), seq(o, y)),
            };
            (lhs, Term::delta())
        }
        other => panic!("{other} has no axiom"),
    };
    Instance { rule, lhs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::rng;

    #[test]
    fn every_axiom_instantiates() {
        let mut r = rng(1);
        let rules = axiom_rules();
        assert_eq!(rules.len(), 37);
        for rule in rules {
            let i = instantiate(rule, &mut r, 2);
            assert_ne!(i.lhs, i.rhs, "{rule}");
        }
    }

    #[test]
    fn history_instances_have_snapshots() {
        let m = axiom_model(true);
        let i = instantiate(RuleId::Rqe(25), &mut rng(3), 2);
        let c = configuration(&i.lhs, &m.backend);
        assert_eq!(c.snapshots.len(), 1);
    }
}
