//! Process terms with in-place action histories.
//!
//! An executed action `a` is recorded where it stood as the history `a[m]`, so a
//! term carries its own execution record and reverse steps can find what to undo.
//! Alternative composition is an n-ary multiset node; associativity and
//! commutativity of `+` are therefore structural (see [`ac_canonical`]).

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

/// Action and variable identifiers.
pub type Name = Arc<str>;

/// A history key, the `m` of `a[m]`. Always at least 1.
pub type HistoryKey = u32;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Atomic labels: fresh actions, their histories and the special constants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    /// A named quantum operation or communication action, not yet executed.
    Act(Name),
    /// `base[key]`: the action `base` executed with history key `key`.
    History(Name, HistoryKey),
    Tau,
    Delta,
    /// The empty, successfully terminated process left behind by a silent step.
    Skip,
}

impl ActionLabel {
    pub fn act(s: &str) -> Self {
        ActionLabel::Act(name(s))
    }

    pub fn history(s: &str, key: HistoryKey) -> Self {
        assert!(key >= 1, "history keys start at 1");
        ActionLabel::History(name(s), key)
    }

    /// The un-executed action name, for `Act` and `History`.
    pub fn base(&self) -> Option<&Name> {
        match self {
            ActionLabel::Act(n) | ActionLabel::History(n, _) => Some(n),
            _ => None,
        }
    }

    pub fn key(&self) -> Option<HistoryKey> {
        match self {
            ActionLabel::History(_, k) => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Act(n) => write!(f, "{n}"),
            ActionLabel::History(n, k) => write!(f, "{n}[{k}]"),
            ActionLabel::Tau => f.write_str("tau"),
            ActionLabel::Delta => f.write_str("delta"),
            ActionLabel::Skip => f.write_str("skip"),
        }
    }
}

/// The four binary parallel operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParOp {
    /// `x | y`
    Static,
    /// `x >< y`
    Comm,
    /// `x ## y`
    Ent,
    /// `x || y`
    Full,
}

impl ParOp {
    pub const ALL: [ParOp; 4] = [ParOp::Static, ParOp::Comm, ParOp::Ent, ParOp::Full];

    pub fn symbol(self) -> &'static str {
        match self {
            ParOp::Static => "|",
            ParOp::Comm => "><",
            ParOp::Ent => "##",
            ParOp::Full => "||",
        }
    }
}

pub type LabelSet = BTreeSet<Name>;

/// Reversible quantum process terms.
///
/// The derived order (variant tag, then fields) is the fixed total order used
/// for canonical sums.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(ActionLabel),
    /// At least two summands.
    Sum(Vec<Term>),
    Seq(Box<Term>, Box<Term>),
    Par(ParOp, Box<Term>, Box<Term>),
    /// `∂_H(t)`
    Encap(LabelSet, Box<Term>),
    /// `τ_I(t)`
    Abstract(LabelSet, Box<Term>),
    /// `⟨X|E⟩`: variable `X` bound by the attached specification.
    Rec(Name, Arc<RecSpec>),
    /// A variable occurrence inside a specification body.
    Var(Name),
}

/// A guarded linear recursion specification.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecSpec {
    pub name: Name,
    pub equations: BTreeMap<Name, Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermError {
    UnknownVariable(Name),
    /// The weight measure is only defined on the `+ . | >< ## ||` fragment.
    OutsideWeightFragment,
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::UnknownVariable(x) => write!(f, "unknown recursion variable `{x}`"),
            TermError::OutsideWeightFragment => {
                f.write_str("weight is undefined for recursion, encapsulation or abstraction")
            }
        }
    }
}

impl core::error::Error for TermError {}

impl Term {
    pub fn act(s: &str) -> Term {
        Term::Atom(ActionLabel::act(s))
    }

    pub fn hist(s: &str, key: HistoryKey) -> Term {
        Term::Atom(ActionLabel::history(s, key))
    }

    pub fn delta() -> Term {
        Term::Atom(ActionLabel::Delta)
    }

    pub fn tau() -> Term {
        Term::Atom(ActionLabel::Tau)
    }

    pub fn skip() -> Term {
        Term::Atom(ActionLabel::Skip)
    }

    pub fn seq(x: Term, y: Term) -> Term {
        Term::Seq(Box::new(x), Box::new(y))
    }

    pub fn par(op: ParOp, x: Term, y: Term) -> Term {
        Term::Par(op, Box::new(x), Box::new(y))
    }

    /// Builds a sum, flattening nested sums and collapsing a single summand.
    pub fn sum<I: IntoIterator<Item = Term>>(items: I) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Sum(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Term::delta(),
            1 => out.pop().unwrap(),
            _ => Term::Sum(out),
        }
    }

    pub fn plus(x: Term, y: Term) -> Term {
        Term::sum([x, y])
    }

    pub fn encap<I: IntoIterator<Item = Name>>(h: I, t: Term) -> Term {
        Term::Encap(h.into_iter().collect(), Box::new(t))
    }

    pub fn abstraction<I: IntoIterator<Item = Name>>(i: I, t: Term) -> Term {
        Term::Abstract(i.into_iter().collect(), Box::new(t))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Term::Atom(_))
    }

    /// Immediate subterms in left-to-right order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Atom(_) | Term::Rec(..) | Term::Var(_) => Vec::new(),
            Term::Sum(v) => v.iter().collect(),
            Term::Seq(x, y) | Term::Par(_, x, y) => alloc::vec![&**x, &**y],
            Term::Encap(_, x) | Term::Abstract(_, x) => alloc::vec![&**x],
        }
    }

    /// Number of operator nodes (atoms and variables count zero).
    pub fn operator_count(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Rec(..) | Term::Var(_) => 0,
            Term::Sum(v) => v.len() - 1 + v.iter().map(Term::operator_count).sum::<usize>(),
            _ => 1 + self.children().into_iter().map(Term::operator_count).sum::<usize>(),
        }
    }

    /// Whether any parallel operator of the given kind occurs.
    pub fn contains_par(&self, op: ParOp) -> bool {
        match self {
            Term::Par(o, x, y) => *o == op || x.contains_par(op) || y.contains_par(op),
            _ => self.children().into_iter().any(|c| c.contains_par(op)),
        }
    }

    /// Every named action occurring in the term (fresh or as a history base).
    pub fn action_names(&self, out: &mut LabelSet) {
        match self {
            Term::Atom(l) => {
                if let Some(n) = l.base() {
                    out.insert(n.clone());
                }
            }
            Term::Rec(x, spec) => spec.action_names_from(x, out),
            _ => {
                for c in self.children() {
                    c.action_names(out);
                }
            }
        }
    }
}

impl RecSpec {
    pub fn new(spec_name: &str) -> Self {
        RecSpec { name: name(spec_name), equations: BTreeMap::new() }
    }

    pub fn with(mut self, var: &str, body: Term) -> Self {
        self.equations.insert(name(var), body);
        self
    }

    /// Names of variables referenced but not defined.
    pub fn unbound_variables(&self) -> LabelSet {
        let mut vars = LabelSet::new();
        for body in self.equations.values() {
            collect_vars(body, &mut vars);
        }
        vars.retain(|v| !self.equations.contains_key(v));
        vars
    }

    /// Action names reachable from the equation of `var`.
    pub fn action_names_from(&self, var: &Name, out: &mut LabelSet) {
        let mut seen = LabelSet::new();
        let mut stack = alloc::vec![var.clone()];
        while let Some(v) = stack.pop() {
            if !seen.insert(v.clone()) {
                continue;
            }
            if let Some(body) = self.equations.get(&v) {
                body.action_names(out);
                let mut vars = LabelSet::new();
                collect_vars(body, &mut vars);
                stack.extend(vars);
            }
        }
    }
}

fn collect_vars(t: &Term, out: &mut LabelSet) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        _ => {
            for c in t.children() {
                collect_vars(c, out);
            }
        }
    }
}

/// Canonical representative modulo associativity and commutativity of `+`.
///
/// Nested sums are flattened and summands sorted; duplicates are kept.
pub fn ac_canonical(t: &Term) -> Term {
    match t {
        Term::Atom(_) | Term::Var(_) | Term::Rec(..) => t.clone(),
        Term::Sum(items) => {
            let mut flat = Vec::with_capacity(items.len());
            for item in items {
                match ac_canonical(item) {
                    Term::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            flat.sort();
            Term::Sum(flat)
        }
        Term::Seq(x, y) => Term::seq(ac_canonical(x), ac_canonical(y)),
        Term::Par(op, x, y) => Term::par(*op, ac_canonical(x), ac_canonical(y)),
        Term::Encap(h, x) => Term::Encap(h.clone(), Box::new(ac_canonical(x))),
        Term::Abstract(i, x) => Term::Abstract(i.clone(), Box::new(ac_canonical(x))),
    }
}

pub fn ac_equal(s: &Term, t: &Term) -> bool {
    s == t || ac_canonical(s) == ac_canonical(t)
}

/// The termination measure of the completeness argument.
///
/// Atoms, histories, `δ`, `τ` and `skip` weigh 2.
pub fn weight(t: &Term) -> Result<BigUint, TermError> {
    Ok(match t {
        Term::Atom(_) => BigUint::from(2u32),
        Term::Sum(items) => {
            let mut total = BigUint::from(0u32);
            for item in items {
                total += weight(item)?;
            }
            total
        }
        Term::Seq(x, y) => {
            let (wx, wy) = (weight(x)?, weight(y)?);
            wx.pow(3) * wy.pow(3)
        }
        Term::Par(op, x, y) => {
            let (wx, wy) = (weight(x)?, weight(y)?);
            let prod = wx.pow(2) * wy.pow(2);
            match op {
                ParOp::Full => prod * 3u32 + 1u32,
                _ => prod,
            }
        }
        Term::Encap(..) | Term::Abstract(..) | Term::Rec(..) | Term::Var(_) => {
            return Err(TermError::OutsideWeightFragment)
        }
    })
}

/// All history keys occurring in the term.
pub fn histories(t: &Term) -> BTreeSet<HistoryKey> {
    let mut out = BTreeSet::new();
    collect_histories(t, &mut out);
    out
}

fn collect_histories(t: &Term, out: &mut BTreeSet<HistoryKey>) {
    match t {
        Term::Atom(ActionLabel::History(_, k)) => {
            out.insert(*k);
        }
        _ => {
            for c in t.children() {
                collect_histories(c, out);
            }
        }
    }
}

/// Applies `f` to every history key.
pub fn rename_keys(t: &Term, f: &impl Fn(HistoryKey) -> HistoryKey) -> Term {
    match t {
        Term::Atom(ActionLabel::History(a, k)) => Term::Atom(ActionLabel::History(a.clone(), f(*k))),
        Term::Atom(_) | Term::Var(_) | Term::Rec(..) => t.clone(),
        Term::Sum(items) => Term::Sum(items.iter().map(|i| rename_keys(i, f)).collect()),
        Term::Seq(x, y) => Term::seq(rename_keys(x, f), rename_keys(y, f)),
        Term::Par(op, x, y) => Term::par(*op, rename_keys(x, f), rename_keys(y, f)),
        Term::Encap(h, x) => Term::Encap(h.clone(), Box::new(rename_keys(x, f))),
        Term::Abstract(i, x) => Term::Abstract(i.clone(), Box::new(rename_keys(x, f))),
    }
}

/// True iff no action of the term has been executed.
pub fn is_fresh(t: &Term) -> bool {
    match t {
        Term::Atom(l) => !matches!(l, ActionLabel::History(..)),
        Term::Rec(..) | Term::Var(_) => true,
        _ => t.children().into_iter().all(is_fresh),
    }
}

/// One-level unfolding of `⟨x|spec⟩`.
pub fn unfold(x: &Name, spec: &Arc<RecSpec>) -> Result<Term, TermError> {
    let body = spec.equations.get(x).ok_or_else(|| TermError::UnknownVariable(x.clone()))?;
    Ok(bind_vars(body, spec))
}

fn bind_vars(t: &Term, spec: &Arc<RecSpec>) -> Term {
    match t {
        Term::Var(v) => Term::Rec(v.clone(), spec.clone()),
        Term::Atom(_) | Term::Rec(..) => t.clone(),
        Term::Sum(items) => Term::Sum(items.iter().map(|i| bind_vars(i, spec)).collect()),
        Term::Seq(x, y) => Term::seq(bind_vars(x, spec), bind_vars(y, spec)),
        Term::Par(op, x, y) => Term::par(*op, bind_vars(x, spec), bind_vars(y, spec)),
        Term::Encap(h, x) => Term::Encap(h.clone(), Box::new(bind_vars(x, spec))),
        Term::Abstract(i, x) => Term::Abstract(i.clone(), Box::new(bind_vars(x, spec))),
    }
}

/// Guardedness of a specification body: every variable occurrence is preceded
/// by an action other than `τ` on every path reaching it.
pub fn is_guarded(body: &Term) -> bool {
    fn check(t: &Term, guarded: bool) -> bool {
        match t {
            Term::Var(_) => guarded,
            Term::Atom(_) | Term::Rec(..) => true,
            Term::Sum(items) => items.iter().all(|i| check(i, guarded)),
            Term::Seq(x, y) => check(x, guarded) && check(y, guarded || must_act(x)),
            Term::Par(_, x, y) => check(x, guarded) && check(y, guarded),
            Term::Encap(_, x) => check(x, guarded),
            // abstraction may hide the guarding action
            Term::Abstract(_, x) => check(x, false),
        }
    }
    fn must_act(t: &Term) -> bool {
        match t {
            Term::Atom(ActionLabel::Act(_)) => true,
            Term::Atom(_) | Term::Var(_) | Term::Rec(..) => false,
            Term::Sum(items) => items.iter().all(must_act),
            Term::Seq(x, y) => must_act(x) || must_act(y),
            Term::Par(_, x, y) => must_act(x) || must_act(y),
            Term::Encap(_, x) => must_act(x),
            Term::Abstract(..) => false,
        }
    }
    check(body, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Term {
        Term::act("a")
    }
    fn b() -> Term {
        Term::act("b")
    }
    fn c() -> Term {
        Term::act("c")
    }

    #[test]
    fn canonical_sum_is_flat_and_ordered() {
        let left = Term::Sum(alloc::vec![Term::Sum(alloc::vec![a(), b()]), c()]);
        assert_eq!(ac_canonical(&left), Term::Sum(alloc::vec![a(), b(), c()]));
        assert!(ac_equal(&Term::plus(a(), b()), &Term::plus(b(), a())));
        assert!(!ac_equal(&Term::seq(a(), b()), &Term::seq(b(), a())));
        let s = Term::seq(a(), Term::Sum(alloc::vec![c(), b()]));
        assert_eq!(ac_canonical(&s), Term::seq(a(), Term::Sum(alloc::vec![b(), c()])));
    }

    #[test]
    fn duplicate_summands_survive_canonicalization() {
        // brute-force multiset comparison of a + (b + a) and (a + a) + b
        let l = Term::Sum(alloc::vec![a(), Term::Sum(alloc::vec![b(), a()])]);
        let r = Term::Sum(alloc::vec![Term::Sum(alloc::vec![a(), a()]), b()]);
        let mut ms_l = alloc::vec!["a", "b", "a"];
        let mut ms_r = alloc::vec!["a", "a", "b"];
        ms_l.sort();
        ms_r.sort();
        assert_eq!(ms_l, ms_r);
        assert!(ac_equal(&l, &r));
        assert_eq!(ac_canonical(&l), Term::Sum(alloc::vec![a(), a(), b()]));
    }

    #[test]
    fn weights_follow_the_measure() {
        assert_eq!(weight(&a()).unwrap(), BigUint::from(2u32));
        assert_eq!(weight(&Term::plus(a(), b())).unwrap(), BigUint::from(4u32));
        assert_eq!(weight(&Term::seq(a(), b())).unwrap(), BigUint::from(64u32));
        assert_eq!(weight(&Term::par(ParOp::Full, a(), b())).unwrap(), BigUint::from(49u32));
        assert_eq!(weight(&Term::par(ParOp::Ent, a(), a())).unwrap(), BigUint::from(16u32));
        let rec = Term::Rec(name("X"), Arc::new(RecSpec::new("E").with("X", a())));
        assert_eq!(weight(&rec), Err(TermError::OutsideWeightFragment));
    }

    #[test]
    fn history_sets() {
        assert!(histories(&a()).is_empty());
        let t = Term::seq(Term::hist("a", 1), b());
        assert_eq!(histories(&t).into_iter().collect::<Vec<_>>(), alloc::vec![1]);
        let t = Term::par(ParOp::Static, Term::hist("a", 1), Term::hist("b", 2));
        assert_eq!(histories(&t).into_iter().collect::<Vec<_>>(), alloc::vec![1, 2]);
        assert!(is_fresh(&Term::plus(a(), Term::seq(b(), c()))));
        assert!(!is_fresh(&Term::hist("a", 3)));
        let enc = Term::encap([name("a")], Term::seq(Term::hist("a", 1), b()));
        assert!(!is_fresh(&enc));
    }

    #[test]
    fn unfolding_binds_variables() {
        let spec = Arc::new(RecSpec::new("E").with("X", Term::seq(a(), Term::Var(name("X")))));
        let t = unfold(&name("X"), &spec).unwrap();
        assert_eq!(t, Term::seq(a(), Term::Rec(name("X"), spec.clone())));
        assert_eq!(unfold(&name("Y"), &spec), Err(TermError::UnknownVariable(name("Y"))));
    }

    #[test]
    fn guardedness() {
        assert!(is_guarded(&Term::seq(a(), Term::Var(name("X")))));
        assert!(!is_guarded(&Term::plus(Term::Var(name("X")), a())));
        assert!(!is_guarded(&Term::seq(Term::tau(), Term::Var(name("X")))));
    }
}
