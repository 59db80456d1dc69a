//! Structural operational semantics.
//!
//! [`Sos`] computes the one-step forward and reverse derivatives of a term.
//! [`config`] lifts them to configurations carrying a quantum state and
//! history snapshots, and [`lts`] explores the reachable graph.
//!
//! All four parallel operators share one engine. A component may step alone
//! with `τ`, with a communication action, or with a quantum operation the other
//! component can never perform; a quantum operation both components can
//! perform is executed jointly and stamped with one shared key. Communication
//! pairs with a defined `γ` synchronize under `∥`. The merges `≬` and `‡`
//! demand a communication (resp. joint quantum) step first; afterwards, once
//! both components share a key, they continue as `∥`.

pub mod config;
pub mod lts;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use crate::model::{LabelKind, Model, ModelError};
use crate::qstate::QuantumError;
use crate::term::{
    ac_canonical, histories, is_fresh, unfold, ActionLabel, HistoryKey, LabelSet, Name, ParOp,
    Term, TermError,
};

pub use config::{Configuration, Step};
pub use lts::{build_forward_lts, build_lts, export_lts, LabeledGraph, Lts, StepLimits};

#[derive(Clone, Debug, PartialEq)]
pub enum SosError {
    Model(ModelError),
    Term(TermError),
    Quantum(QuantumError),
    MissingEffect(Name),
    MissingSnapshot(HistoryKey),
}

impl fmt::Display for SosError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SosError::Model(e) => e.fmt(f),
            SosError::Term(e) => e.fmt(f),
            SosError::Quantum(e) => e.fmt(f),
            SosError::MissingEffect(n) => write!(f, "quantum operation `{n}` has no effect in concrete mode"),
            SosError::MissingSnapshot(k) => write!(f, "no state snapshot recorded for key {k}"),
        }
    }
}

impl core::error::Error for SosError {}

impl From<ModelError> for SosError {
    fn from(e: ModelError) -> Self {
        SosError::Model(e)
    }
}

impl From<TermError> for SosError {
    fn from(e: TermError) -> Self {
        SosError::Term(e)
    }
}

impl From<QuantumError> for SosError {
    fn from(e: QuantumError) -> Self {
        SosError::Quantum(e)
    }
}

/// A forward derivative of a term.
#[derive(Clone, Debug, PartialEq)]
pub struct TermStep {
    /// `Act(name)` or `Tau`.
    pub label: ActionLabel,
    /// Whether the step consumed the offered key. Only literal `τ` does not.
    pub keyed: bool,
    /// The quantum operation whose effect the step applies, if any.
    pub effect: Option<Name>,
    /// Joint execution of one quantum operation by two components.
    pub entangled: bool,
    pub residue: Term,
}

/// A reverse derivative of a term.
#[derive(Clone, Debug, PartialEq)]
pub struct TermRevStep {
    /// `History(name, key)`, or `Tau` when the action is hidden.
    pub label: ActionLabel,
    pub key: HistoryKey,
    pub entangled: bool,
    pub residue: Term,
}

/// Upper bound on states explored when computing reachable labels.
const REACH_LIMIT: usize = 4096;

/// The step relation for one model.
///
/// Holds a cache of the labels each term can eventually emit, used to decide
/// whether a quantum operation must synchronize.
pub struct Sos<'m> {
    model: &'m Model,
    reach: RefCell<BTreeMap<Term, Rc<LabelSet>>>,
    pending: RefCell<BTreeSet<Term>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Static,
    Full,
    GateComm,
    GateEnt,
}

fn history_atoms(t: &Term, out: &mut BTreeSet<(Name, HistoryKey)>) {
    match t {
        Term::Atom(ActionLabel::History(n, k)) => {
            out.insert((n.clone(), *k));
        }
        _ => {
            for c in t.children() {
                history_atoms(c, out);
            }
        }
    }
}

/// The key of the joint step that engaged a merge: the smallest key shared by
/// both components, under the same operation for `‡`.
fn engaging_key(op: ParOp, x: &Term, y: &Term) -> Option<HistoryKey> {
    if op == ParOp::Ent {
        let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
        history_atoms(x, &mut a);
        history_atoms(y, &mut b);
        a.intersection(&b).map(|(_, k)| *k).min()
    } else {
        histories(x).intersection(&histories(y)).next().copied()
    }
}

fn engaged(op: ParOp, x: &Term, y: &Term) -> bool {
    engaging_key(op, x, y).is_some()
}

/// A merge whose components hold histories without a joint step between them
/// is stuck in both directions.
fn inert(op: ParOp, x: &Term, y: &Term) -> bool {
    matches!(op, ParOp::Comm | ParOp::Ent) && !(is_fresh(x) && is_fresh(y)) && !engaged(op, x, y)
}

fn in_set(label: &ActionLabel, set: &LabelSet) -> bool {
    label.base().is_some_and(|n| set.contains(n))
}

impl<'m> Sos<'m> {
    pub fn new(model: &'m Model) -> Self {
        Sos { model, reach: RefCell::new(BTreeMap::new()), pending: RefCell::new(BTreeSet::new()) }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    fn kind(&self, n: &Name) -> Result<LabelKind, SosError> {
        Ok(self.model.kind(n)?)
    }

    /// All forward derivatives of `t`; keyed steps record key `m`.
    pub fn forward(&self, t: &Term, m: HistoryKey) -> Result<Vec<TermStep>, SosError> {
        let mut out = Vec::new();
        match t {
            Term::Atom(ActionLabel::Act(a)) => {
                let quantum = self.kind(a)? == LabelKind::Quantum;
                out.push(TermStep {
                    label: ActionLabel::Act(a.clone()),
                    keyed: true,
                    effect: quantum.then(|| a.clone()),
                    entangled: false,
                    residue: Term::Atom(ActionLabel::History(a.clone(), m)),
                });
            }
            Term::Atom(ActionLabel::Tau) => out.push(TermStep {
                label: ActionLabel::Tau,
                keyed: false,
                effect: None,
                entangled: false,
                residue: Term::skip(),
            }),
            Term::Atom(_) => {}
            Term::Seq(x, y) => {
                if !is_fresh(y) {
                    for s in self.forward(y, m)? {
                        out.push(TermStep { residue: Term::seq((**x).clone(), s.residue.clone()), ..s });
                    }
                } else {
                    for s in self.forward(x, m)? {
                        let residue = if !s.keyed && s.residue == Term::skip() {
                            (**y).clone()
                        } else {
                            Term::seq(s.residue.clone(), (**y).clone())
                        };
                        out.push(TermStep { residue, ..s });
                    }
                    if self.terminated(x) {
                        for s in self.forward(y, m)? {
                            out.push(TermStep { residue: Term::seq((**x).clone(), s.residue.clone()), ..s });
                        }
                    }
                }
            }
            Term::Sum(items) => {
                let committed: Vec<usize> = (0..items.len()).filter(|&i| !is_fresh(&items[i])).collect();
                let live: Vec<usize> = if committed.is_empty() { (0..items.len()).collect() } else { committed.clone() };
                for i in live {
                    for s in self.forward(&items[i], m)? {
                        let residue = if committed.is_empty() && !s.keyed {
                            s.residue.clone()
                        } else {
                            let mut v = items.clone();
                            v[i] = s.residue.clone();
                            Term::Sum(v)
                        };
                        out.push(TermStep { residue, ..s });
                    }
                }
            }
            Term::Par(op, x, y) => self.forward_par(*op, x, y, m, &mut out)?,
            Term::Encap(h, x) => {
                for s in self.forward(x, m)? {
                    if s.entangled || !in_set(&s.label, h) {
                        out.push(TermStep { residue: Term::Encap(h.clone(), alloc::boxed::Box::new(s.residue.clone())), ..s });
                    }
                }
            }
            Term::Abstract(i, x) => {
                for s in self.forward(x, m)? {
                    let label = if in_set(&s.label, i) { ActionLabel::Tau } else { s.label.clone() };
                    out.push(TermStep {
                        label,
                        residue: Term::Abstract(i.clone(), alloc::boxed::Box::new(s.residue.clone())),
                        ..s
                    });
                }
            }
            Term::Rec(x, spec) => out = self.forward(&unfold(x, spec)?, m)?,
            Term::Var(v) => return Err(TermError::UnknownVariable(v.clone()).into()),
        }
        Ok(out)
    }

    fn par_mode(&self, op: ParOp, x: &Term, y: &Term) -> Option<Mode> {
        match op {
            ParOp::Static => Some(Mode::Static),
            ParOp::Full => Some(Mode::Full),
            _ if engaged(op, x, y) => Some(Mode::Full),
            _ if is_fresh(x) && is_fresh(y) => Some(if op == ParOp::Comm { Mode::GateComm } else { Mode::GateEnt }),
            _ => None,
        }
    }

    fn may_step_alone(&self, label: &ActionLabel, other: &Term) -> Result<bool, SosError> {
        Ok(match label {
            ActionLabel::Act(n) => {
                self.kind(n)? == LabelKind::Comm || !self.reachable_labels(other)?.contains(n)
            }
            _ => true,
        })
    }

    fn forward_par(&self, op: ParOp, x: &Term, y: &Term, m: HistoryKey, out: &mut Vec<TermStep>) -> Result<(), SosError> {
        if !self.model.parallel_rules {
            return Ok(());
        }
        let Some(mode) = self.par_mode(op, x, y) else { return Ok(()) };
        let xs = self.forward(x, m)?;
        let ys = self.forward(y, m)?;
        if matches!(mode, Mode::Static | Mode::Full) {
            for s in &xs {
                if self.may_step_alone(&s.label, y)? {
                    out.push(TermStep { residue: Term::par(op, s.residue.clone(), y.clone()), ..s.clone() });
                }
            }
            for s in &ys {
                if self.may_step_alone(&s.label, x)? {
                    out.push(TermStep { residue: Term::par(op, x.clone(), s.residue.clone()), ..s.clone() });
                }
            }
        }
        for s in &xs {
            let ActionLabel::Act(a) = &s.label else { continue };
            let kind_a = self.kind(a)?;
            for t in &ys {
                let ActionLabel::Act(b) = &t.label else { continue };
                let residue = Term::par(op, s.residue.clone(), t.residue.clone());
                if kind_a == LabelKind::Quantum && a == b && mode != Mode::GateComm {
                    out.push(TermStep {
                        label: s.label.clone(),
                        keyed: true,
                        effect: Some(a.clone()),
                        entangled: true,
                        residue,
                    });
                } else if kind_a == LabelKind::Comm && matches!(mode, Mode::Full | Mode::GateComm) {
                    if self.kind(b)? != LabelKind::Comm {
                        continue;
                    }
                    if let Some(c) = self.model.gamma(a, b) {
                        out.push(TermStep {
                            label: ActionLabel::Act(c.clone()),
                            keyed: true,
                            effect: None,
                            entangled: false,
                            residue,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// All reverse derivatives of `t`.
    pub fn reverse(&self, t: &Term) -> Result<Vec<TermRevStep>, SosError> {
        let mut out = Vec::new();
        match t {
            Term::Atom(ActionLabel::History(a, k)) => out.push(TermRevStep {
                label: ActionLabel::History(a.clone(), *k),
                key: *k,
                entangled: false,
                residue: Term::Atom(ActionLabel::Act(a.clone())),
            }),
            Term::Atom(_) | Term::Rec(..) | Term::Var(_) => {}
            Term::Seq(x, y) => {
                if !is_fresh(y) {
                    for r in self.reverse(y)? {
                        out.push(TermRevStep { residue: Term::seq((**x).clone(), r.residue.clone()), ..r });
                    }
                } else {
                    for r in self.reverse(x)? {
                        out.push(TermRevStep { residue: Term::seq(r.residue.clone(), (**y).clone()), ..r });
                    }
                }
            }
            Term::Sum(items) => {
                for i in (0..items.len()).filter(|&i| !is_fresh(&items[i])) {
                    for r in self.reverse(&items[i])? {
                        let mut v = items.clone();
                        v[i] = r.residue.clone();
                        out.push(TermRevStep { residue: Term::Sum(v), ..r });
                    }
                }
            }
            Term::Par(op, x, y) => self.reverse_par(*op, x, y, &mut out)?,
            Term::Encap(h, x) => {
                for r in self.reverse(x)? {
                    if r.entangled || !in_set(&r.label, h) {
                        out.push(TermRevStep { residue: Term::Encap(h.clone(), alloc::boxed::Box::new(r.residue.clone())), ..r });
                    }
                }
            }
            Term::Abstract(i, x) => {
                for r in self.reverse(x)? {
                    let label = if in_set(&r.label, i) { ActionLabel::Tau } else { r.label.clone() };
                    out.push(TermRevStep {
                        label,
                        residue: Term::Abstract(i.clone(), alloc::boxed::Box::new(r.residue.clone())),
                        ..r
                    });
                }
            }
        }
        Ok(out)
    }

    fn reverse_par(&self, op: ParOp, x: &Term, y: &Term, out: &mut Vec<TermRevStep>) -> Result<(), SosError> {
        if inert(op, x, y) {
            return Ok(());
        }
        let (hx, hy) = (histories(x), histories(y));
        let xs = self.reverse(x)?;
        let ys = self.reverse(y)?;
        for r in &xs {
            if !hy.contains(&r.key) {
                out.push(TermRevStep { residue: Term::par(op, r.residue.clone(), y.clone()), ..r.clone() });
            }
        }
        for r in &ys {
            if !hx.contains(&r.key) {
                out.push(TermRevStep { residue: Term::par(op, x.clone(), r.residue.clone()), ..r.clone() });
            }
        }
        let first = if matches!(op, ParOp::Comm | ParOp::Ent) { engaging_key(op, x, y) } else { None };
        for r in &xs {
            for q in ys.iter().filter(|q| q.key == r.key) {
                // The step that engaged a merge precedes everything else it holds.
                if first == Some(r.key) && !(is_fresh(&r.residue) && is_fresh(&q.residue)) {
                    continue;
                }
                let residue = Term::par(op, r.residue.clone(), q.residue.clone());
                let (label, entangled) = match (&r.label, &q.label) {
                    (ActionLabel::History(a, k), ActionLabel::History(b, _)) => {
                        if a == b && self.kind(a)? == LabelKind::Quantum {
                            (ActionLabel::History(a.clone(), *k), true)
                        } else if let Some(c) = self.model.gamma(a, b) {
                            (ActionLabel::History(c.clone(), *k), false)
                        } else {
                            continue;
                        }
                    }
                    (ActionLabel::Tau, ActionLabel::Tau) => (ActionLabel::Tau, r.entangled && q.entangled),
                    _ => continue,
                };
                out.push(TermRevStep { label, key: r.key, entangled, residue });
            }
        }
        Ok(())
    }

    /// Successful termination: all work the term committed to is executed.
    pub fn terminated(&self, t: &Term) -> bool {
        match t {
            Term::Atom(l) => matches!(l, ActionLabel::History(..) | ActionLabel::Skip),
            Term::Seq(x, y) => self.terminated(x) && self.terminated(y),
            Term::Sum(items) => {
                let committed: Vec<&Term> = items.iter().filter(|i| !is_fresh(i)).collect();
                if committed.is_empty() {
                    items.iter().any(|i| self.terminated(i))
                } else {
                    committed.into_iter().any(|i| self.terminated(i))
                }
            }
            Term::Par(op, x, y) => {
                self.terminated(x)
                    && self.terminated(y)
                    && (matches!(op, ParOp::Static | ParOp::Full) || engaged(*op, x, y))
            }
            Term::Encap(_, x) | Term::Abstract(_, x) => self.terminated(x),
            Term::Rec(..) | Term::Var(_) => false,
        }
    }

    /// Labels `t` can emit on some forward path.
    pub fn reachable_labels(&self, t: &Term) -> Result<Rc<LabelSet>, SosError> {
        let key = ac_canonical(&forget(t));
        if let Some(hit) = self.reach.borrow().get(&key) {
            return Ok(hit.clone());
        }
        if self.pending.borrow().contains(&key) {
            // A term whose future contains itself as a parallel component:
            // fall back to every name it mentions.
            let mut names = LabelSet::new();
            key.action_names(&mut names);
            return Ok(Rc::new(names));
        }
        self.pending.borrow_mut().insert(key.clone());
        let result = self.explore_labels(&key);
        self.pending.borrow_mut().remove(&key);
        let labels = Rc::new(result?);
        self.reach.borrow_mut().insert(key, labels.clone());
        Ok(labels)
    }

    fn explore_labels(&self, start: &Term) -> Result<LabelSet, SosError> {
        let mut labels = LabelSet::new();
        let mut seen = BTreeSet::new();
        let mut frontier = alloc::vec![start.clone()];
        seen.insert(start.clone());
        while let Some(t) = frontier.pop() {
            if seen.len() > REACH_LIMIT {
                t.action_names(&mut labels);
                for rest in &frontier {
                    rest.action_names(&mut labels);
                }
                break;
            }
            for s in self.forward(&t, 1)? {
                if let ActionLabel::Act(n) = &s.label {
                    labels.insert(n.clone());
                }
                let next = ac_canonical(&forget(&s.residue));
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        Ok(labels)
    }
}

/// Drops the execution record of a term, keeping only its future behavior.
///
/// Histories become `skip`, finished prefixes disappear, a committed choice is
/// replaced by its chosen summand and an engaged merge becomes `∥`. The result
/// has no histories, so guarded recursion yields finitely many such terms.
pub fn forget(t: &Term) -> Term {
    match t {
        Term::Atom(ActionLabel::History(..)) => Term::skip(),
        Term::Atom(_) | Term::Rec(..) | Term::Var(_) => t.clone(),
        Term::Seq(x, y) => {
            if !is_fresh(y) {
                return forget(y);
            }
            let fx = forget(x);
            if fx == Term::skip() {
                (**y).clone()
            } else {
                Term::seq(fx, (**y).clone())
            }
        }
        Term::Sum(items) => match items.iter().find(|i| !is_fresh(i)) {
            Some(chosen) => forget(chosen),
            None => t.clone(),
        },
        Term::Par(op, x, y) if inert(*op, x, y) => Term::delta(),
        Term::Par(op, x, y) => {
            let op = if engaged(*op, x, y) { ParOp::Full } else { *op };
            let (fx, fy) = (forget(x), forget(y));
            if matches!(op, ParOp::Static | ParOp::Full) {
                if fx == Term::skip() {
                    return fy;
                }
                if fy == Term::skip() {
                    return fx;
                }
            }
            Term::par(op, fx, fy)
        }
        Term::Encap(h, x) => Term::Encap(h.clone(), alloc::boxed::Box::new(forget(x))),
        Term::Abstract(i, x) => Term::Abstract(i.clone(), alloc::boxed::Box::new(forget(x))),
    }
}
