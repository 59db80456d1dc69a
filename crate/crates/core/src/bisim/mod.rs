//! Deciding FR, branching FR and rooted branching FR bisimilarity of two
//! finite graphs, checking returned witnesses, and comparing configurations
//! with concrete quantum states.

mod branching;
mod strong;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::qstate::TOLERANCE;
use crate::sos::lts::build_lts;
use crate::sos::{Configuration, LabeledGraph, Lts, Sos, SosError, StepLimits};
use crate::term::ActionLabel;

pub use strong::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Fr,
    Branching,
    Rooted,
}

impl Equivalence {
    pub fn name(self) -> &'static str {
        match self {
            Equivalence::Fr => "fr",
            Equivalence::Branching => "branching",
            Equivalence::Rooted => "rooted",
        }
    }
}

/// The outcome of an equivalence check. Witness pairs are `(left state,
/// right state)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub related: bool,
    pub witness: Option<Vec<(usize, usize)>>,
    pub distinguishing: Option<String>,
}

impl Verdict {
    /// `RELATED`, `WITNESS` and `DISTINGUISH` lines.
    pub fn export(&self, with_witness: bool) -> String {
        let mut out = format!("RELATED {}\n", if self.related { "yes" } else { "no" });
        if with_witness {
            for (s, t) in self.witness.iter().flatten() {
                out.push_str(&format!("WITNESS {s} {t}\n"));
            }
        }
        if let Some(d) = &self.distinguishing {
            out.push_str(&format!("DISTINGUISH {d}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BisimError {
    Truncated,
    /// The two configurations start from different quantum states.
    StateMismatch,
    Sos(SosError),
}

impl fmt::Display for BisimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BisimError::Truncated => f.write_str("input LTS is truncated"),
            BisimError::StateMismatch => f.write_str("configurations start from different quantum states"),
            BisimError::Sos(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for BisimError {}

impl From<SosError> for BisimError {
    fn from(e: SosError) -> Self {
        BisimError::Sos(e)
    }
}

/// Disjoint union of two graphs with interned labels. Left states come first.
pub(crate) struct Union {
    pub n1: usize,
    pub n: usize,
    pub root1: usize,
    pub root2: usize,
    pub terminal: Vec<bool>,
    pub colors: Vec<u64>,
    pub fwd: Vec<Vec<(u32, usize)>>,
    pub rev: Vec<Vec<(u32, usize)>>,
    pub labels: Vec<ActionLabel>,
    pub tau: Option<u32>,
}

impl Union {
    fn new(graphs: [(&LabeledGraph, Option<&[u64]>); 2]) -> Self {
        let mut ids: BTreeMap<ActionLabel, u32> = BTreeMap::new();
        let mut labels = Vec::new();
        let mut intern = |l: &ActionLabel| -> u32 {
            *ids.entry(l.clone()).or_insert_with(|| {
                labels.push(l.clone());
                labels.len() as u32 - 1
            })
        };
        let n1 = graphs[0].0.states;
        let n = n1 + graphs[1].0.states;
        let mut u = Union {
            n1,
            n,
            root1: graphs[0].0.root,
            root2: n1 + graphs[1].0.root,
            terminal: Vec::with_capacity(n),
            colors: Vec::with_capacity(n),
            fwd: alloc::vec![Vec::new(); n],
            rev: alloc::vec![Vec::new(); n],
            labels: Vec::new(),
            tau: None,
        };
        for (i, (g, colors)) in graphs.iter().enumerate() {
            let off = if i == 0 { 0 } else { n1 };
            u.terminal.extend_from_slice(&g.terminal);
            match colors {
                Some(c) => u.colors.extend_from_slice(c),
                None => u.colors.extend(core::iter::repeat_n(0, g.states)),
            }
            for (s, l, t) in &g.forward {
                u.fwd[off + s].push((intern(l), off + t));
            }
            for (s, l, t) in &g.reverse {
                u.rev[off + s].push((intern(l), off + t));
            }
        }
        u.tau = ids.get(&ActionLabel::Tau).copied();
        u.labels = labels;
        u
    }

    pub fn label_text(&self, l: u32) -> String {
        self.labels[l as usize].to_string()
    }
}

fn untruncated(gs: &[&LabeledGraph]) -> Result<(), BisimError> {
    if gs.iter().any(|g| g.truncated) {
        Err(BisimError::Truncated)
    } else {
        Ok(())
    }
}

/// Decides the chosen equivalence between the roots of two graphs.
pub fn check(mode: Equivalence, l1: &LabeledGraph, l2: &LabeledGraph) -> Result<Verdict, BisimError> {
    check_colored(mode, l1, None, l2, None)
}

/// As [`check`], with an extra per-state color that related states must share.
pub fn check_colored(
    mode: Equivalence,
    l1: &LabeledGraph,
    c1: Option<&[u64]>,
    l2: &LabeledGraph,
    c2: Option<&[u64]>,
) -> Result<Verdict, BisimError> {
    untruncated(&[l1, l2])?;
    let u = Union::new([(l1, c1), (l2, c2)]);
    Ok(match mode {
        Equivalence::Fr => strong_verdict(&u),
        Equivalence::Branching | Equivalence::Rooted => {
            let b = branching::Branching::compute(&u);
            let branching_ok = b.related(u.root1, u.root2);
            let root_failure = if mode == Equivalence::Rooted { root_mismatch(&u, |p, q| b.related(p, q)) } else { None };
            if branching_ok && root_failure.is_none() {
                Verdict { related: true, witness: Some(b.pairs()), distinguishing: None }
            } else {
                let why = root_failure.unwrap_or_else(|| b.explain(u.root1, u.root2));
                Verdict { related: false, witness: None, distinguishing: Some(why) }
            }
        }
    })
}

fn strong_verdict(u: &Union) -> Verdict {
    let levels = strong::refine(u);
    let last = levels.last().unwrap();
    if last[u.root1] == last[u.root2] {
        let mut witness = Vec::new();
        for s in 0..u.n1 {
            for t in u.n1..u.n {
                if last[s] == last[t] {
                    witness.push((s, t - u.n1));
                }
            }
        }
        Verdict { related: true, witness: Some(witness), distinguishing: None }
    } else {
        let f = strong::distinguish(u, &levels, u.root1, u.root2);
        debug_assert!(strong::satisfies(u, u.root1, &f) && !strong::satisfies(u, u.root2, &f));
        Verdict { related: false, witness: None, distinguishing: Some(f.to_string()) }
    }
}

/// The root clauses of rooted branching FR bisimulation, given the branching
/// relation. Returns a description of the first failure.
fn root_mismatch(u: &Union, related: impl Fn(usize, usize) -> bool) -> Option<String> {
    let (r1, r2) = (u.root1, u.root2);
    if u.terminal[r1] != u.terminal[r2] {
        let side = if u.terminal[r1] { "left" } else { "right" };
        return Some(format!("root: {side} terminates, the other root does not"));
    }
    for (forward, edges) in [(true, &u.fwd), (false, &u.rev)] {
        let dir = if forward { "fwd" } else { "rev" };
        for (p, q, side) in [(r1, r2, "left"), (r2, r1, "right")] {
            for &(l, p2) in &edges[p] {
                if !edges[q].iter().any(|&(m, q2)| m == l && related(p2, q2)) {
                    return Some(format!("root: {side} {dir}:{} unmatched", u.label_text(l)));
                }
            }
        }
    }
    None
}

pub fn fr_bisimilar(l1: &LabeledGraph, l2: &LabeledGraph) -> Result<Verdict, BisimError> {
    check(Equivalence::Fr, l1, l2)
}

pub fn branching_fr_bisimilar(l1: &LabeledGraph, l2: &LabeledGraph) -> Result<Verdict, BisimError> {
    check(Equivalence::Branching, l1, l2)
}

pub fn rooted_branching_fr_bisimilar(l1: &LabeledGraph, l2: &LabeledGraph) -> Result<Verdict, BisimError> {
    check(Equivalence::Rooted, l1, l2)
}

/// FR bisimilarity by the pairwise greatest fixpoint, independent of the
/// refinement algorithm.
pub fn fr_bisimilar_naive(l1: &LabeledGraph, l2: &LabeledGraph) -> Result<bool, BisimError> {
    untruncated(&[l1, l2])?;
    let u = Union::new([(l1, None), (l2, None)]);
    Ok(strong::naive(&u)[l1.root][l2.root])
}

/// Strong FR bisimulation classes of the states of one graph.
pub fn bisimulation_classes(g: &LabeledGraph) -> Vec<u32> {
    let empty = LabeledGraph::new(0, 0);
    let u = Union::new([(g, None), (&empty, None)]);
    strong::refine(&u).pop().unwrap()
}

/// Branching FR bisimulation classes of the states of one graph, numbered by
/// their smallest member.
pub fn branching_classes(g: &LabeledGraph) -> Vec<u32> {
    let u = Union::new([(g, None), (g, None)]);
    let b = branching::Branching::compute(&u);
    (0..g.states)
        .map(|s| (0..g.states).find(|&t| b.related(s, u.n1 + t)).unwrap_or(s) as u32)
        .collect()
}

/// Re-checks a witness clause by clause against the definition of `mode`.
pub fn validate_witness(
    mode: Equivalence,
    l1: &LabeledGraph,
    l2: &LabeledGraph,
    witness: &[(usize, usize)],
) -> Result<(), String> {
    let u = Union::new([(l1, None), (l2, None)]);
    let w: BTreeSet<(usize, usize)> = witness.iter().copied().collect();
    let n1 = u.n1;
    let rel = |a: usize, b: usize| -> bool {
        if a < n1 && b >= n1 {
            w.contains(&(a, b - n1))
        } else if b < n1 && a >= n1 {
            w.contains(&(b, a - n1))
        } else {
            false
        }
    };
    if !rel(u.root1, u.root2) {
        return Err("roots are not in the witness".into());
    }
    for &(s, t) in &w {
        if s >= l1.states || t >= l2.states {
            return Err(format!("pair ({s}, {t}) names a missing state"));
        }
    }
    let pairs: Vec<(usize, usize)> = w.iter().flat_map(|&(s, t)| [(s, n1 + t), (n1 + t, s)]).collect();
    match mode {
        Equivalence::Fr => {
            for &(p, q) in &pairs {
                if u.terminal[p] != u.terminal[q] {
                    return Err(format!("clause 5/6 fails at ({p}, {q})"));
                }
                for (edges, clause) in [(&u.fwd, "1/2"), (&u.rev, "3/4")] {
                    for &(l, p2) in &edges[p] {
                        if !edges[q].iter().any(|&(m, q2)| m == l && rel(p2, q2)) {
                            return Err(format!("clause {clause} fails at ({p}, {q}) on {}", u.label_text(l)));
                        }
                    }
                }
            }
        }
        Equivalence::Branching | Equivalence::Rooted => {
            let fclos = branching::tau_closure(&u, &u.fwd);
            let rclos = branching::tau_closure(&u, &u.rev);
            for &(p, q) in &pairs {
                for (edges, clos, c) in [(&u.fwd, &fclos, 1), (&u.rev, &rclos, 5)] {
                    for &(l, p2) in &edges[p] {
                        let ok = (Some(l) == u.tau && rel(p2, q))
                            || clos[q].iter().any(|&q0| {
                                rel(p, q0) && edges[q0].iter().any(|&(m, q2)| m == l && rel(p2, q2))
                            });
                        if !ok {
                            return Err(format!("clause {c} fails at ({p}, {q}) on {}", u.label_text(l)));
                        }
                    }
                    if u.terminal[p] && !clos[q].iter().any(|&q0| rel(p, q0) && u.terminal[q0]) {
                        return Err(format!("clause {} fails at ({p}, {q})", c + 2));
                    }
                }
            }
            if mode == Equivalence::Rooted {
                if let Some(why) = root_mismatch(&u, rel) {
                    return Err(why);
                }
            }
        }
    }
    Ok(())
}

/// Result of comparing two configurations both directly and through the
/// term-only reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigVerdict {
    pub verdict: Verdict,
    pub reduced_related: bool,
    /// Set when the direct and the reduced computations disagree.
    pub alarm: bool,
}

fn colors_of(lts: &Lts, table: &mut BTreeMap<Option<Vec<i64>>, u64>) -> Vec<u64> {
    lts.configs
        .iter()
        .map(|c| {
            let key = c.rho.as_ref().map(|r| r.fingerprint());
            let next = table.len() as u64;
            *table.entry(key).or_insert(next)
        })
        .collect()
}

fn final_states(lts: &Lts) -> BTreeSet<Option<Vec<i64>>> {
    (0..lts.graph.states)
        .filter(|&s| lts.graph.terminal[s])
        .map(|s| lts.configs[s].rho.as_ref().map(|r| r.fingerprint()))
        .collect()
}

/// Compares `⟨p, ϱ⟩` and `⟨q, ς⟩`, which must start from the same state.
///
/// The direct route relates only states with equal quantum components. The
/// reduced route checks the terms symbolically and then compares the sets of
/// quantum states reached on termination.
pub fn config_equivalent(
    c1: &Configuration,
    c2: &Configuration,
    sos: &Sos<'_>,
    mode: Equivalence,
    limits: StepLimits,
) -> Result<ConfigVerdict, BisimError> {
    match (&c1.rho, &c2.rho) {
        (Some(r), Some(s)) if !r.approx_eq(s, TOLERANCE) => return Err(BisimError::StateMismatch),
        (Some(_), None) | (None, Some(_)) => return Err(BisimError::StateMismatch),
        _ => {}
    }
    let l1 = build_lts(c1, sos, limits)?;
    let l2 = build_lts(c2, sos, limits)?;
    let mut table = BTreeMap::new();
    let k1 = colors_of(&l1, &mut table);
    let k2 = colors_of(&l2, &mut table);
    let verdict = check_colored(mode, &l1.graph, Some(&k1), &l2.graph, Some(&k2))?;

    let strip = |c: &Configuration| Configuration {
        term: c.term.clone(),
        rho: None,
        snapshots: c.snapshots.iter().map(|(k, _)| (*k, None)).collect(),
    };
    let s1 = build_lts(&strip(c1), sos, limits)?;
    let s2 = build_lts(&strip(c2), sos, limits)?;
    let symbolic = check(mode, &s1.graph, &s2.graph)?;
    let reduced_related = symbolic.related && final_states(&l1) == final_states(&l2);
    Ok(ConfigVerdict { alarm: reduced_related != verdict.related, verdict, reduced_related })
}

#[cfg(test)]
mod tests;
