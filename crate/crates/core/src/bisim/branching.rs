//! Branching FR bisimulation as a greatest fixpoint over state pairs.
//!
//! Every clause is checked as stated: a move is matched after zero or more
//! `τ` moves in the same direction, the relation must hold at the state the
//! matching move starts from, and termination is matched the same way.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Union;

/// Why a pair left the relation.
#[derive(Clone, Debug)]
pub(crate) struct Reason {
    pub clause: u8,
    pub forward: bool,
    /// `None` for a termination clause.
    pub label: Option<u32>,
    pub mover: usize,
    pub target: usize,
}

pub(crate) struct Branching<'u> {
    u: &'u Union,
    fclos: Vec<Vec<usize>>,
    rclos: Vec<Vec<usize>>,
    rel: Vec<Vec<bool>>,
    removed: Vec<Vec<Option<(u32, Reason)>>>,
}

pub(crate) fn tau_closure(u: &Union, edges: &[Vec<(u32, usize)>]) -> Vec<Vec<usize>> {
    (0..u.n)
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = alloc::vec![s];
            while let Some(x) = stack.pop() {
                for &(l, y) in &edges[x] {
                    if Some(l) == u.tau && seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect()
}

impl<'u> Branching<'u> {
    /// Computes the greatest branching FR bisimulation between the halves.
    pub fn compute(u: &'u Union) -> Self {
        let n1 = u.n1;
        let n2 = u.n - n1;
        let rel = (0..n1).map(|s| (0..n2).map(|t| u.colors[s] == u.colors[n1 + t]).collect()).collect();
        let mut b = Branching {
            u,
            fclos: tau_closure(u, &u.fwd),
            rclos: tau_closure(u, &u.rev),
            rel,
            removed: alloc::vec![alloc::vec![None; n2]; n1],
        };
        let mut round = 0u32;
        loop {
            round += 1;
            let mut changed = false;
            for s in 0..n1 {
                for t in 0..n2 {
                    if !b.rel[s][t] {
                        continue;
                    }
                    let q = n1 + t;
                    let fail = b.one_way(s, q).or_else(|| b.one_way(q, s));
                    if let Some(reason) = fail {
                        b.rel[s][t] = false;
                        b.removed[s][t] = Some((round, reason));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        b
    }

    /// Relation lookup for states on opposite sides, in either order.
    pub fn related(&self, a: usize, b: usize) -> bool {
        let n1 = self.u.n1;
        match (a < n1, b < n1) {
            (true, false) => self.rel[a][b - n1],
            (false, true) => self.rel[b][a - n1],
            _ => false,
        }
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (s, row) in self.rel.iter().enumerate() {
            for (t, &r) in row.iter().enumerate() {
                if r {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// Checks the clauses where `p` moves and `q` answers; returns the first
    /// violated one.
    fn one_way(&self, p: usize, q: usize) -> Option<Reason> {
        let u = self.u;
        for (forward, edges, clos, move_clause, p_clause) in [
            (true, &u.fwd, &self.fclos, 1u8, 3u8),
            (false, &u.rev, &self.rclos, 5u8, 7u8),
        ] {
            for &(l, p2) in &edges[p] {
                let stutter = Some(l) == u.tau && self.related(p2, q);
                let matched = stutter
                    || clos[q].iter().any(|&q0| {
                        self.related(p, q0) && edges[q0].iter().any(|&(m, q2)| m == l && self.related(p2, q2))
                    });
                if !matched {
                    return Some(Reason { clause: move_clause, forward, label: Some(l), mover: p, target: p2 });
                }
            }
            if u.terminal[p] && !clos[q].iter().any(|&q0| self.related(p, q0) && u.terminal[q0]) {
                return Some(Reason { clause: p_clause, forward, label: None, mover: p, target: p });
            }
        }
        None
    }

    fn removal(&self, a: usize, b: usize) -> Option<&(u32, Reason)> {
        let n1 = self.u.n1;
        let (s, t) = if a < n1 { (a, b - n1) } else { (b, a - n1) };
        self.removed[s][t].as_ref()
    }

    /// A readable account of why `a` and `b` are not related: the chain of
    /// moves leading to a clause that cannot be met.
    pub fn explain(&self, a: usize, b: usize) -> String {
        let u = self.u;
        let mut parts: Vec<String> = Vec::new();
        let (mut p, mut q) = (a, b);
        let mut visited = BTreeSet::new();
        while let Some((round, reason)) = self.removal(p, q) {
            if !visited.insert((p, q)) || parts.len() > 16 {
                break;
            }
            let side = if reason.mover < u.n1 { "left" } else { "right" };
            let other = if reason.mover == p { q } else { p };
            let Some(l) = reason.label else {
                parts.push(format!("{side} terminates, unmatched (clause {})", reason.clause));
                break;
            };
            let dir = if reason.forward { "fwd" } else { "rev" };
            parts.push(format!("{side} {dir}:{}", u.label_text(l)));
            // follow the answer that survived longest
            let edges = if reason.forward { &u.fwd } else { &u.rev };
            let clos = if reason.forward { &self.fclos } else { &self.rclos };
            let mut best: Option<(u32, usize)> = None;
            for &o0 in &clos[other] {
                for &(m, o2) in &edges[o0] {
                    if m != l {
                        continue;
                    }
                    if let Some((r, _)) = self.removal(reason.target, o2) {
                        if *r < *round && best.is_none_or(|(br, _)| *r > br) {
                            best = Some((*r, o2));
                        }
                    }
                }
            }
            match best {
                Some((_, o2)) => {
                    p = reason.target;
                    q = o2;
                }
                None => {
                    parts.push(format!("unmatched (clause {})", reason.clause));
                    break;
                }
            }
        }
        parts.join(" . ")
    }
}
