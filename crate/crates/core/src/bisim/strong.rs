//! Strong FR bisimulation: signature refinement, a pairwise fixpoint oracle and
//! distinguishing formulas read off the refinement levels.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::Union;

/// Block numbers of every state after each refinement round. The last level is
/// stable. Level 0 splits on the termination flag and the caller's colors.
pub(crate) fn refine(u: &Union) -> Vec<Vec<u32>> {
    let mut levels = Vec::new();
    let mut ids: BTreeMap<(bool, u64), u32> = BTreeMap::new();
    let first: Vec<u32> = (0..u.n)
        .map(|s| {
            let next = ids.len() as u32;
            *ids.entry((u.terminal[s], u.colors[s])).or_insert(next)
        })
        .collect();
    let mut count = ids.len();
    levels.push(first);
    loop {
        let prev = levels.last().unwrap();
        let mut sigs: BTreeMap<(u32, Vec<(bool, u32, u32)>), u32> = BTreeMap::new();
        let mut next = Vec::with_capacity(u.n);
        for s in 0..u.n {
            let mut sig: Vec<(bool, u32, u32)> = u.fwd[s]
                .iter()
                .map(|&(l, t)| (true, l, prev[t]))
                .chain(u.rev[s].iter().map(|&(l, t)| (false, l, prev[t])))
                .collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = sigs.len() as u32;
            next.push(*sigs.entry((prev[s], sig)).or_insert(fresh));
        }
        let new_count = sigs.len();
        levels.push(next);
        if new_count == count {
            break;
        }
        count = new_count;
    }
    levels
}

/// The greatest FR bisimulation between the two halves of the union, computed
/// pair by pair. Entry `[s][t]` relates state `s` of the left graph to state
/// `t` of the right graph.
pub(crate) fn naive(u: &Union) -> Vec<Vec<bool>> {
    let n1 = u.n1;
    let n2 = u.n - n1;
    let mut rel: Vec<Vec<bool>> = (0..n1)
        .map(|s| (0..n2).map(|t| u.terminal[s] == u.terminal[n1 + t] && u.colors[s] == u.colors[n1 + t]).collect())
        .collect();
    let matches = |rel: &Vec<Vec<bool>>, edges_p: &[(u32, usize)], edges_q: &[(u32, usize)], flip: bool| {
        edges_p.iter().all(|&(l, p2)| {
            edges_q.iter().any(|&(m, q2)| {
                l == m && if flip { rel[q2][p2 - n1] } else { rel[p2][q2 - n1] }
            })
        })
    };
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n1 {
            for t in 0..n2 {
                if !rel[s][t] {
                    continue;
                }
                let q = n1 + t;
                let ok = matches(&rel, &u.fwd[s], &u.fwd[q], false)
                    && matches(&rel, &u.fwd[q], &u.fwd[s], true)
                    && matches(&rel, &u.rev[s], &u.rev[q], false)
                    && matches(&rel, &u.rev[q], &u.rev[s], true);
                if !ok {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
    }
    rel
}

/// Hennessy-Milner style observations over forward and reverse moves.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    True,
    Terminated,
    /// The quantum component has the given fingerprint class.
    State(u64),
    Not(Box<Formula>),
    Move { forward: bool, label: String, then: Box<Formula> },
    And(Vec<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::Terminated => f.write_str("P"),
            Formula::State(c) => write!(f, "rho#{c:x}"),
            Formula::Not(x) => match **x {
                Formula::And(_) => write!(f, "!({x})"),
                _ => write!(f, "!{x}"),
            },
            Formula::Move { forward, label, then } => {
                let dir = if *forward { "fwd" } else { "rev" };
                match **then {
                    Formula::True => write!(f, "{dir}:{label}"),
                    Formula::And(_) => write!(f, "{dir}:{label}.({then})"),
                    _ => write!(f, "{dir}:{label}.{then}"),
                }
            }
            Formula::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// A formula satisfied by `s` and not by `t`, for states split by `levels`.
pub(crate) fn distinguish(u: &Union, levels: &[Vec<u32>], s: usize, t: usize) -> Formula {
    let k = levels.iter().position(|lv| lv[s] != lv[t]).expect("states must be split");
    if k == 0 {
        return if u.terminal[s] != u.terminal[t] {
            if u.terminal[s] {
                Formula::Terminated
            } else {
                Formula::Not(Box::new(Formula::Terminated))
            }
        } else {
            Formula::State(u.colors[s])
        };
    }
    let prev = &levels[k - 1];
    if let Some(f) = unmatched_move(u, prev, levels, s, t) {
        return f;
    }
    let f = unmatched_move(u, prev, levels, t, s).expect("split must be witnessed by a move");
    Formula::Not(Box::new(f))
}

fn unmatched_move(u: &Union, prev: &[u32], levels: &[Vec<u32>], s: usize, t: usize) -> Option<Formula> {
    for forward in [true, false] {
        let (es, et) = if forward { (&u.fwd[s], &u.fwd[t]) } else { (&u.rev[s], &u.rev[t]) };
        for &(l, s2) in es.iter() {
            let answers: Vec<usize> = et.iter().filter(|e| e.0 == l).map(|e| e.1).collect();
            if answers.iter().any(|&t2| prev[t2] == prev[s2]) {
                continue;
            }
            let mut conj: Vec<Formula> = answers.iter().map(|&t2| distinguish(u, levels, s2, t2)).collect();
            conj.sort();
            conj.dedup();
            let then = match conj.len() {
                0 => Formula::True,
                1 => conj.pop().unwrap(),
                _ => Formula::And(conj),
            };
            return Some(Formula::Move { forward, label: u.label_text(l), then: Box::new(then) });
        }
    }
    None
}

/// Whether a state satisfies a formula; used to check the formulas produced.
pub(crate) fn satisfies(u: &Union, s: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::Terminated => u.terminal[s],
        Formula::State(c) => u.colors[s] == *c,
        Formula::Not(x) => !satisfies(u, s, x),
        Formula::And(xs) => xs.iter().all(|x| satisfies(u, s, x)),
        Formula::Move { forward, label, then } => {
            let es = if *forward { &u.fwd[s] } else { &u.rev[s] };
            es.iter().any(|&(l, t)| u.label_text(l) == *label && satisfies(u, t, then))
        }
    }
}
