//! Seeded random terms, exhaustive enumeration and random labeled graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rqpap_core::sos::LabeledGraph;
use rqpap_core::term::{name, ActionLabel, Name, ParOp, Term};

/// Index 0 is `+`, 1 is `.`, then the four parallel operators.
pub fn binary(op: usize, x: Term, y: Term) -> Term {
    match op {
        0 => Term::plus(x, y),
        1 => Term::seq(x, y),
        k => Term::par(ParOp::ALL[k - 2], x, y),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(names: &[&str]) -> Vec<Name> {
    names.iter().map(|n| name(n)).collect()
}

/// A closed fresh term of depth at most `depth`; each inner node picks
/// uniformly among atom and the six binary operators.
pub fn random_term_with(r: &mut impl Rng, depth: usize, labels: &[Name]) -> Term {
    let kind = if depth <= 1 { 0 } else { r.gen_range(0..7) };
    if kind == 0 {
        let l = labels.choose(r).expect("labels must be nonempty");
        return Term::Atom(ActionLabel::Act(l.clone()));
    }
    let x = random_term_with(r, depth - 1, labels);
    let y = random_term_with(r, depth - 1, labels);
    binary(kind - 1, x, y)
}

pub fn random_term(depth: usize, labels: &[Name], seed: u64) -> Term {
    random_term_with(&mut rng(seed), depth, labels)
}

/// Every term over `labels` with exactly `ops` binary operator nodes.
pub fn terms_with_ops(labels: &[Name], ops: usize) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![labels.iter().map(|l| Term::Atom(ActionLabel::Act(l.clone()))).collect()];
    for n in 1..=ops {
        let mut level = Vec::new();
        for op in 0..6 {
            for i in 0..n {
                for x in &by_size[i] {
                    for y in &by_size[n - 1 - i] {
                        level.push(binary(op, x.clone(), y.clone()));
                    }
                }
            }
        }
        by_size.push(level);
    }
    by_size.swap_remove(ops)
}

/// Every term with at most `max_ops` operator nodes, smallest first.
pub fn enumerate_terms(labels: &[Name], max_ops: usize) -> Vec<Term> {
    (0..=max_ops).flat_map(|n| terms_with_ops(labels, n)).collect()
}

/// A random graph with up to `max_states` states over `labels` (and `tau`),
/// where every forward edge has the matching reverse edge.
pub fn random_graph(r: &mut impl Rng, max_states: usize, labels: &[Name]) -> LabeledGraph {
    let n = r.gen_range(1..=max_states);
    let mut g = LabeledGraph::new(n, 0);
    let edges = r.gen_range(0..=2 * n);
    for k in 0..edges {
        let s = r.gen_range(0..n);
        let t = r.gen_range(0..n);
        let (fwd, rev) = if r.gen_bool(0.2) {
            (ActionLabel::Tau, ActionLabel::Tau)
        } else {
            let l = labels.choose(r).unwrap().clone();
            (ActionLabel::Act(l.clone()), ActionLabel::History(l, (k % 3) as u32 + 1))
        };
        g.forward.push((s, fwd, t));
        g.reverse.push((t, rev, s));
    }
    for s in 0..n {
        g.terminal[s] = r.gen_bool(0.2);
    }
    g
}

/// The same graph with states renumbered by `perm` (root included).
pub fn permuted(g: &LabeledGraph, r: &mut impl Rng) -> LabeledGraph {
    let mut perm: Vec<usize> = (0..g.states).collect();
    perm.shuffle(r);
    let mut h = LabeledGraph::new(g.states, perm[g.root]);
    h.forward = g.forward.iter().map(|(s, l, t)| (perm[*s], l.clone(), perm[*t])).collect();
    h.reverse = g.reverse.iter().map(|(s, l, t)| (perm[*s], l.clone(), perm[*t])).collect();
    for s in 0..g.states {
        h.terminal[perm[s]] = g.terminal[s];
    }
    h
}

/// Duplicates state `s`: the copy has the same outgoing edges, and some
/// incoming edges are redirected to it. The result is bisimilar to `g`.
pub fn split_state(g: &LabeledGraph, r: &mut impl Rng) -> LabeledGraph {
    let s = r.gen_range(0..g.states);
    let c = g.states;
    let mut h = LabeledGraph::new(g.states + 1, g.root);
    h.terminal = g.terminal.clone();
    h.terminal.push(g.terminal[s]);
    for edges in [(&g.forward, &mut h.forward), (&g.reverse, &mut h.reverse)] {
        let (src, dst) = edges;
        for (a, l, b) in src {
            let b2 = if *b == s && r.gen_bool(0.5) { c } else { *b };
            dst.push((*a, l.clone(), b2));
            if *a == s {
                dst.push((c, l.clone(), *b));
            }
        }
    }
    h
}

/// Moves one edge to a random target; usually breaks bisimilarity.
pub fn mutate(g: &LabeledGraph, r: &mut impl Rng) -> LabeledGraph {
    let mut h = g.clone();
    if h.forward.is_empty() {
        h.terminal[h.root] = !h.terminal[h.root];
    } else {
        let k = r.gen_range(0..h.forward.len());
        h.forward[k].2 = r.gen_range(0..h.states);
    }
    h
}
