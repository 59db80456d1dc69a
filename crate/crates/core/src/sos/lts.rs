//! Bounded breadth-first exploration of configurations into a labeled graph.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::{HashMap, HashSet};

use super::{Configuration, Sos, SosError};
use crate::term::{ac_canonical, ActionLabel, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepLimits {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for StepLimits {
    fn default() -> Self {
        StepLimits { max_states: 20_000, max_depth: 200 }
    }
}

/// A rooted graph with forward edges, reverse edges and a termination flag
/// per state. States are `0..states`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    pub states: usize,
    pub root: usize,
    pub forward: Vec<(usize, ActionLabel, usize)>,
    pub reverse: Vec<(usize, ActionLabel, usize)>,
    pub terminal: Vec<bool>,
    pub truncated: bool,
}

impl LabeledGraph {
    pub fn new(states: usize, root: usize) -> Self {
        LabeledGraph { states, root, terminal: alloc::vec![false; states], ..Default::default() }
    }

    pub fn forward_from(&self, s: usize) -> impl Iterator<Item = (&ActionLabel, usize)> {
        self.forward.iter().filter(move |e| e.0 == s).map(|e| (&e.1, e.2))
    }

    pub fn reverse_from(&self, s: usize) -> impl Iterator<Item = (&ActionLabel, usize)> {
        self.reverse.iter().filter(move |e| e.0 == s).map(|e| (&e.1, e.2))
    }

    /// Deterministic text form: `F`, `R` and `T` lines.
    pub fn export(&self) -> String {
        let mut fwd: Vec<_> = self.forward.iter().map(|(s, l, t)| (*s, format!("{l}"), *t)).collect();
        let mut rev: Vec<_> = self.reverse.iter().map(|(s, l, t)| (*s, format!("{l}"), *t)).collect();
        fwd.sort();
        fwd.dedup();
        rev.sort();
        rev.dedup();
        let mut out = String::new();
        for (s, l, t) in fwd {
            let _ = writeln!(out, "F {s} {l} {t}");
        }
        for (s, l, t) in rev {
            let _ = writeln!(out, "R {s} {l} {t}");
        }
        for (s, &p) in self.terminal.iter().enumerate() {
            if p {
                let _ = writeln!(out, "T {s}");
            }
        }
        out
    }
}

/// An explored graph together with the configuration behind each state.
#[derive(Clone, Debug)]
pub struct Lts {
    pub graph: LabeledGraph,
    pub configs: Vec<Configuration>,
}

impl Lts {
    pub fn state_count(&self) -> usize {
        self.graph.states
    }
}

pub fn export_lts(lts: &Lts) -> String {
    lts.graph.export()
}

type StateKey = (Term, Option<Vec<i64>>, Vec<(u32, Option<Vec<i64>>)>);

fn state_key(c: &Configuration) -> StateKey {
    (
        c.term.clone(),
        c.rho.as_ref().map(|r| r.fingerprint()),
        c.snapshots.iter().map(|(k, r)| (*k, r.as_ref().map(|r| r.fingerprint()))).collect(),
    )
}

/// Explores forward and reverse steps from `c0`.
pub fn build_lts(c0: &Configuration, sos: &Sos<'_>, limits: StepLimits) -> Result<Lts, SosError> {
    explore(c0, sos, limits, false)
}

/// Explores forward steps only, forgetting histories after each step.
pub fn build_forward_lts(c0: &Configuration, sos: &Sos<'_>, limits: StepLimits) -> Result<Lts, SosError> {
    explore(&c0.forgotten(), sos, limits, true)
}

fn explore(c0: &Configuration, sos: &Sos<'_>, limits: StepLimits, forward_only: bool) -> Result<Lts, SosError> {
    let canon = |c: Configuration| {
        let c = c.compacted();
        Configuration { term: ac_canonical(&c.term), ..c }
    };
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut configs = alloc::vec![canon(c0.clone())];
    let mut depth = alloc::vec![0usize];
    index.insert(state_key(&configs[0]), 0);
    let mut graph = LabeledGraph::new(0, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let here = configs[s].clone();
        let mut steps: Vec<(bool, ActionLabel, Configuration)> = Vec::new();
        for st in here.forward_steps(sos)? {
            let target = if forward_only { st.target.forgotten() } else { st.target };
            steps.push((true, st.label, target));
        }
        if !forward_only {
            for st in here.reverse_steps(sos)? {
                steps.push((false, st.label, st.target));
            }
        }
        if depth[s] >= limits.max_depth {
            if !steps.is_empty() {
                graph.truncated = true;
            }
            continue;
        }
        for (fwd, label, target) in steps {
            let target = canon(target);
            let key = state_key(&target);
            let t = match index.get(&key) {
                Some(&t) => t,
                None => {
                    if configs.len() >= limits.max_states {
                        graph.truncated = true;
                        continue;
                    }
                    let t = configs.len();
                    index.insert(key, t);
                    configs.push(target);
                    depth.push(depth[s] + 1);
                    queue.push_back(t);
                    t
                }
            };
            if fwd {
                graph.forward.push((s, label, t));
            } else {
                graph.reverse.push((s, label, t));
            }
        }
    }
    graph.states = configs.len();
    graph.terminal = configs.iter().map(|c| c.terminated(sos)).collect();
    dedup_edges(&mut graph.forward);
    dedup_edges(&mut graph.reverse);
    Ok(Lts { graph, configs })
}

fn dedup_edges(edges: &mut Vec<(usize, ActionLabel, usize)>) {
    let mut seen = HashSet::new();
    edges.retain(|e| seen.insert(e.clone()));
}
