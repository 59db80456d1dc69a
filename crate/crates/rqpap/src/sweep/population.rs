use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use rqpap_core::bisim::{bisimulation_classes, fr_bisimilar};
use rqpap_core::model::{Backend, Model};
use rqpap_core::parser::render;
use rqpap_core::qstate::{bell_state, named_gate, QuantumEffect, TOLERANCE};
use rqpap_core::rewrite::{normalize, normalize_with, weight_audit, RewriteError, RewriteTrace, DEFAULT_FUEL};
use rqpap_core::sos::{build_lts, Configuration, LabeledGraph, Sos, StepLimits};
use rqpap_core::term::{ac_canonical, ac_equal, ParOp, Term};

use super::SweepReport;
use crate::gen::{enumerate_terms, labels, rng};
use crate::Error;

/// Every fresh term over two quantum operations `a`, `b` up to a number of
/// operator nodes, with its normal form.
pub struct Population {
    pub terms: Vec<Term>,
    pub model: Model,
    pub normals: Vec<Result<(Term, RewriteTrace), RewriteError>>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PopulationStats {
    pub terms: usize,
    pub bisim_classes: usize,
    pub normal_forms: usize,
}

fn quantum_model() -> Model {
    let mut m = Model::new();
    m.declare_qop("a").expect("fresh");
    m.declare_qop("b").expect("fresh");
    m
}

/// Cheap bisimulation invariant: the shape of the strong quotient.
fn invariant(g: &LabeledGraph) -> (usize, usize, usize, usize, Vec<String>) {
    let c = bisimulation_classes(g);
    let fwd: BTreeSet<(u32, String, u32)> = g.forward.iter().map(|(s, l, t)| (c[*s], l.to_string(), c[*t])).collect();
    let rev: BTreeSet<(u32, String, u32)> = g.reverse.iter().map(|(s, l, t)| (c[*s], l.to_string(), c[*t])).collect();
    let classes: BTreeSet<u32> = c.iter().copied().collect();
    let terminal: BTreeSet<u32> = (0..g.states).filter(|s| g.terminal[*s]).map(|s| c[s]).collect();
    let mut labels: Vec<String> = fwd.iter().map(|e| e.1.clone()).collect();
    labels.sort();
    (classes.len(), fwd.len(), rev.len(), terminal.len(), labels)
}

/// Number of pairs inside `group` that fall in different cells.
fn split_pairs(cells: &BTreeMap<usize, Vec<usize>>) -> usize {
    let total: usize = cells.values().map(Vec::len).sum();
    let same: usize = cells.values().map(|c| c.len() * c.len()).sum();
    (total * total - same) / 2
}

impl Population {
    pub fn build(max_ops: usize) -> Result<Population, Error> {
        if max_ops > 3 {
            return Err(Error::Usage("population sweeps support at most 3 operators".into()));
        }
        let terms = enumerate_terms(&labels(&["a", "b"]), max_ops);
        let model = quantum_model();
        let normals = terms.iter().map(|t| normalize(t, &model, DEFAULT_FUEL)).collect();
        Ok(Population { terms, model, normals })
    }

    fn normal(&self, i: usize) -> Option<&Term> {
        self.normals[i].as_ref().ok().map(|(n, _)| n)
    }

    /// FR bisimilarity and equality of normal forms must induce the same
    /// partition of the population.
    pub fn completeness(&self, rep: &mut SweepReport) -> Result<PopulationStats, Error> {
        let sos = Sos::new(&self.model);
        let n = self.terms.len();
        let mut graphs: Vec<Option<LabeledGraph>> = Vec::with_capacity(n);
        for t in &self.terms {
            let c = Configuration::initial(t.clone(), &self.model.backend);
            let g = build_lts(&c, &sos, StepLimits::default())?.graph;
            if g.truncated {
                rep.failures.push(format!("{}: LTS truncated", render(t)));
                graphs.push(None);
            } else {
                graphs.push(Some(g));
            }
        }
        let mut buckets: HashMap<_, Vec<(usize, usize)>> = HashMap::new();
        let mut bclass = vec![usize::MAX; n];
        let mut bcount = 0;
        for i in 0..n {
            let Some(g) = &graphs[i] else { continue };
            let bucket = buckets.entry(invariant(g)).or_default();
            let mut found = None;
            for &(r, cls) in bucket.iter() {
                if fr_bisimilar(g, graphs[r].as_ref().unwrap())?.related {
                    found = Some(cls);
                    break;
                }
            }
            bclass[i] = found.unwrap_or_else(|| {
                bucket.push((i, bcount));
                bcount += 1;
                bcount - 1
            });
        }
        let mut nf_ids: HashMap<Term, usize> = HashMap::new();
        let mut nclass = vec![usize::MAX; n];
        for i in 0..n {
            match &self.normals[i] {
                Ok((nf, _)) => {
                    let next = nf_ids.len();
                    nclass[i] = *nf_ids.entry(ac_canonical(nf)).or_insert(next);
                }
                Err(e) => rep.failures.push(format!("{}: normalization failed: {e}", render(&self.terms[i]))),
            }
        }
        let mut by_b: BTreeMap<usize, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        let mut by_n: BTreeMap<usize, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        for i in (0..n).filter(|&i| bclass[i] != usize::MAX && nclass[i] != usize::MAX) {
            rep.instances += 1;
            by_b.entry(bclass[i]).or_default().entry(nclass[i]).or_default().push(i);
            by_n.entry(nclass[i]).or_default().entry(bclass[i]).or_default().push(i);
        }
        let (mut incomplete, mut unsound) = (0, 0);
        for cells in by_b.values().filter(|c| c.len() > 1) {
            incomplete += split_pairs(cells);
            let reps: Vec<usize> = cells.values().map(|v| v[0]).collect();
            for w in reps.windows(2) {
                rep.failures.push(format!(
                    "bisimilar, normal forms differ: {}  vs  {}  (normal forms {}  vs  {})",
                    render(&self.terms[w[0]]),
                    render(&self.terms[w[1]]),
                    render(self.normal(w[0]).unwrap()),
                    render(self.normal(w[1]).unwrap())
                ));
            }
        }
        for cells in by_n.values().filter(|c| c.len() > 1) {
            unsound += split_pairs(cells);
            let reps: Vec<usize> = cells.values().map(|v| v[0]).collect();
            for w in reps.windows(2) {
                rep.failures.push(format!(
                    "equal normal forms, not bisimilar: {}  vs  {}  (normal form {})",
                    render(&self.terms[w[0]]),
                    render(&self.terms[w[1]]),
                    render(self.normal(w[0]).unwrap())
                ));
            }
        }
        let stats = PopulationStats { terms: n, bisim_classes: bcount, normal_forms: nf_ids.len() };
        rep.notes.push(format!(
            "terms={} bisimulation_classes={} normal_forms={}",
            stats.terms, stats.bisim_classes, stats.normal_forms
        ));
        rep.notes.push(format!("mismatched pairs: bisimilar but not axiom-equal={incomplete}, axiom-equal but not bisimilar={unsound}"));
        Ok(stats)
    }

    /// Undoing every forward edge restores the source configuration.
    pub fn roundtrip(&self, rep: &mut SweepReport) -> Result<(), Error> {
        let mut model = quantum_model();
        model.set_effect("a", QuantumEffect::Unitary { matrix: named_gate("hadamard").unwrap(), targets: vec![0] });
        model.set_effect("b", QuantumEffect::measure_standard(vec![1]));
        model.backend = Backend::Concrete(bell_state(1).expect("bell"));
        let sos = Sos::new(&model);
        let mut edges = 0usize;
        for t in &self.terms {
            let lts = build_lts(&Configuration::initial(t.clone(), &model.backend), &sos, StepLimits::default())?;
            if lts.graph.truncated {
                rep.failures.push(format!("{}: LTS truncated", render(t)));
                continue;
            }
            for (s, c) in lts.configs.iter().enumerate() {
                for st in c.forward_steps(&sos)? {
                    edges += 1;
                    rep.instances += 1;
                    let Some(k) = st.key else { continue };
                    let back = st.target.reverse_steps(&sos)?.into_iter().find(|r| r.key == Some(k));
                    let problem = match back {
                        None => Some("no reverse step".to_string()),
                        Some(b) => restore_problem(c, &b.target),
                    };
                    if let Some(p) = problem {
                        rep.failures.push(format!("{}: state {s} --{}--> : {p}", render(t), st.label));
                    }
                }
            }
        }
        rep.notes.push(format!("terms={} forward_edges={edges}", self.terms.len()));
        Ok(())
    }

    /// Normal forms are free of the three merge operators and do not depend
    /// on the order in which redexes are contracted.
    pub fn normal_forms(&self, rep: &mut SweepReport) {
        let mut stuck = 0;
        for (i, t) in self.terms.iter().enumerate() {
            rep.instances += 1;
            let nf = match &self.normals[i] {
                Ok((nf, _)) => nf,
                Err(e) => {
                    rep.failures.push(format!("{}: normalization failed: {e}", render(t)));
                    continue;
                }
            };
            if [ParOp::Full, ParOp::Comm, ParOp::Ent].iter().any(|op| nf.contains_par(*op)) {
                stuck += 1;
                rep.failures.push(format!("stuck: {}  ->  {}", render(t), render(nf)));
            }
            let mut r = rng(rep.seed.wrapping_add(i as u64));
            let mut choose = |k: usize| r.gen_range(0..k);
            match normalize_with(t, &self.model, DEFAULT_FUEL, Some(&mut choose)) {
                Ok((other, _)) if ac_equal(&other, nf) => {}
                Ok((other, _)) => rep.failures.push(format!(
                    "not confluent: {}  ->  {}  or  {}",
                    render(t),
                    render(nf),
                    render(&other)
                )),
                Err(e) => rep.failures.push(format!("{}: randomized normalization failed: {e}", render(t))),
            }
        }
        rep.notes.push(format!("terms={} stuck_normal_forms={stuck}", self.terms.len()));
    }

    /// Strict weight decrease per step, except for the reported-only rules.
    pub fn weights(&self, rep: &mut SweepReport) {
        let mut per_rule: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        let mut reported = 0;
        for (i, t) in self.terms.iter().enumerate() {
            let trace = match &self.normals[i] {
                Ok((_, tr)) => tr,
                Err(RewriteError::FuelExhausted(tr) | RewriteError::Cycle(tr)) => tr,
                Err(_) => continue,
            };
            let audit = weight_audit(trace);
            for line in &audit.lines {
                rep.instances += 1;
                let e = per_rule.entry(line.step.rule.to_string()).or_default();
                e.0 += 1;
                if !line.decreased {
                    e.1 += 1;
                }
            }
            reported += audit.reported().count();
            for v in audit.violations() {
                rep.failures.push(format!("{}  in  {}", v.step, render(t)));
            }
        }
        for (rule, (steps, flat)) in per_rule {
            rep.notes.push(format!("{rule} steps={steps} non_decreasing={flat}"));
        }
        rep.notes.push(format!("reported-only non-decreasing steps: {reported}"));
    }
}

fn restore_problem(before: &Configuration, after: &Configuration) -> Option<String> {
    if !ac_equal(&before.term, &after.term) {
        return Some(format!("term {} restored as {}", render(&before.term), render(&after.term)));
    }
    let keys = |c: &Configuration| c.snapshots.iter().map(|(k, _)| *k).collect::<Vec<_>>();
    if keys(before) != keys(after) {
        return Some("snapshot keys differ".into());
    }
    match (&before.rho, &after.rho) {
        (Some(x), Some(y)) if !x.approx_eq(y, TOLERANCE) => Some("state differs".into()),
        _ => None,
    }
}
