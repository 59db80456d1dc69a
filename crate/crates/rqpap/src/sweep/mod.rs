//! Property sweeps. Each returns a report with pass/fail counts and every
//! counterexample as text; a failing property never aborts a run.

mod population;
mod quantum;

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;

use rqpap_core::bisim::{
    check, config_equivalent, fr_bisimilar, BisimError, fr_bisimilar_naive, validate_witness, Equivalence,
};
use rqpap_core::parser::render;
use rqpap_core::rewrite::{normalize, DEFAULT_FUEL};
use rqpap_core::sos::{build_lts, Configuration, LabeledGraph, Sos, StepLimits};
use rqpap_core::term::{Term, ac_equal};

use crate::axioms::{axiom_model, axiom_rules, configuration, instantiate, QOPS};
use crate::gen::{self, binary, labels, random_graph, rng};
use crate::Error;

pub use population::{Population, PopulationStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Soundness,
    Completeness,
    Congruence,
    Roundtrip,
    Oracle,
    NormalForm,
    Weight,
    Quantum,
}

impl SweepKind {
    pub const ALL: [SweepKind; 8] = [
        SweepKind::Soundness,
        SweepKind::Completeness,
        SweepKind::Congruence,
        SweepKind::Roundtrip,
        SweepKind::Oracle,
        SweepKind::NormalForm,
        SweepKind::Weight,
        SweepKind::Quantum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Soundness => "soundness",
            SweepKind::Completeness => "completeness",
            SweepKind::Congruence => "congruence",
            SweepKind::Roundtrip => "roundtrip",
            SweepKind::Oracle => "oracle",
            SweepKind::NormalForm => "normal-form",
            SweepKind::Weight => "weight",
            SweepKind::Quantum => "quantum",
        }
    }

    /// Instances per axiom, maximum operator count, quadruples, graph pairs
    /// or effect applications, depending on the kind.
    pub fn default_budget(self) -> usize {
        match self {
            SweepKind::Soundness => 200,
            SweepKind::Completeness | SweepKind::Roundtrip | SweepKind::NormalForm | SweepKind::Weight => 3,
            SweepKind::Congruence => 100,
            SweepKind::Oracle => 500,
            SweepKind::Quantum => 100,
        }
    }
}

impl FromStr for SweepKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SweepKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown sweep `{s}`; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub seed: u64,
    pub budget: usize,
    pub instances: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl SweepReport {
    fn new(kind: SweepKind, seed: u64, budget: usize) -> Self {
        SweepReport { kind, seed, budget, instances: 0, failures: Vec::new(), notes: Vec::new(), elapsed: Duration::ZERO }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self, max_failures: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "#RQ SWEEP {} seed={} budget={} instances={} failures={}",
            self.kind.name(),
            self.seed,
            self.budget,
            self.instances,
            self.failures.len()
        );
        for n in &self.notes {
            let _ = writeln!(s, "#RQ NOTE {n}");
        }
        for f in self.failures.iter().take(max_failures) {
            let _ = writeln!(s, "#RQ FAIL {f}");
        }
        if self.failures.len() > max_failures {
            let _ = writeln!(s, "#RQ FAIL_OMITTED {}", self.failures.len() - max_failures);
        }
        let _ = writeln!(s, "#RQ TIME_MS {}", self.elapsed.as_millis());
        let _ = writeln!(s, "#RQ RESULT {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

pub fn run(kind: SweepKind, seed: u64, budget: Option<usize>) -> Result<SweepReport, Error> {
    let start = Instant::now();
    let budget = budget.unwrap_or(kind.default_budget());
    let mut rep = SweepReport::new(kind, seed, budget);
    match kind {
        SweepKind::Soundness => soundness(&mut rep)?,
        SweepKind::Congruence => congruence(&mut rep)?,
        SweepKind::Oracle => oracle(&mut rep)?,
        SweepKind::Quantum => quantum::run(&mut rep),
        SweepKind::Completeness | SweepKind::Roundtrip | SweepKind::NormalForm | SweepKind::Weight => {
            let pop = Population::build(budget)?;
            match kind {
                SweepKind::Completeness => pop.completeness(&mut rep).map(drop)?,
                SweepKind::Roundtrip => pop.roundtrip(&mut rep)?,
                SweepKind::NormalForm => pop.normal_forms(&mut rep),
                _ => pop.weights(&mut rep),
            }
        }
    }
    rep.elapsed = start.elapsed();
    Ok(rep)
}

/// State cap for the concrete comparison of one soundness instance. Each
/// recorded history carries its own state snapshot, so concrete graphs grow
/// much faster than their symbolic shapes; instances over the cap are counted
/// as inconclusive rather than failed.
const CONCRETE_STATES: usize = 1_000;

fn soundness(rep: &mut SweepReport) -> Result<(), Error> {
    let symbolic = axiom_model(false);
    let concrete = axiom_model(true);
    let (ss, cs) = (Sos::new(&symbolic), Sos::new(&concrete));
    let capped = StepLimits { max_states: CONCRETE_STATES, ..StepLimits::default() };
    let mut inconclusive_total = 0;
    for (idx, rule) in axiom_rules().into_iter().enumerate() {
        let mut r = rng(rep.seed.wrapping_add(idx as u64));
        let (mut failed, mut inconclusive) = (0, 0);
        for _ in 0..rep.budget {
            let inst = instantiate(rule, &mut r, 3);
            rep.instances += 1;
            let g1 = build_lts(&configuration(&inst.lhs, &symbolic.backend), &ss, StepLimits::default())?.graph;
            let g2 = build_lts(&configuration(&inst.rhs, &symbolic.backend), &ss, StepLimits::default())?.graph;
            let mut problem = match fr_bisimilar(&g1, &g2) {
                Ok(v) if !v.related => Some(format!("distinguish {}", v.distinguishing.unwrap_or_default())),
                Ok(_) => None,
                Err(e) => Some(e.to_string()),
            };
            if problem.is_none() {
                let c1 = configuration(&inst.lhs, &concrete.backend);
                let c2 = configuration(&inst.rhs, &concrete.backend);
                problem = match config_equivalent(&c1, &c2, &cs, Equivalence::Fr, capped) {
                    Ok(v) if v.alarm => Some("concrete routes disagree".to_string()),
                    Ok(v) if !v.verdict.related => Some(format!(
                        "quantum states distinguish {}",
                        v.verdict.distinguishing.unwrap_or_default()
                    )),
                    Ok(_) => None,
                    Err(BisimError::Truncated) => {
                        inconclusive += 1;
                        None
                    }
                    Err(e) => Some(e.to_string()),
                };
            }
            if let Some(p) = problem {
                failed += 1;
                rep.failures.push(format!("{rule}: {}  vs  {}  ({p})", render(&inst.lhs), render(&inst.rhs)));
            }
        }
        inconclusive_total += inconclusive;
        rep.notes.push(format!("{rule} failures={failed}/{} concrete_over_cap={inconclusive}", rep.budget));
    }
    rep.notes.push(format!(
        "concrete comparisons over the {CONCRETE_STATES}-state cap: {inconclusive_total}/{}",
        rep.instances
    ));
    Ok(())
}

fn lts_of(t: &Term, sos: &Sos<'_>) -> Result<LabeledGraph, Error> {
    let c = Configuration::initial(t.clone(), &sos.model().backend);
    Ok(build_lts(&c, sos, StepLimits::default())?.graph)
}

/// A term FR-bisimilar to `s` and distinct from it when one is found among
/// a few rewritings; `s` itself otherwise.
fn partner(s: &Term, sos: &Sos<'_>) -> Result<Term, Error> {
    let mut candidates = Vec::new();
    if let Ok((n, _)) = normalize(s, sos.model(), DEFAULT_FUEL) {
        candidates.push(n);
    }
    candidates.push(Term::plus(s.clone(), s.clone()));
    if let Term::Sum(items) = s {
        candidates.push(Term::sum(items.iter().rev().cloned()));
    }
    let gs = lts_of(s, sos)?;
    for c in candidates {
        if !ac_equal(&c, s) && fr_bisimilar(&gs, &lts_of(&c, sos)?)?.related {
            return Ok(c);
        }
    }
    Ok(s.clone())
}

fn congruence(rep: &mut SweepReport) -> Result<(), Error> {
    let model = axiom_model(false);
    let sos = Sos::new(&model);
    let ls = labels(&QOPS);
    let mut r = rng(rep.seed);
    let mut nontrivial = 0;
    for _ in 0..rep.budget {
        let (d1, d2) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let s1 = gen::random_term_with(&mut r, d1, &ls);
        let s2 = gen::random_term_with(&mut r, d2, &ls);
        let (t1, t2) = (partner(&s1, &sos)?, partner(&s2, &sos)?);
        if !ac_equal(&s1, &t1) || !ac_equal(&s2, &t2) {
            nontrivial += 1;
        }
        for op in 0..6 {
            rep.instances += 1;
            let (l, rr) = (binary(op, s1.clone(), s2.clone()), binary(op, t1.clone(), t2.clone()));
            let v = fr_bisimilar(&lts_of(&l, &sos)?, &lts_of(&rr, &sos)?)?;
            if !v.related {
                rep.failures.push(format!(
                    "{}  vs  {}  (distinguish {})",
                    render(&l),
                    render(&rr),
                    v.distinguishing.unwrap_or_default()
                ));
            }
        }
    }
    rep.notes.push(format!("quadruples with a distinct bisimilar partner: {nontrivial}/{}", rep.budget));
    Ok(())
}

fn oracle(rep: &mut SweepReport) -> Result<(), Error> {
    let ls = labels(&["a", "b"]);
    let mut r = rng(rep.seed);
    let (mut related, mut hierarchy_checked) = (0, 0);
    for i in 0..rep.budget {
        let g = random_graph(&mut r, 39, &ls);
        let h = match i % 4 {
            0 => random_graph(&mut r, 39, &ls),
            1 => gen::permuted(&g, &mut r),
            2 => gen::split_state(&g, &mut r),
            _ => gen::mutate(&g, &mut r),
        };
        rep.instances += 1;
        let fast = fr_bisimilar(&g, &h)?;
        let slow = fr_bisimilar_naive(&g, &h)?;
        if fast.related != slow {
            rep.failures.push(format!("pair {i}: refinement={} naive={slow}\n{}---\n{}", fast.related, g.export(), h.export()));
            continue;
        }
        if fast.related {
            related += 1;
        }
        let verdicts: Vec<bool> = [Equivalence::Fr, Equivalence::Rooted, Equivalence::Branching]
            .into_iter()
            .map(|m| -> Result<bool, Error> {
                let v = check(m, &g, &h)?;
                if let Some(w) = &v.witness {
                    if let Err(e) = validate_witness(m, &g, &h, w) {
                        return Err(Error::Usage(format!("pair {i}: {} witness rejected: {e}", m.name())));
                    }
                }
                Ok(v.related)
            })
            .collect::<Result<_, _>>()
            .or_else(|e| {
                rep.failures.push(e.to_string());
                Ok::<_, Error>(vec![false, false, false])
            })?;
        hierarchy_checked += 1;
        if (verdicts[0] && !verdicts[1]) || (verdicts[1] && !verdicts[2]) {
            rep.failures.push(format!("pair {i}: hierarchy violated fr={} rooted={} branching={}", verdicts[0], verdicts[1], verdicts[2]));
        }
    }
    rep.notes.push(format!("related pairs: {related}/{}", rep.budget));
    rep.notes.push(format!("hierarchy and witness checks: {hierarchy_checked}"));
    Ok(())
}
