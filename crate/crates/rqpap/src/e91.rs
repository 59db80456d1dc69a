//! The basic E91 key distribution protocol: Alice and Bob share Bell pairs,
//! exchange a qubit and two classical bases, compare, and the composed
//! system is checked against the external loop `receive_A . send_B`.
//!
//! The model is produced as `.rqp` source and read back through the parser.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rqpap_core::bisim::{branching_classes, check, Equivalence, Verdict};
use rqpap_core::model::Model;
use rqpap_core::parser::{parse_file, render, RqpFile};
use rqpap_core::qstate::{DensityMatrix, Matrix, TOLERANCE};
use rqpap_core::sos::{build_forward_lts, Configuration, Lts, Sos, StepLimits};
use rqpap_core::term::{name, ActionLabel, LabelSet, Term};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct E91Options {
    pub pairs: usize,
    pub tokens: usize,
    pub concrete: bool,
    /// Alice measures only `q_a` and Bob only `q_b`.
    pub swapped_measurements: bool,
}

impl Default for E91Options {
    fn default() -> Self {
        E91Options { pairs: 1, tokens: 1, concrete: false, swapped_measurements: false }
    }
}

struct Labels {
    ins: Vec<String>,
    outs: Vec<String>,
    alice: Vec<Vec<String>>,
    bob: Vec<Vec<String>>,
    linear: Vec<Vec<String>>,
    gamma: Vec<[String; 3]>,
    qops: Vec<(String, usize)>,
    h: Vec<String>,
    i: Vec<String>,
}

fn suffixed(base: &str, k: usize, n: usize) -> String {
    if n == 1 {
        base.to_string()
    } else {
        format!("{base}{}", k + 1)
    }
}

fn labels(o: &E91Options) -> Labels {
    let ins: Vec<String> = (0..o.tokens).map(|j| suffixed("receive_A", j, o.tokens)).collect();
    let outs: Vec<String> = (0..o.tokens).map(|j| suffixed("send_B", j, o.tokens)).collect();
    let one = |s: &str| vec![s.to_string()];
    let (mut alice, mut bob, mut linear) = (vec![ins.clone()], Vec::new(), vec![ins.clone()]);
    let (mut gamma, mut qops, mut h, mut i) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..o.pairs {
        let [snd, rcv, c] = ["send_Q_qb", "receive_Q_qb", "c_Q_qb"].map(|b| suffixed(b, k, o.pairs));
        let ma = format!("{}_Ka", suffixed("M_qa", k, o.pairs));
        let mb = format!("{}_Kb", suffixed("M_qb", k, o.pairs));
        alice.push(one(&snd));
        bob.push(one(&rcv));
        if o.swapped_measurements {
            alice.push(one(&ma));
            bob.push(one(&mb));
        } else {
            alice.extend([one(&ma), one(&mb)]);
            bob.extend([one(&ma), one(&mb)]);
        }
        linear.extend([one(&c), one(&ma), one(&mb)]);
        h.extend([snd.clone(), rcv.clone(), ma.clone(), mb.clone()]);
        i.extend([c.clone(), ma.clone(), mb.clone()]);
        qops.extend([(ma, 2 * k), (mb, 2 * k + 1)]);
        gamma.push([snd, rcv, c]);
    }
    alice.extend([one("receive_P_Bb"), one("send_P_Ba"), one("cmp")]);
    bob.extend([one("send_P_Bb"), one("receive_P_Ba"), one("cmp"), outs.clone()]);
    linear.extend([one("c_P_Bb"), one("c_P_Ba"), one("cmp"), one("cmp"), outs.clone()]);
    for b in ["Bb", "Ba"] {
        let [s, r, c] = [format!("send_P_{b}"), format!("receive_P_{b}"), format!("c_P_{b}")];
        h.extend([s.clone(), r.clone()]);
        i.push(c.clone());
        gamma.push([s, r, c]);
    }
    i.push("cmp".into());
    Labels { ins, outs, alice, bob, linear, gamma, qops, h, i }
}

fn var(prefix: &str, n: usize) -> String {
    if n == 0 {
        prefix.to_string()
    } else {
        format!("{prefix}{n}")
    }
}

/// `P = a . P1; P1 = b . P2; ... ; Pk = z . P;` with sums for alternatives.
fn chain(prefix: &str, steps: &[Vec<String>], first: usize) -> String {
    let mut out = String::new();
    for (n, alts) in steps.iter().enumerate() {
        let next = if n + 1 == steps.len() { var(prefix, first) } else { var(prefix, n + first + 1) };
        let body: Vec<String> = alts.iter().map(|a| format!("{a} . {next}")).collect();
        let _ = writeln!(out, "  {} = {};", var(prefix, n + first), body.join(" + "));
    }
    out
}

/// The protocol as an `.rqp` file.
pub fn e91_source(o: &E91Options) -> Result<String, Error> {
    if !(1..=2).contains(&o.pairs) || !(1..=2).contains(&o.tokens) {
        return Err(Error::Usage("pairs and tokens must be 1 or 2".into()));
    }
    let l = labels(o);
    let mut s = String::new();
    let comm: Vec<String> = l.ins.iter().chain(&l.outs).cloned().chain(["cmp".to_string()]).collect();
    let _ = writeln!(s, "comm {};", comm.join(", "));
    let qops: Vec<&str> = l.qops.iter().map(|(q, _)| q.as_str()).collect();
    let _ = writeln!(s, "qop {};", qops.join(", "));
    for [a, b, c] in &l.gamma {
        let _ = writeln!(s, "gamma({a}, {b}) = {c};");
    }
    if o.concrete {
        for (q, qubit) in &l.qops {
            let _ = writeln!(s, "effect {q} = measure(std, {qubit});");
        }
        let pairs: Vec<&str> = (0..o.pairs).map(|_| "bell(1)").collect();
        let _ = writeln!(s, "init {};", pairs.join(", "));
    }
    let _ = write!(s, "spec E91 {{\n{}{}}}\n", chain("A", &l.alice, 0), chain("B", &l.bob, 0));
    let _ = write!(s, "spec Linear {{\n{}}}\n", chain("X", &l.linear, 1));
    let _ = write!(s, "spec Loop {{\n{}}}\n", chain("S", &[l.ins.clone(), l.outs.clone()], 1));
    let (h, i) = (l.h.join(","), l.i.join(","));
    let _ = writeln!(s, "term system = encap{{{h}}}(<A|E91> || <B|E91>);");
    let _ = writeln!(s, "term lhs = abs{{{i}}}(encap{{{h}}}(<A|E91> || <B|E91>));");
    let _ = writeln!(s, "term linear = <X1|Linear>;");
    let _ = writeln!(s, "term linear_abs = abs{{{i}}}(<X1|Linear>);");
    let _ = writeln!(s, "term rhs = <S1|Loop>;");
    Ok(s)
}

pub struct E91 {
    pub source: String,
    pub file: RqpFile,
    pub lhs: Term,
    pub rhs: Term,
    pub h: LabelSet,
    pub i: LabelSet,
    /// The `encap` equations of the hand derivation, one per protocol step.
    pub derivation: Vec<String>,
}

impl E91 {
    pub fn model(&self) -> &Model {
        &self.file.model
    }

    pub fn term(&self, n: &str) -> &Term {
        self.file.term(n).expect("generated source defines every term")
    }
}

fn derivation(l: &Labels, h: &str) -> Vec<String> {
    let (mut ia, mut ib) = (0usize, 0usize);
    let gamma_of = |c: &str| l.gamma.iter().any(|g| g[2] == c);
    let state = |ia: usize, ib: usize| format!("encap{{H}}({} || {})", var("A", ia), var("B", ib));
    let mut out = Vec::new();
    for step in &l.linear {
        let lab = &step[0];
        let before = state(ia, ib);
        let a_has = l.alice[ia].contains(lab);
        let b_has = l.bob[ib].contains(lab);
        let both = gamma_of(lab) || (a_has && b_has && lab.starts_with("M_"));
        if both || a_has {
            ia = (ia + 1) % l.alice.len();
        }
        if both || !a_has {
            ib = (ib + 1) % l.bob.len();
        }
        out.push(format!("{before} = {} . {}", step.join(" + "), state(ia, ib)));
    }
    out.insert(0, format!("H = {{{h}}}"));
    out
}

pub fn build_e91(o: &E91Options) -> Result<E91, Error> {
    let source = e91_source(o)?;
    let file = parse_file(&source).map_err(|e| Error::Parse { file: "<e91>".into(), error: e })?;
    let l = labels(o);
    let lhs = file.term("lhs").cloned().expect("lhs");
    let rhs = file.term("rhs").cloned().expect("rhs");
    let h: LabelSet = l.h.iter().map(|s| name(s)).collect();
    let i: LabelSet = l.i.iter().map(|s| name(s)).collect();
    let derivation = derivation(&l, &l.h.join(","));
    Ok(E91 { source, file, lhs, rhs, h, i, derivation })
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub name: &'static str,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct E91Report {
    pub options: E91Options,
    pub verdict: Verdict,
    pub lhs_states: usize,
    pub rhs_states: usize,
    /// Branching classes of the abstracted system.
    pub classes: usize,
    pub stages: Vec<Stage>,
    /// Agreement of every post-round state with the measured Bell pairs.
    pub rho: Option<RhoCheck>,
    pub summary: Vec<String>,
    pub elapsed: Duration,
}

impl E91Report {
    /// The regression verdict: related, and the collapse to a two-state loop.
    pub fn passed(&self) -> bool {
        self.verdict.related && self.classes == 2 && matches!(self.rho, None | Some(RhoCheck::Ok))
    }

    pub fn render(&self) -> String {
        let o = &self.options;
        let mut s = String::new();
        let mode = if o.concrete { "concrete" } else { "symbolic" };
        let _ = writeln!(s, "#RQ PROTOCOL e91 pairs={} tokens={} mode={mode} swapped={}", o.pairs, o.tokens, o.swapped_measurements);
        let _ = writeln!(s, "#RQ MODE rooted");
        let _ = writeln!(s, "#RQ LTS lhs={} rhs={}", self.lhs_states, self.rhs_states);
        for line in self.verdict.export(false).lines() {
            let _ = writeln!(s, "#RQ {line}");
        }
        let _ = writeln!(s, "#RQ CLASSES {}", self.classes);
        for st in &self.stages {
            let yn = if st.verdict.related { "yes" } else { "no" };
            let _ = writeln!(s, "#RQ STAGE {} RELATED {yn}", st.name);
            if let Some(d) = &st.verdict.distinguishing {
                let _ = writeln!(s, "#RQ STAGE {} DISTINGUISH {d}", st.name);
            }
        }
        if let Some(r) = self.rho {
            let _ = writeln!(s, "#RQ RHO {}", r.name());
        }
        let _ = writeln!(s, "#RQ TIME_MS {}", self.elapsed.as_millis());
        let _ = writeln!(s, "#RQ RESULT {}", if self.passed() { "pass" } else { "fail" });
        s.push_str("derivation:\n");
        for line in &self.summary {
            let _ = writeln!(s, "  {line}");
        }
        s
    }
}

fn forward(t: &Term, model: &Model) -> Result<Lts, Error> {
    let sos = Sos::new(model);
    Ok(build_forward_lts(&Configuration::initial(t.clone(), &model.backend), &sos, StepLimits::default())?)
}

/// `½(|00⟩⟨00| + |11⟩⟨11|)` per pair, built directly from its entries.
pub fn measured_pairs(pairs: usize) -> DensityMatrix {
    let one = Matrix::from_real(4, &[0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.5]);
    let one = DensityMatrix::from_matrix(one).expect("valid state");
    (1..pairs).fold(one.clone(), |acc, _| acc.tensor(&one).expect("small"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoCheck {
    Ok,
    Mismatch,
    /// No round completes, so there is no state to compare.
    Unreached,
}

impl RhoCheck {
    pub fn name(self) -> &'static str {
        match self {
            RhoCheck::Ok => "ok",
            RhoCheck::Mismatch => "mismatch",
            RhoCheck::Unreached => "unreached",
        }
    }

    fn and(self, other: RhoCheck) -> RhoCheck {
        match (self, other) {
            (RhoCheck::Mismatch, _) | (_, RhoCheck::Mismatch) => RhoCheck::Mismatch,
            (RhoCheck::Unreached, _) | (_, RhoCheck::Unreached) => RhoCheck::Unreached,
            _ => RhoCheck::Ok,
        }
    }
}

fn rho_after_rounds(lts: &Lts, outs: &LabelSet, expected: &DensityMatrix) -> RhoCheck {
    let mut seen = RhoCheck::Unreached;
    for (_, l, t) in &lts.graph.forward {
        if matches!(l, ActionLabel::Act(n) if outs.contains(n)) {
            seen = RhoCheck::Ok;
            match &lts.configs[*t].rho {
                Some(r) if r.approx_eq(expected, TOLERANCE) => {}
                _ => return RhoCheck::Mismatch,
            }
        }
    }
    seen
}

pub fn verify_e91(o: &E91Options) -> Result<E91Report, Error> {
    let start = Instant::now();
    let e = build_e91(o)?;
    let m = e.model();
    let lhs = forward(&e.lhs, m)?;
    let rhs = forward(&e.rhs, m)?;
    let verdict = check(Equivalence::Rooted, &lhs.graph, &rhs.graph)?;
    let mut classes = branching_classes(&lhs.graph);
    classes.sort_unstable();
    classes.dedup();
    let mut stages = Vec::new();
    for (label, l, r) in [("system-vs-linear", "system", "linear"), ("linear-abstracted-vs-loop", "linear_abs", "rhs")] {
        let (gl, gr) = (forward(e.term(l), m)?, forward(e.term(r), m)?);
        stages.push(Stage { name: label, verdict: check(Equivalence::Rooted, &gl.graph, &gr.graph)? });
    }
    let rho = if o.concrete {
        let outs: LabelSet = labels(o).outs.iter().map(|s| name(s)).collect();
        let expected = measured_pairs(o.pairs);
        let linear = forward(e.term("linear"), m)?;
        Some(rho_after_rounds(&lhs, &outs, &expected).and(rho_after_rounds(&linear, &outs, &expected)))
    } else {
        None
    };
    let mut summary = vec![render(&e.lhs)];
    summary.extend(e.derivation.iter().cloned());
    summary.push(render(&e.rhs));
    Ok(E91Report {
        options: *o,
        verdict,
        lhs_states: lhs.state_count(),
        rhs_states: rhs.state_count(),
        classes: classes.len(),
        stages,
        rho,
        summary,
        elapsed: start.elapsed(),
    })
}
