//! `.rqp` files: label declarations, `γ`, quantum effects, the initial state,
//! recursion specifications and named terms, one statement per `;`.
//!
//! ```text
//! comm send, recv;            qop M;
//! gamma(send, recv) = c;
//! effect M = measure(std, 0, 1);   // also measure(had, q), unitary(hadamard, q..), identity
//! init bell(1);                    // product of bell(i) and zero(n) factors
//! spec E { X = recv . c . X; }
//! term main = <X|E>;
//! ```
//!
//! A file without any `comm` or `qop` declaration gets a permissive model.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{ParseError, ParseErrorKind, Parser, SourceSpan, Specs};
use crate::model::{Backend, Model};
use crate::qstate::{bell_state, named_gate, DensityMatrix, QuantumEffect};
use crate::term::{name, Name, Term};

#[derive(Clone, Debug)]
pub struct RqpFile {
    pub model: Model,
    pub specs: Specs,
    pub terms: Vec<(Name, Term)>,
}

impl RqpFile {
    pub fn term(&self, n: &str) -> Option<&Term> {
        self.terms.iter().find(|(m, _)| &**m == n).map(|(_, t)| t)
    }
}

fn model_err(kind: crate::model::ModelError, span: SourceSpan) -> ParseError {
    ParseError { kind: ParseErrorKind::Model(kind), span }
}

fn quantum_err(e: crate::qstate::QuantumError, span: SourceSpan) -> ParseError {
    ParseError { kind: ParseErrorKind::Quantum(e), span }
}

impl Parser {
    fn names_until_semicolon(&mut self) -> Result<Vec<(String, SourceSpan)>, ParseError> {
        let mut out = alloc::vec![self.ident()?];
        while self.eat(",") {
            out.push(self.ident()?);
        }
        self.expect(";")?;
        Ok(out)
    }

    fn qubits(&mut self) -> Result<Vec<usize>, ParseError> {
        let mut out = Vec::new();
        while self.eat(",") {
            out.push(self.number()? as usize);
        }
        Ok(out)
    }

    fn effect(&mut self) -> Result<QuantumEffect, ParseError> {
        let (kind, span) = self.ident()?;
        if kind == "identity" {
            return Ok(QuantumEffect::Identity);
        }
        self.expect("(")?;
        let (arg, arg_span) = self.ident()?;
        let targets = self.qubits()?;
        self.expect(")")?;
        let bad = |msg: &str, span| Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), span });
        match (kind.as_str(), arg.as_str()) {
            ("measure", "std") => Ok(QuantumEffect::measure_standard(targets)),
            ("measure", "had") if targets.len() == 1 => Ok(QuantumEffect::measure_hadamard(targets[0])),
            ("measure", _) => bad("measurement is `measure(std, q..)` or `measure(had, q)`", arg_span),
            ("unitary", g) => match named_gate(g) {
                Some(matrix) => Ok(QuantumEffect::Unitary { matrix, targets }),
                None => bad("unknown gate", arg_span),
            },
            _ => bad("expected `measure`, `unitary` or `identity`", span),
        }
    }

    fn initial_state(&mut self) -> Result<DensityMatrix, ParseError> {
        let mut rho: Option<DensityMatrix> = None;
        loop {
            let (kind, span) = self.ident()?;
            self.expect("(")?;
            let n = self.number()? as usize;
            self.expect(")")?;
            let factor = match kind.as_str() {
                "bell" => bell_state(n),
                "zero" => DensityMatrix::zero_state(n),
                _ => return Err(ParseError { kind: ParseErrorKind::Syntax("expected `bell` or `zero`".into()), span }),
            }
            .map_err(|e| quantum_err(e, span))?;
            rho = Some(match rho {
                None => factor,
                Some(r) => r.tensor(&factor).map_err(|e| quantum_err(e, span))?,
            });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(rho.expect("at least one factor"))
    }
}

pub fn parse_file(text: &str) -> Result<RqpFile, ParseError> {
    let mut model = Model::new();
    let mut declared = false;
    let mut terms: Vec<(Name, Term)> = Vec::new();
    let mut p = Parser::new(text, Specs::new())?;
    while !p.at_end() {
        let (kw, span) = p.ident()?;
        match kw.as_str() {
            "comm" | "qop" => {
                declared = true;
                for (n, span) in p.names_until_semicolon()? {
                    let r = if kw == "comm" { model.declare_comm(&n) } else { model.declare_qop(&n) };
                    r.map_err(|e| model_err(e, span))?;
                }
            }
            "gamma" => {
                p.expect("(")?;
                let (x, _) = p.ident()?;
                p.expect(",")?;
                let (y, _) = p.ident()?;
                p.expect(")")?;
                p.expect("=")?;
                let (z, zspan) = p.ident()?;
                p.expect(";")?;
                declared = true;
                model.set_gamma(&x, &y, &z).map_err(|e| model_err(e, zspan))?;
            }
            "effect" => {
                let (n, _) = p.ident()?;
                p.expect("=")?;
                let e = p.effect()?;
                p.expect(";")?;
                model.set_effect(&n, e);
            }
            "init" => {
                model.backend = Backend::Concrete(p.initial_state()?);
            }
            "spec" => {
                let (n, nspan) = p.ident()?;
                if p.specs.contains_key(n.as_str()) {
                    return Err(ParseError { kind: ParseErrorKind::DuplicateDefinition(name(&n)), span: nspan });
                }
                p.expect("{")?;
                let spec = p.equations(&n, Some("}"))?;
                p.expect("}")?;
                p.specs.insert(name(&n), Arc::new(spec));
            }
            "term" => {
                let (n, nspan) = p.ident()?;
                if terms.iter().any(|(m, _)| **m == *n) {
                    return Err(ParseError { kind: ParseErrorKind::DuplicateDefinition(name(&n)), span: nspan });
                }
                p.expect("=")?;
                let t = p.term()?;
                p.expect(";")?;
                terms.push((name(&n), t));
            }
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(alloc::format!("unknown statement `{kw}`")),
                    span,
                })
            }
        }
    }
    if !declared {
        model.permissive = true;
    }
    Ok(RqpFile { model, specs: p.specs, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelKind;

    #[test]
    fn full_file() {
        let text = "comm send, recv; qop M;\n\
                    gamma(send, recv) = c;\n\
                    effect M = measure(std, 0, 1);\n\
                    init bell(1);\n\
                    spec E { X = recv . c . X; }\n\
                    term main = <X|E> || M;\n";
        let f = parse_file(text).unwrap();
        assert_eq!(f.model.kind(&name("c")), Ok(LabelKind::Comm));
        assert_eq!(f.model.gamma(&name("recv"), &name("send")), Some(&name("c")));
        assert!(f.model.is_concrete());
        assert!(f.term("main").is_some());
        assert!(!f.model.permissive);
    }

    #[test]
    fn file_errors() {
        let e = parse_file("comm a;\nqop a;").unwrap_err();
        assert_eq!(e.span.line, 2);
        let e = parse_file("term t = <X|E>;").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnboundSpec(name("E")));
        assert!(parse_file("effect a = unitary(Q, 0);").is_err());
        assert!(parse_file("term t = a; term t = b;").is_err());
        assert!(parse_file("term t = a").is_err());
        assert!(parse_file("term t = a;").unwrap().model.permissive);
    }
}
