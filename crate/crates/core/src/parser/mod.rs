//! Text syntax for terms, recursion specifications and `.rqp` files.
//!
//! Precedence from tightest: the `[m]` suffix, `.`, the parallel family
//! `|`, `><`, `##`, `||`, and finally `+`. Distinct parallel operators may
//! not be chained without parentheses.

mod file;
mod lex;
mod render;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

pub use file::{parse_file, RqpFile};
pub use render::render;

use crate::model::ModelError;
use crate::qstate::QuantumError;
use crate::term::{is_guarded, name, ActionLabel, LabelSet, Name, ParOp, RecSpec, Term};
use lex::{Tok, Token};

/// 1-based position of an error in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    MixedParallel(&'static str, &'static str),
    UnboundSpec(Name),
    UnknownVariable(Name),
    Unguarded(Name),
    DuplicateDefinition(Name),
    Model(ModelError),
    Quantum(QuantumError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => f.write_str(m),
            ParseErrorKind::MixedParallel(a, b) => {
                write!(f, "operators `{a}` and `{b}` mixed without parentheses")
            }
            ParseErrorKind::UnboundSpec(s) => write!(f, "no specification named `{s}`"),
            ParseErrorKind::UnknownVariable(x) => write!(f, "`{x}` is not a variable of the specification"),
            ParseErrorKind::Unguarded(x) => write!(f, "equation for `{x}` is not guarded"),
            ParseErrorKind::DuplicateDefinition(x) => write!(f, "`{x}` is defined twice"),
            ParseErrorKind::Model(e) => write!(f, "{e}"),
            ParseErrorKind::Quantum(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ParseError {}

pub type Specs = BTreeMap<Name, Arc<RecSpec>>;

const KEYWORDS: [&str; 5] = ["delta", "tau", "skip", "encap", "abs"];

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub(crate) specs: Specs,
    eof: SourceSpan,
}

impl Parser {
    pub(crate) fn new(text: &str, specs: Specs) -> Result<Self, ParseError> {
        let (toks, eof) = lex::tokenize(text)?;
        Ok(Parser { toks, pos: 0, specs, eof })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map_or(self.eof, |t| t.span)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), span: self.span() })
    }

    fn fail<T>(&self, kind: ParseErrorKind, span: SourceSpan) -> Result<T, ParseError> {
        Err(ParseError { kind, span })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.error(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, span))
            }
            _ => self.error("expected an identifier"),
        }
    }

    fn label(&mut self) -> Result<Name, ParseError> {
        let (s, span) = self.ident()?;
        if KEYWORDS.contains(&s.as_str()) {
            return self.fail(ParseErrorKind::Syntax(format!("keyword `{s}` used as a label")), span);
        }
        Ok(name(&s))
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected a number"),
        }
    }

    fn label_set(&mut self) -> Result<LabelSet, ParseError> {
        self.expect("{")?;
        let mut set = LabelSet::new();
        if !self.eat("}") {
            loop {
                set.insert(self.label()?);
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(set)
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let mut items = alloc::vec![self.parallel()?];
        while self.eat("+") {
            items.push(self.parallel()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Term::sum(items) })
    }

    fn par_op(&self) -> Option<ParOp> {
        match self.peek() {
            Some(Tok::Sym(s)) => ParOp::ALL.into_iter().find(|op| op.symbol() == *s),
            _ => None,
        }
    }

    fn parallel(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.sequence()?;
        let mut first: Option<ParOp> = None;
        while let Some(op) = self.par_op() {
            if let Some(prev) = first.filter(|p| *p != op) {
                return self.fail(ParseErrorKind::MixedParallel(prev.symbol(), op.symbol()), self.span());
            }
            first = Some(op);
            self.pos += 1;
            acc = Term::par(op, acc, self.sequence()?);
        }
        Ok(acc)
    }

    fn sequence(&mut self) -> Result<Term, ParseError> {
        let head = self.postfix()?;
        if self.eat(".") {
            return Ok(Term::seq(head, self.sequence()?));
        }
        Ok(head)
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let t = self.primary()?;
        if matches!(self.peek(), Some(Tok::Sym("["))) {
            let span = self.span();
            let Term::Atom(ActionLabel::Act(n)) = &t else {
                return self.fail(ParseErrorKind::Syntax("history suffix needs an action".into()), span);
            };
            self.pos += 1;
            let key = self.number()?;
            let key = u32::try_from(key)
                .ok()
                .filter(|k| *k >= 1)
                .map_or_else(|| self.fail(ParseErrorKind::Syntax("history key out of range".into()), span), Ok)?;
            self.expect("]")?;
            return Ok(Term::Atom(ActionLabel::History(n.clone(), key)));
        }
        Ok(t)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Some(Tok::Sym("<")) => {
                self.pos += 1;
                let (x, xspan) = self.ident()?;
                self.expect("|")?;
                let (s, sspan) = self.ident()?;
                self.expect(">")?;
                let spec = match self.specs.get(s.as_str()) {
                    Some(spec) => spec.clone(),
                    None => return self.fail(ParseErrorKind::UnboundSpec(name(&s)), sspan),
                };
                if !spec.equations.contains_key(x.as_str()) {
                    return self.fail(ParseErrorKind::UnknownVariable(name(&x)), xspan);
                }
                Ok(Term::Rec(name(&x), spec))
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "delta" => {
                    self.pos += 1;
                    Ok(Term::delta())
                }
                "tau" => {
                    self.pos += 1;
                    Ok(Term::tau())
                }
                "skip" => {
                    self.pos += 1;
                    Ok(Term::skip())
                }
                kw @ ("encap" | "abs") if matches!(self.peek_at(1), Some(Tok::Sym("{"))) => {
                    let encap = kw == "encap";
                    self.pos += 1;
                    let set = self.label_set()?;
                    self.expect("(")?;
                    let body = self.term()?;
                    self.expect(")")?;
                    Ok(if encap { Term::Encap(set, body.into()) } else { Term::Abstract(set, body.into()) })
                }
                _ => Ok(Term::Atom(ActionLabel::Act(self.label()?))),
            },
            _ if self.at_end() => self.fail(ParseErrorKind::Syntax("unexpected end of input".into()), span),
            _ => self.error("expected a term"),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.error("unexpected trailing input")
        }
    }

    /// `X = t; Y = u; ...` up to a closing token or the end of input.
    pub(crate) fn equations(&mut self, spec_name: &str, close: Option<&str>) -> Result<RecSpec, ParseError> {
        let mut raw: Vec<(Name, SourceSpan, Term)> = Vec::new();
        loop {
            if close.map_or(self.at_end(), |c| matches!(self.peek(), Some(Tok::Sym(s)) if *s == c)) {
                break;
            }
            let (x, span) = self.ident()?;
            if raw.iter().any(|(y, _, _)| **y == *x) {
                return self.fail(ParseErrorKind::DuplicateDefinition(name(&x)), span);
            }
            self.expect("=")?;
            let body = self.term()?;
            self.expect(";")?;
            raw.push((name(&x), span, body));
        }
        let vars: LabelSet = raw.iter().map(|(x, _, _)| x.clone()).collect();
        let mut spec = RecSpec::new(spec_name);
        for (x, span, body) in raw {
            let body = bind_variables(&body, &vars);
            if !is_guarded(&body) {
                return self.fail(ParseErrorKind::Unguarded(x), span);
            }
            spec.equations.insert(x, body);
        }
        Ok(spec)
    }
}

/// Turns actions named like a specification variable into variables.
fn bind_variables(t: &Term, vars: &LabelSet) -> Term {
    match t {
        Term::Atom(ActionLabel::Act(n)) if vars.contains(n) => Term::Var(n.clone()),
        Term::Atom(_) | Term::Var(_) | Term::Rec(..) => t.clone(),
        Term::Sum(items) => Term::Sum(items.iter().map(|i| bind_variables(i, vars)).collect()),
        Term::Seq(x, y) => Term::seq(bind_variables(x, vars), bind_variables(y, vars)),
        Term::Par(op, x, y) => Term::par(*op, bind_variables(x, vars), bind_variables(y, vars)),
        Term::Encap(h, x) => Term::Encap(h.clone(), bind_variables(x, vars).into()),
        Term::Abstract(i, x) => Term::Abstract(i.clone(), bind_variables(x, vars).into()),
    }
}

/// Parses a closed term; `<X|E>` needs `E` in `specs`.
pub fn parse_term_in(text: &str, specs: &Specs) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, specs.clone())?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_term_in(text, &Specs::new())
}

/// Parses `X = t; ...` into a guarded specification called `spec_name`.
pub fn parse_spec(spec_name: &str, text: &str) -> Result<RecSpec, ParseError> {
    let mut p = Parser::new(text, Specs::new())?;
    p.equations(spec_name, None)
}

#[cfg(test)]
mod tests;
