use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::term::{LabelSet, Term};

fn level(t: &Term) -> u8 {
    match t {
        Term::Sum(items) if items.len() != 1 => 0,
        Term::Sum(_) => 3,
        Term::Par(..) => 1,
        Term::Seq(..) => 2,
        _ => 3,
    }
}

fn set(s: &LabelSet) -> String {
    let names: Vec<&str> = s.iter().map(|n| &**n).collect();
    names.join(",")
}

fn go(t: &Term, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        go(t, 0, out);
        out.push(')');
        return;
    }
    match t {
        Term::Atom(l) => {
            let _ = write!(out, "{l}");
        }
        Term::Var(x) => out.push_str(x),
        Term::Rec(x, spec) => {
            let _ = write!(out, "<{x}|{}>", spec.name);
        }
        Term::Sum(items) if items.is_empty() => out.push_str("delta"),
        Term::Sum(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                go(item, 1, out);
            }
        }
        Term::Seq(x, y) => {
            go(x, 3, out);
            out.push_str(" . ");
            go(y, 2, out);
        }
        Term::Par(op, x, y) => {
            // sequential operands are bracketed for readability
            match &**x {
                Term::Par(inner, ..) if inner == op => go(x, 1, out),
                _ => go(x, 3, out),
            }
            let _ = write!(out, " {} ", op.symbol());
            go(y, 3, out);
        }
        Term::Encap(h, x) => {
            let _ = write!(out, "encap{{{}}}(", set(h));
            go(x, 0, out);
            out.push(')');
        }
        Term::Abstract(i, x) => {
            let _ = write!(out, "abs{{{}}}(", set(i));
            go(x, 0, out);
            out.push(')');
        }
    }
}

/// Text form accepted back by the parser.
pub fn render(t: &Term) -> String {
    let mut out = String::new();
    go(t, 0, &mut out);
    out
}
