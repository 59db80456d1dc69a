use alloc::string::String;
use alloc::vec::Vec;

use super::{ParseError, ParseErrorKind, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

// longest first, so `||` wins over `|`
const SYMBOLS: [&str; 17] = ["||", "><", "##", "|", ".", "+", "(", ")", "[", "]", "{", "}", "<", ">", ",", ";", "="];

/// Splits `text` into tokens; `//` starts a comment running to end of line.
pub(crate) fn tokenize(text: &str) -> Result<(Vec<Token>, SourceSpan), ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let span = |len: usize| SourceSpan { line, column: col, length: len.max(1) };
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if rest.starts_with("//") {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        let len = if c.is_ascii_alphabetic() || c == '_' {
            let n = rest.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(rest.len());
            out.push(Token { tok: Tok::Ident(String::from(&rest[..n])), span: span(n) });
            n
        } else if c.is_ascii_digit() {
            let n = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let value = rest[..n].parse::<u64>().map_err(|_| ParseError {
                kind: ParseErrorKind::Syntax("number too large".into()),
                span: span(n),
            })?;
            out.push(Token { tok: Tok::Num(value), span: span(n) });
            n
        } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            out.push(Token { tok: Tok::Sym(sym), span: span(sym.len()) });
            sym.len()
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax(alloc::format!("unexpected character `{c}`")),
                span: span(1),
            });
        };
        col += len;
        rest = &rest[len..];
    }
    Ok((out, SourceSpan { line, column: col, length: 1 }))
}
