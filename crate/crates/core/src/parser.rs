//! Prolog-like text format for rules, hypotheses and predicate signatures.
//!
//! ```text
//! % comment
//! zendo(A) :- piece(A,B), size(B,C), blue(B), small(C).
//! h(A) <- p(A,A).
//! ```
//!
//! Variables are single capitals `A`..`Z` or `V<n>`; predicate names match
//! `[a-z][a-zA-Z0-9_]*`. Output always uses `:-` and sorts the body.

use std::collections::BTreeSet;
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rule_model::{Hypothesis, Literal, PredicateSym, Rule, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(Variable),
    LParen,
    RParen,
    Comma,
    Neck,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(v) => write!(f, "variable `{v}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn variable_from_token(word: &str) -> Option<Variable> {
    let bytes = word.as_bytes();
    if bytes.len() == 1 && bytes[0].is_ascii_uppercase() {
        return Some(Variable((bytes[0] - b'A') as u32));
    }
    let digits = word.strip_prefix('V')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(Variable)
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&(i, c)) = chars.peek() {
        let pos = Pos { line, column: col };
        let mut advance = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => advance(&mut chars),
            '%' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    advance(&mut chars);
                }
            }
            '(' | ')' | ',' | '.' => {
                advance(&mut chars);
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Dot,
                    },
                    pos,
                ));
            }
            '←' => {
                advance(&mut chars);
                out.push((Tok::Neck, pos));
            }
            ':' | '<' => {
                advance(&mut chars);
                match chars.peek() {
                    Some(&(_, '-')) => {
                        advance(&mut chars);
                        out.push((Tok::Neck, pos));
                    }
                    _ => return Err(syntax(pos, format!("expected `{c}-`"))),
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = j + c.len_utf8();
                        advance(&mut chars);
                    } else {
                        break;
                    }
                }
                let word = &text[start..end];
                let first = word.chars().next().unwrap();
                if first.is_ascii_lowercase() {
                    out.push((Tok::Ident(word.to_string()), pos));
                } else if first.is_ascii_uppercase() {
                    let v = variable_from_token(word).ok_or_else(|| {
                        syntax(pos, format!("unsupported variable name `{word}`"))
                    })?;
                    out.push((Tok::Var(v), pos));
                } else {
                    return Err(syntax(pos, format!("unexpected token `{word}`")));
                }
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let pos = self.pos();
        let got = self.bump();
        if got == want {
            Ok(())
        } else {
            Err(syntax(pos, format!("expected {want}, found {got}")))
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let pos = self.pos();
        let name = match self.bump() {
            Tok::Ident(s) => s,
            Tok::Var(v) => {
                return Err(syntax(pos, format!("variable `{v}` in predicate position")))
            }
            t => return Err(syntax(pos, format!("expected a literal, found {t}"))),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                loop {
                    let pos = self.pos();
                    match self.bump() {
                        Tok::Var(v) => args.push(v),
                        Tok::Ident(s) => {
                            return Err(syntax(pos, format!("constant `{s}` is not allowed")))
                        }
                        t => return Err(syntax(pos, format!("expected a variable, found {t}"))),
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        let pred = PredicateSym::new(name, args.len()).map_err(|e| syntax(pos, e.to_string()))?;
        Literal::new(pred, args)
    }

    /// `head.` or `head :- lit, ..., lit.`
    fn rule(&mut self) -> Result<(usize, Rule)> {
        let line = self.pos().line;
        let head = self.literal()?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Neck {
            self.bump();
            loop {
                body.push(self.literal()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok((line, Rule::new(head, body)))
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

/// Parses exactly one rule; anything after its final period is an error.
/// The result is not validated.
pub fn parse_rule(text: &str) -> Result<Rule> {
    let mut p = Parser::new(text)?;
    let (_, rule) = p.rule()?;
    if !p.at_eof() {
        let pos = p.pos();
        return Err(syntax(pos, format!("trailing input: {}", p.peek())));
    }
    Ok(rule)
}

/// Parses a rule file, returning each rule with the line it starts on.
pub fn parse_rules(text: &str) -> Result<Vec<(usize, Rule)>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.rule()?);
    }
    Ok(out)
}

pub fn parse_hypothesis(text: &str) -> Result<Hypothesis> {
    Ok(Hypothesis::new(parse_rules(text)?.into_iter().map(|(_, r)| r)))
}

/// Canonical text: body sorted by (predicate, argument tuple), `:-` neck,
/// trailing period.
pub fn render_rule(rule: &Rule) -> String {
    rule.to_string()
}

/// The predicate pool of a hypothesis space: one head predicate and a set of
/// body predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    head: PredicateSym,
    body: BTreeSet<PredicateSym>,
}

impl Signature {
    pub fn new(head: PredicateSym, body: impl IntoIterator<Item = PredicateSym>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut names = BTreeSet::new();
        names.insert(head.name().to_string());
        for p in body {
            if !names.insert(p.name().to_string()) {
                return Err(Error::Signature(format!("duplicate predicate `{}`", p.name())));
            }
            set.insert(p);
        }
        if set.is_empty() {
            return Err(Error::Signature("no body predicates".into()));
        }
        Ok(Signature { head, body: set })
    }

    pub fn head(&self) -> &PredicateSym {
        &self.head
    }

    pub fn body(&self) -> &BTreeSet<PredicateSym> {
        &self.body
    }

    /// Largest body predicate arity; the tightest admissible padding width.
    pub fn max_body_arity(&self) -> usize {
        self.body.iter().map(PredicateSym::arity).max().unwrap_or(0)
    }

    /// Fails unless every literal of `rule` uses a predicate of this
    /// signature in the right place with the right arity.
    pub fn admits(&self, rule: &Rule) -> Result<()> {
        if rule.head().pred() != &self.head {
            return Err(Error::Signature(format!(
                "head `{}` is not {}",
                rule.head(),
                self.head
            )));
        }
        for l in rule.body() {
            if !self.body.contains(l.pred()) {
                return Err(Error::Signature(format!(
                    "body literal `{l}` is not in the signature"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "head {}", self.head)?;
        for p in &self.body {
            writeln!(f, "body {p}")?;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct PredDoc {
    name: String,
    arity: usize,
}

#[derive(Deserialize)]
struct SignatureDoc {
    head: PredDoc,
    body: Vec<PredDoc>,
}

fn parse_pred_spec(spec: &str, line: usize) -> Result<PredicateSym> {
    let (name, arity) = spec
        .split_once('/')
        .ok_or_else(|| Error::Signature(format!("line {line}: expected name/arity, got `{spec}`")))?;
    let arity: usize = arity
        .trim()
        .parse()
        .map_err(|_| Error::Signature(format!("line {line}: non-numeric arity `{arity}`")))?;
    PredicateSym::new(name.trim(), arity)
        .map_err(|e| Error::Signature(format!("line {line}: {e}")))
}

/// Parses `head h/1` / `body p/2` lines, or a JSON document
/// `{"head": {"name", "arity"}, "body": [{"name", "arity"}, ...]}`.
pub fn parse_signature(text: &str) -> Result<Signature> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: SignatureDoc =
            serde_json::from_str(trimmed).map_err(|e| Error::Signature(e.to_string()))?;
        let head = PredicateSym::new(doc.head.name, doc.head.arity)?;
        let mut body = Vec::new();
        for p in doc.body {
            body.push(PredicateSym::new(p.name, p.arity)?);
        }
        return check_duplicates(head, body);
    }
    let mut head = None;
    let mut body = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('%').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Signature(format!("line {line}: expected `head` or `body`")))?;
        let pred = parse_pred_spec(rest.trim(), line)?;
        match kw {
            "head" if head.is_some() => {
                return Err(Error::Signature(format!("line {line}: second head line")))
            }
            "head" => head = Some(pred),
            "body" => body.push(pred),
            other => {
                return Err(Error::Signature(format!(
                    "line {line}: unknown keyword `{other}`"
                )))
            }
        }
    }
    let head = head.ok_or_else(|| Error::Signature("missing head line".into()))?;
    check_duplicates(head, body)
}

fn check_duplicates(head: PredicateSym, body: Vec<PredicateSym>) -> Result<Signature> {
    let mut names = BTreeSet::new();
    for p in &body {
        if !names.insert(p.name()) {
            return Err(Error::Signature(format!("duplicate predicate `{}`", p.name())));
        }
    }
    Signature::new(head, body)
}
