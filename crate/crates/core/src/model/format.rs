//! Line-oriented text formats.
//!
//! ```text
//! # language file
//! domain 2
//! relation R03 3
//! 001 010 011
//! 100 101 110 111
//!
//! # instance file
//! vars s t u
//! constraint R03 s t u
//!
//! # quantified instance file: an instance file plus
//! prefix A s E t E u
//! ```
//!
//! Tuples are digit strings. Domains larger than 10 use comma separated
//! values (`10,3,0`) instead.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{Constraint, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Tuple, Value};
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (col, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(col),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &content[s..col],
                        column: content[..s].chars().count() + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

fn parse_usize(line: &Line<'_>, idx: usize, what: &str) -> Result<usize> {
    let tok = line.tokens.get(idx).ok_or_else(|| {
        let col = line.tokens.last().map_or(1, |t| t.column + t.text.len());
        Error::syntax(line.number, col, format!("missing {what}"))
    })?;
    tok.text.parse().map_err(|_| {
        Error::syntax(
            line.number,
            tok.column,
            format!("expected {what}, found `{}`", tok.text),
        )
    })
}

fn expect_len(line: &Line<'_>, len: usize, keyword: &str) -> Result<()> {
    if line.tokens.len() > len {
        let t = &line.tokens[len];
        return Err(Error::syntax(
            line.number,
            t.column,
            format!("unexpected `{}` after `{keyword}` line", t.text),
        ));
    }
    Ok(())
}

fn parse_tuple(tok: &Token<'_>, line: usize, domain_size: usize) -> Result<Tuple> {
    let bad = |what: &str| Error::syntax(line, tok.column, format!("{what} in tuple `{}`", tok.text));
    let values: Vec<usize> = if tok.text.contains(',') {
        tok.text
            .split(',')
            .map(|p| p.parse().map_err(|_| bad("bad value")))
            .collect::<Result<_>>()?
    } else {
        tok.text
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| bad("non-digit")))
            .collect::<Result<_>>()?
    };
    values
        .into_iter()
        .map(|v| {
            if v < domain_size {
                Ok(v as Value)
            } else {
                Err(Error::ValueOutOfDomain {
                    value: v,
                    domain_size,
                })
            }
        })
        .collect()
}

/// Parse a language document.
pub fn parse_language(text: &str) -> Result<ConstraintLanguage> {
    let mut lines = lines(text);
    let first = lines
        .next()
        .ok_or_else(|| Error::syntax(1, 1, "empty document, expected `domain <d>`"))?;
    if first.tokens[0].text != "domain" {
        return Err(Error::syntax(
            first.number,
            first.tokens[0].column,
            format!("expected `domain`, found `{}`", first.tokens[0].text),
        ));
    }
    let domain_size = parse_usize(&first, 1, "domain size")?;
    expect_len(&first, 2, "domain")?;
    let mut lang = ConstraintLanguage::new(domain_size)?;

    let mut current: Option<(String, usize, Vec<Tuple>)> = None;
    let flush = |lang: &mut ConstraintLanguage, cur: Option<(String, usize, Vec<Tuple>)>| -> Result<()> {
        if let Some((name, arity, tuples)) = cur {
            lang.insert(Relation::new(name, arity, domain_size, tuples)?)?;
        }
        Ok(())
    };
    for line in lines {
        let head = &line.tokens[0];
        match head.text {
            "relation" => {
                flush(&mut lang, current.take())?;
                let name = line
                    .tokens
                    .get(1)
                    .ok_or_else(|| Error::syntax(line.number, head.column + 8, "missing relation name"))?
                    .text
                    .to_string();
                let arity = parse_usize(&line, 2, "relation arity")?;
                expect_len(&line, 3, "relation")?;
                if arity == 0 {
                    return Err(Error::ZeroArity);
                }
                current = Some((name, arity, Vec::new()));
            }
            "domain" => {
                return Err(Error::syntax(line.number, head.column, "`domain` given twice"));
            }
            _ => {
                let (name, arity, tuples) = current.as_mut().ok_or_else(|| {
                    Error::syntax(line.number, head.column, "tuple outside a relation block")
                })?;
                for tok in &line.tokens {
                    let t = parse_tuple(tok, line.number, domain_size)?;
                    if t.len() != *arity {
                        return Err(Error::TupleArity {
                            relation: name.clone(),
                            expected: *arity,
                            found: t.len(),
                        });
                    }
                    tuples.push(t);
                }
            }
        }
    }
    flush(&mut lang, current)?;
    Ok(lang)
}

fn tuple_text(t: &[Value], domain_size: usize) -> String {
    if domain_size <= 10 {
        t.iter().map(|v| char::from(b'0' + v)).collect()
    } else {
        t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Canonical serialization: relations by name, one tuple per line in
/// lexicographic order.
pub fn write_language(lang: &ConstraintLanguage) -> String {
    let mut out = format!("domain {}\n", lang.domain_size());
    for r in lang.relations() {
        let _ = writeln!(out, "relation {} {}", r.name(), r.arity());
        for t in r.tuples() {
            out.push_str(&tuple_text(t, lang.domain_size()));
            out.push('\n');
        }
    }
    out
}

struct InstanceParts {
    vars: Vec<String>,
    constraints: Vec<Constraint>,
    prefix: Option<Vec<(Quantifier, String)>>,
}

fn parse_parts(text: &str, allow_prefix: bool) -> Result<InstanceParts> {
    let mut parts = InstanceParts {
        vars: Vec::new(),
        constraints: Vec::new(),
        prefix: None,
    };
    for line in lines(text) {
        let head = &line.tokens[0];
        let rest = || line.tokens[1..].iter().map(|t| t.text.to_string());
        match head.text {
            "vars" => parts.vars.extend(rest()),
            "constraint" => {
                let mut it = rest();
                let rel = it.next().ok_or_else(|| {
                    Error::syntax(line.number, head.column + 10, "missing relation name")
                })?;
                parts.constraints.push(Constraint {
                    relation: rel,
                    vars: it.collect(),
                });
            }
            "prefix" if allow_prefix => {
                if parts.prefix.is_some() {
                    return Err(Error::syntax(line.number, head.column, "`prefix` given twice"));
                }
                let toks = &line.tokens[1..];
                let mut prefix = Vec::new();
                for pair in toks.chunks(2) {
                    let q = match pair[0].text {
                        "A" => Quantifier::Forall,
                        "E" => Quantifier::Exists,
                        other => {
                            return Err(Error::syntax(
                                line.number,
                                pair[0].column,
                                format!("expected `A` or `E`, found `{other}`"),
                            ))
                        }
                    };
                    let v = pair.get(1).ok_or_else(|| {
                        Error::syntax(line.number, pair[0].column + 1, "quantifier without variable")
                    })?;
                    prefix.push((q, v.text.to_string()));
                }
                parts.prefix = Some(prefix);
            }
            other => {
                return Err(Error::syntax(
                    line.number,
                    head.column,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    Ok(parts)
}

/// Parse an instance document against `language`.
pub fn parse_instance(text: &str, language: Arc<ConstraintLanguage>) -> Result<CspInstance> {
    let parts = parse_parts(text, false)?;
    CspInstance::new(language, parts.vars, parts.constraints)
}

/// Parse a quantified instance document against `language`.
pub fn parse_qcsp(text: &str, language: Arc<ConstraintLanguage>) -> Result<QcspInstance> {
    let parts = parse_parts(text, true)?;
    let prefix = parts
        .prefix
        .ok_or_else(|| Error::InvalidPrefix("missing `prefix` line".into()))?;
    QcspInstance::new(CspInstance::new(language, parts.vars, parts.constraints)?, prefix)
}

pub fn write_instance(inst: &CspInstance) -> String {
    let mut out = String::from("vars");
    for v in inst.variables() {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    for c in inst.constraints() {
        let _ = writeln!(out, "constraint {} {}", c.relation, c.vars.join(" "));
    }
    out
}

pub fn write_qcsp(inst: &QcspInstance) -> String {
    let mut out = write_instance(inst.csp());
    out.push_str("prefix");
    for (q, v) in inst.prefix() {
        let _ = write!(out, " {} {v}", q.symbol());
    }
    out.push('\n');
    out
}
