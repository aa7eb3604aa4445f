//! Quantified equality formulas over an infinite domain.
//!
//! Truth of such a formula only depends on which variables are equal, so
//! assignments are represented by partitions of the variables and never by
//! concrete values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::model::Quantifier;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Eq(String, String),
    Neq(String, String),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn eq(u: &str, v: &str) -> Expr {
        Expr::Eq(u.into(), v.into())
    }

    pub fn neq(u: &str, v: &str) -> Expr {
        Expr::Neq(u.into(), v.into())
    }

    fn positive(&self) -> bool {
        match self {
            Expr::Eq(..) => true,
            Expr::Neq(..) | Expr::Not(_) => false,
            Expr::And(a, b) | Expr::Or(a, b) => a.positive() && b.positive(),
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Eq(u, v) | Expr::Neq(u, v) => {
                out.insert(u);
                out.insert(v);
            }
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Not(a) => a.collect_vars(out),
        }
    }

    fn eval(&self, same: &dyn Fn(&str, &str) -> bool) -> bool {
        match self {
            Expr::Eq(u, v) => same(u, v),
            Expr::Neq(u, v) => !same(u, v),
            Expr::And(a, b) => a.eval(same) && b.eval(same),
            Expr::Or(a, b) => a.eval(same) || b.eval(same),
            Expr::Not(a) => !a.eval(same),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Eq(u, v) => write!(f, "({u}={v})"),
            Expr::Neq(u, v) => write!(f, "({u}!={v})"),
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
            Expr::Not(a) => write!(f, "!{a}"),
        }
    }
}

/// An equality formula together with its positivity flag (only `=`, `∧`,
/// `∨`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqFormula {
    expr: Expr,
    positive: bool,
}

impl EqFormula {
    pub fn new(expr: Expr) -> Self {
        let positive = expr.positive();
        EqFormula { expr, positive }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.expr.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for EqFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl Serialize for EqFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A partition of a finite set of variables into non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    blocks: Vec<BTreeSet<String>>,
    #[serde(skip)]
    block_of: BTreeMap<String, usize>,
}

impl Partition {
    pub fn new<S: Into<String>>(blocks: impl IntoIterator<Item = impl IntoIterator<Item = S>>) -> Result<Self> {
        let mut out = Vec::new();
        let mut block_of = BTreeMap::new();
        for block in blocks {
            let block: BTreeSet<String> = block.into_iter().map(Into::into).collect();
            if block.is_empty() {
                return Err(Error::Precondition("partition with an empty block".into()));
            }
            for v in &block {
                if block_of.insert(v.clone(), out.len()).is_some() {
                    return Err(Error::DuplicateVariable(v.clone()));
                }
            }
            out.push(block);
        }
        Ok(Partition { blocks: out, block_of })
    }

    /// The partition with `vars[i]` in block `labels[i]` (a restricted
    /// growth string).
    fn from_labels(vars: &[String], labels: &[usize]) -> Self {
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![BTreeSet::new(); count];
        let mut block_of = BTreeMap::new();
        for (v, &l) in vars.iter().zip(labels) {
            blocks[l].insert(v.clone());
            block_of.insert(v.clone(), l);
        }
        Partition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[BTreeSet<String>] {
        &self.blocks
    }

    pub fn same_block(&self, u: &str, v: &str) -> Option<bool> {
        Some(self.block_of.get(u)? == self.block_of.get(v)?)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(String::as_str).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Atoms are true iff both variables share a block.
pub fn eval_under_partition(phi: &EqFormula, p: &Partition) -> Result<bool> {
    if let Some(v) = phi.variables().into_iter().find(|v| !p.block_of.contains_key(*v)) {
        return Err(Error::UnknownVariable(v.to_string()));
    }
    Ok(phi.expr.eval(&|u, v| p.same_block(u, v).expect("covered")))
}

/// `Q1 v1 … Qn vn . φ` over an infinite domain. Every matrix variable is
/// quantified; quantified variables need not occur in the matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EqSentence {
    prefix: Vec<(Quantifier, String)>,
    matrix: EqFormula,
}

impl EqSentence {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: EqFormula) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidPrefix(format!("variable `{v}` quantified twice")));
            }
        }
        if let Some(v) = matrix.variables().into_iter().find(|v| !seen.contains(v)) {
            return Err(Error::InvalidPrefix(format!("variable `{v}` is not quantified")));
        }
        Ok(EqSentence { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &EqFormula {
        &self.matrix
    }

    pub fn variables(&self) -> Vec<String> {
        self.prefix.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn is_positive(&self) -> bool {
        self.matrix.is_positive()
    }
}

impl fmt::Display for EqSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            write!(f, "{} {v} . ", q.symbol())?;
        }
        write!(f, "{}", self.matrix)
    }
}

/// `∃v1 … ∃vn (φ ∧ ⋀ v_i ≠ v_j)` over all pairs `i < j` with `v_j`
/// universal. No positivity check.
pub fn existential_closure(s: &EqSentence) -> EqSentence {
    let mut expr = s.matrix.expr.clone();
    for (j, (q, vj)) in s.prefix.iter().enumerate() {
        if *q == Quantifier::Forall {
            for (_, vi) in &s.prefix[..j] {
                expr = Expr::and(expr, Expr::neq(vi, vj));
            }
        }
    }
    EqSentence {
        prefix: s.prefix.iter().map(|(_, v)| (Quantifier::Exists, v.clone())).collect(),
        matrix: EqFormula::new(expr),
    }
}

/// [`existential_closure`] for positive matrices, where it preserves truth.
pub fn positive_qcsp_reduce(s: &EqSentence) -> Result<EqSentence> {
    if !s.is_positive() {
        return Err(Error::Precondition("matrix uses negation or disequality".into()));
    }
    Ok(existential_closure(s))
}

/// Visit restricted growth strings of length `n` in lexicographic order
/// until `f` returns true.
fn any_rgs(n: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(labels: &mut Vec<usize>, n: usize, max: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if labels.len() == n {
            return f(labels);
        }
        let limit = if labels.is_empty() { 0 } else { max + 1 };
        for l in 0..=limit {
            labels.push(l);
            let found = go(labels, n, max.max(l), f);
            labels.pop();
            if found {
                return true;
            }
        }
        false
    }
    go(&mut Vec::with_capacity(n), n, 0, f)
}

/// Some partition of the variables satisfies the matrix (quantifiers are
/// ignored). Returns the first such partition in restricted-growth order.
pub fn satisfying_partition(s: &EqSentence, budget: &Budget) -> Result<Option<Partition>> {
    let vars = s.variables();
    budget.check_eq_vars(vars.len())?;
    let mut found = None;
    any_rgs(vars.len(), &mut |labels| {
        let p = Partition::from_labels(&vars, labels);
        let ok = s.matrix.expr.eval(&|u, v| p.same_block(u, v).expect("covered"));
        if ok {
            found = Some(p);
        }
        ok
    });
    Ok(found)
}

/// Decide a positive sentence via the satisfiability of its existential
/// closure.
pub fn decide_positive_qcsp(s: &EqSentence, budget: &Budget) -> Result<bool> {
    Ok(satisfying_partition(&positive_qcsp_reduce(s)?, budget)?.is_some())
}

/// Game evaluation over equality types: the i-th variable either joins the
/// class of an earlier variable or is fresh. Accepts any matrix.
pub fn game_oracle_eval(s: &EqSentence, budget: &Budget) -> Result<bool> {
    budget.check_eq_vars(s.prefix.len())?;
    let index: BTreeMap<&str, usize> = s.prefix.iter().enumerate().map(|(i, (_, v))| (v.as_str(), i)).collect();

    fn go(s: &EqSentence, index: &BTreeMap<&str, usize>, labels: &mut Vec<usize>, classes: usize) -> bool {
        let pos = labels.len();
        if pos == s.prefix.len() {
            return s.matrix.expr.eval(&|u, v| labels[index[u]] == labels[index[v]]);
        }
        let mut branch = |l: usize| {
            labels.push(l);
            let r = go(s, index, labels, classes.max(l + 1));
            labels.pop();
            r
        };
        match s.prefix[pos].0 {
            Quantifier::Forall => (0..=classes).all(&mut branch),
            Quantifier::Exists => (0..=classes).any(&mut branch),
        }
    }
    Ok(go(s, &index, &mut Vec::new(), 0))
}

/// Parser for `A x . E y . ((x=y) | !(x!=z) & (y=z))`; `!` binds tighter
/// than `&`, which binds tighter than `|`.
struct Parser {
    chars: Vec<char>,
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Token {
    Ident(String),
    Dot,
    Eq,
    Neq,
    And,
    Or,
    Not,
    Open,
    Close,
}

impl Parser {
    fn location(&self, at: usize) -> (usize, usize) {
        let before: String = self.chars[..at].iter().collect();
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn error(&self, at: usize, msg: impl Into<String>) -> Error {
        let (line, column) = self.location(at);
        Error::syntax(line, column, msg)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    /// Next token and its start, without consuming it.
    fn peek(&mut self) -> Result<Option<(Token, usize, usize)>> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.chars.get(start) else {
            return Ok(None);
        };
        let next = self.chars.get(start + 1).copied();
        let (tok, len) = match c {
            '.' => (Token::Dot, 1),
            '=' => (Token::Eq, 1),
            '!' if next == Some('=') => (Token::Neq, 2),
            '!' => (Token::Not, 1),
            '&' => (Token::And, 1),
            '|' => (Token::Or, 1),
            '(' => (Token::Open, 1),
            ')' => (Token::Close, 1),
            c if c.is_alphanumeric() || c == '_' => {
                let mut end = start;
                while self
                    .chars
                    .get(end)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '\'')
                {
                    end += 1;
                }
                (Token::Ident(self.chars[start..end].iter().collect()), end - start)
            }
            other => return Err(self.error(start, format!("unexpected character `{other}`"))),
        };
        Ok(Some((tok, start, len)))
    }

    fn next(&mut self) -> Result<Option<(Token, usize)>> {
        Ok(self.peek()?.map(|(t, start, len)| {
            self.pos = start + len;
            (t, start)
        }))
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        match self.next()? {
            Some((t, _)) if t == want => Ok(()),
            Some((_, at)) => Err(self.error(at, format!("expected {what}"))),
            None => Err(self.error(self.chars.len(), format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next()? {
            Some((Token::Ident(s), _)) => Ok(s),
            Some((_, at)) => Err(self.error(at, "expected a variable")),
            None => Err(self.error(self.chars.len(), "expected a variable, found end of input")),
        }
    }

    fn prefix(&mut self) -> Result<Vec<(Quantifier, String)>> {
        let mut out = Vec::new();
        loop {
            let save = self.pos;
            let q = match self.next()? {
                Some((Token::Ident(s), _)) if s == "A" => Quantifier::Forall,
                Some((Token::Ident(s), _)) if s == "E" => Quantifier::Exists,
                _ => {
                    self.pos = save;
                    return Ok(out);
                }
            };
            // `A = x` is an atom over a variable named A
            if !matches!(self.peek()?, Some((Token::Ident(_), ..))) {
                self.pos = save;
                return Ok(out);
            }
            let v = self.ident()?;
            self.expect(Token::Dot, "`.` after quantified variable")?;
            out.push((q, v));
        }
    }

    fn or(&mut self) -> Result<Expr> {
        let mut e = self.and()?;
        while matches!(self.peek()?, Some((Token::Or, ..))) {
            self.next()?;
            e = Expr::or(e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while matches!(self.peek()?, Some((Token::And, ..))) {
            self.next()?;
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek()? {
            Some((Token::Not, ..)) => {
                self.next()?;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some((Token::Open, ..)) => {
                self.next()?;
                let e = self.or()?;
                self.expect(Token::Close, "`)`")?;
                Ok(e)
            }
            _ => {
                let u = self.ident()?;
                match self.next()? {
                    Some((Token::Eq, _)) => Ok(Expr::Eq(u, self.ident()?)),
                    Some((Token::Neq, _)) => Ok(Expr::Neq(u, self.ident()?)),
                    Some((_, at)) => Err(self.error(at, "expected `=` or `!=`")),
                    None => Err(self.error(self.chars.len(), "expected `=` or `!=`, found end of input")),
                }
            }
        }
    }
}

impl FromStr for EqSentence {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
        };
        let prefix = p.prefix()?;
        let expr = p.or()?;
        if let Some((_, at, _)) = p.peek()? {
            return Err(p.error(at, "unexpected input after formula"));
        }
        EqSentence::new(prefix, EqFormula::new(expr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> EqSentence {
        text.parse().unwrap()
    }

    fn sfun() -> EqFormula {
        // S(w,x,y,z) = ((w=x) ∧ (x=y)) ∨ (y=z)
        EqFormula::new(Expr::or(Expr::and(Expr::eq("w", "x"), Expr::eq("x", "y")), Expr::eq("y", "z")))
    }

    #[test]
    fn partition_semantics() {
        let p = Partition::new([vec!["w", "x", "y"], vec!["z"]]).unwrap();
        assert!(eval_under_partition(&sfun(), &p).unwrap());
        let q = Partition::new([vec!["w"], vec!["x"], vec!["y"], vec!["z"]]).unwrap();
        assert!(!eval_under_partition(&sfun(), &q).unwrap());
        let refl = EqFormula::new(Expr::eq("x", "x"));
        assert!(eval_under_partition(&refl, &q).unwrap());
        assert!(matches!(
            eval_under_partition(&sfun(), &Partition::new([vec!["w"]]).unwrap()),
            Err(Error::UnknownVariable(_))
        ));
        assert!(Partition::new([vec!["a"], vec!["a"]]).is_err());
    }

    #[test]
    fn reduction_shape() {
        let r = positive_qcsp_reduce(&s("E v1 . A v2 . (v1=v2)")).unwrap();
        assert_eq!(r.to_string(), "E v1 . E v2 . ((v1=v2) & (v1!=v2))");
        let all_e = s("E a . E b . (a=b)");
        assert_eq!(positive_qcsp_reduce(&all_e).unwrap(), all_e);
        let aa = positive_qcsp_reduce(&s("A v1 . A v2 . (v1=v2)")).unwrap();
        assert_eq!(aa.to_string(), "E v1 . E v2 . ((v1=v2) & (v1!=v2))");
        assert!(positive_qcsp_reduce(&s("A u . (u!=u)")).is_err());
    }

    #[test]
    fn decisions() {
        let b = Budget::default();
        for (text, truth) in [
            ("A w . E x . (w=x)", true),
            ("A w . A y . (w=y)", false),
            ("E v1 . A v2 . E v3 . ((v1=v3) | (v2=v3))", true),
        ] {
            assert_eq!(decide_positive_qcsp(&s(text), &b).unwrap(), truth, "{text}");
            assert_eq!(game_oracle_eval(&s(text), &b).unwrap(), truth, "{text}");
        }
        assert!(game_oracle_eval(&s("A w . E x . (w!=x)"), &b).unwrap());
    }

    #[test]
    fn disequality_counterexample() {
        let b = Budget::default();
        let bad = s("A u . A v . (u!=v)");
        assert!(!game_oracle_eval(&bad, &b).unwrap());
        assert!(satisfying_partition(&existential_closure(&bad), &b).unwrap().is_some());
    }

    #[test]
    fn rgs_counts_are_bell_numbers() {
        for (n, bell) in [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let mut count = 0;
            any_rgs(n, &mut |_| {
                count += 1;
                false
            });
            assert_eq!(count, bell);
        }
    }

    #[test]
    fn parser() {
        // free variables are rejected
        assert!(matches!(
            "A x . E y . ((x=y) | ((x=z) & (y=z)))".parse::<EqSentence>(),
            Err(Error::InvalidPrefix(_))
        ));
        let e = s("A x . E y . E z . ((x=y) | ((x=z) & (y=z)))");
        assert!(e.is_positive());
        assert_eq!(e.to_string().parse::<EqSentence>().unwrap(), e);
        let e = s("A x . E y . E z . x = y | !x != z & y = z");
        assert!(!e.is_positive());
        assert_eq!(e.to_string().parse::<EqSentence>().unwrap(), e);
        let e = s("E A . (A = A)");
        assert_eq!(e.variables(), ["A"]);
        match "A x . (x = )".parse::<EqSentence>() {
            Err(Error::Syntax { line: 1, column, .. }) => assert_eq!(column, 12),
            other => panic!("{other:?}"),
        }
        assert!("A x . (x = x".parse::<EqSentence>().is_err());
        assert!("A x . (x = x) )".parse::<EqSentence>().is_err());
    }
}
