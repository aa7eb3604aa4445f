//! Polymorphisms, composition, essentially unary operations and the
//! extraction of one of the four boolean generators from any operation that
//! is not essentially unary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::model::{all_tuples, ConstraintLanguage, Operation, Relation, Tuple, Value};

/// Named boolean operations. Projections use 0-based coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedOp {
    Const0,
    Const1,
    And,
    Or,
    Majority,
    Minority,
    Not,
    Xor,
    Proj { index: usize, arity: usize },
}

impl NamedOp {
    pub fn arity(self) -> usize {
        match self {
            NamedOp::Const0 | NamedOp::Const1 | NamedOp::Not => 1,
            NamedOp::And | NamedOp::Or | NamedOp::Xor => 2,
            NamedOp::Majority | NamedOp::Minority => 3,
            NamedOp::Proj { arity, .. } => arity,
        }
    }

    /// The table over `{0,1}`.
    pub fn operation(self) -> Operation {
        let f = |x: &[Value]| -> Value {
            match self {
                NamedOp::Const0 => 0,
                NamedOp::Const1 => 1,
                NamedOp::And => x[0] & x[1],
                NamedOp::Or => x[0] | x[1],
                NamedOp::Majority => (x[0] & x[1]) | (x[0] & x[2]) | (x[1] & x[2]),
                NamedOp::Minority => x[0] ^ x[1] ^ x[2],
                NamedOp::Not => 1 - x[0],
                NamedOp::Xor => x[0] ^ x[1],
                NamedOp::Proj { index, .. } => x[index],
            }
        };
        if let NamedOp::Proj { index, arity } = self {
            assert!(index < arity && arity > 0, "bad projection");
        }
        Operation::from_fn(self.arity(), 2, f).expect("named operations are well formed")
    }
}

impl fmt::Display for NamedOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedOp::Const0 => f.write_str("const0"),
            NamedOp::Const1 => f.write_str("const1"),
            NamedOp::And => f.write_str("and"),
            NamedOp::Or => f.write_str("or"),
            NamedOp::Majority => f.write_str("majority"),
            NamedOp::Minority => f.write_str("minority"),
            NamedOp::Not => f.write_str("not"),
            NamedOp::Xor => f.write_str("xor"),
            NamedOp::Proj { index, arity } => write!(f, "proj({index},{arity})"),
        }
    }
}

/// The six operations of the boolean dichotomy, in dispatch priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchaeferOp {
    Const0,
    Const1,
    And,
    Or,
    Majority,
    Minority,
}

impl SchaeferOp {
    pub const ALL: [SchaeferOp; 6] = [
        SchaeferOp::Const0,
        SchaeferOp::Const1,
        SchaeferOp::And,
        SchaeferOp::Or,
        SchaeferOp::Majority,
        SchaeferOp::Minority,
    ];

    pub fn named(self) -> NamedOp {
        match self {
            SchaeferOp::Const0 => NamedOp::Const0,
            SchaeferOp::Const1 => NamedOp::Const1,
            SchaeferOp::And => NamedOp::And,
            SchaeferOp::Or => NamedOp::Or,
            SchaeferOp::Majority => NamedOp::Majority,
            SchaeferOp::Minority => NamedOp::Minority,
        }
    }

    pub fn operation(self) -> Operation {
        self.named().operation()
    }

    pub fn name(self) -> &'static str {
        match self {
            SchaeferOp::Const0 => "const0",
            SchaeferOp::Const1 => "const1",
            SchaeferOp::And => "and",
            SchaeferOp::Or => "or",
            SchaeferOp::Majority => "majority",
            SchaeferOp::Minority => "minority",
        }
    }
}

impl fmt::Display for SchaeferOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sequence of tuples whose coordinate-wise image leaves the relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub relation: String,
    pub tuples: Vec<Tuple>,
    pub image: Tuple,
}

/// The first violating sequence (tuples taken in lexicographic order, first
/// argument most significant), if any.
pub fn check_relation(f: &Operation, rel: &Relation) -> Result<Option<Violation>> {
    if f.domain_size() != rel.domain_size() {
        return Err(Error::DomainMismatch {
            left: f.domain_size(),
            right: rel.domain_size(),
        });
    }
    let tuples: Vec<&Tuple> = rel.tuples().collect();
    if tuples.is_empty() {
        return Ok(None);
    }
    let m = f.arity();
    let mut idx = vec![0usize; m];
    loop {
        let seq: Vec<&Tuple> = idx.iter().map(|&i| tuples[i]).collect();
        let image = f.apply_coordinatewise(&seq)?;
        if !rel.contains(&image) {
            return Ok(Some(Violation {
                relation: rel.name().to_string(),
                tuples: seq.into_iter().cloned().collect(),
                image,
            }));
        }
        // odometer, last position fastest
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < tuples.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `None` when `f` preserves every relation, otherwise the first violation
/// (relations in name order).
pub fn check_polymorphism(f: &Operation, lang: &ConstraintLanguage) -> Result<Option<Violation>> {
    if f.domain_size() != lang.domain_size() {
        return Err(Error::DomainMismatch {
            left: f.domain_size(),
            right: lang.domain_size(),
        });
    }
    for rel in lang.relations() {
        if let Some(v) = check_relation(f, rel)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

pub fn is_polymorphism(f: &Operation, lang: &ConstraintLanguage) -> Result<bool> {
    Ok(check_polymorphism(f, lang)?.is_none())
}

/// Constraints of the indicator problem: variables are the points of `D^m`
/// (by lexicographic rank); for each relation and each `m`-sequence of its
/// tuples, the column points must map into the relation.
fn indicator_constraints<'a>(
    relations: impl Iterator<Item = &'a Relation>,
    d: usize,
    m: usize,
) -> Vec<(&'a Relation, Vec<usize>)> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rel in relations {
        let tuples: Vec<&Tuple> = rel.tuples().collect();
        if tuples.is_empty() {
            continue;
        }
        let total = tuples.len().pow(m as u32);
        for mut code in 0..total {
            let mut seq = vec![0usize; m];
            for slot in seq.iter_mut().rev() {
                *slot = code % tuples.len();
                code /= tuples.len();
            }
            let scope: Vec<usize> = (0..rel.arity())
                .map(|j| seq.iter().fold(0, |acc, &s| acc * d + usize::from(tuples[s][j])))
                .collect();
            if seen.insert((rel.name(), scope.clone())) {
                out.push((rel, scope));
            }
        }
    }
    out
}

/// All arity-`m` polymorphisms of `lang`, in lexicographic order of their
/// tables.
pub fn polymorphisms_of_arity(
    lang: &ConstraintLanguage,
    m: usize,
    budget: &Budget,
) -> Result<Vec<Operation>> {
    if m == 0 {
        return Err(Error::ZeroArity);
    }
    let d = lang.domain_size();
    let points = budget.check_op_table(d, m)?;
    let constraints = indicator_constraints(lang.relations(), d, m);
    // constraints checked once their last point is assigned
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); points];
    for (ci, (_, scope)) in constraints.iter().enumerate() {
        by_last[*scope.iter().max().expect("arity >= 1")].push(ci);
    }
    let mut table = vec![0 as Value; points];
    let mut out = Vec::new();
    let mut buf = Vec::new();
    fn search(
        pos: usize,
        d: usize,
        m: usize,
        table: &mut Vec<Value>,
        by_last: &[Vec<usize>],
        constraints: &[(&Relation, Vec<usize>)],
        buf: &mut Tuple,
        out: &mut Vec<Operation>,
    ) {
        if pos == table.len() {
            out.push(Operation::new(m, d, table.clone()).expect("valid table"));
            return;
        }
        for v in 0..d as Value {
            table[pos] = v;
            let ok = by_last[pos].iter().all(|&ci| {
                let (rel, scope) = &constraints[ci];
                buf.clear();
                buf.extend(scope.iter().map(|&p| table[p]));
                rel.contains(buf)
            });
            if ok {
                search(pos + 1, d, m, table, by_last, constraints, buf, out);
            }
        }
    }
    search(0, d, m, &mut table, &by_last, &constraints, &mut buf, &mut out);
    Ok(out)
}

/// `f(x_1, …, x_m) = inner(x_coordinate)` for all inputs. Coordinates are
/// 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssentiallyUnaryWitness {
    pub coordinate: usize,
    pub inner: Operation,
}

pub fn essentially_unary_witness(f: &Operation) -> Option<EssentiallyUnaryWitness> {
    let d = f.domain_size();
    let m = f.arity();
    (0..m).find_map(|i| {
        let inner_table: Vec<Value> = (0..d as Value)
            .map(|v| {
                let mut x = vec![0; m];
                x[i] = v;
                f.eval(&x)
            })
            .collect();
        all_tuples(d, m)
            .all(|x| f.eval(&x) == inner_table[usize::from(x[i])])
            .then(|| EssentiallyUnaryWitness {
                coordinate: i,
                inner: Operation::new(1, d, inner_table).expect("valid table"),
            })
    })
}

/// Whether `f` is essentially unary through a bijection.
pub fn acts_as_permutation(f: &Operation) -> bool {
    essentially_unary_witness(f).is_some_and(|w| {
        let mut seen = vec![false; f.domain_size()];
        for &v in w.inner.table() {
            seen[usize::from(v)] = true;
        }
        seen.into_iter().all(|s| s)
    })
}

/// `x ↦ f(g_1(x), …, g_n(x))`.
pub fn compose(f: &Operation, gs: &[Operation]) -> Result<Operation> {
    if gs.len() != f.arity() {
        return Err(Error::ArityMismatch(format!(
            "compose: outer arity {} with {} inner operations",
            f.arity(),
            gs.len()
        )));
    }
    let m = gs[0].arity();
    let d = f.domain_size();
    for g in gs {
        if g.arity() != m {
            return Err(Error::ArityMismatch(
                "compose: inner operations differ in arity".into(),
            ));
        }
        if g.domain_size() != d {
            return Err(Error::DomainMismatch {
                left: d,
                right: g.domain_size(),
            });
        }
    }
    let mut args = vec![0; gs.len()];
    Operation::from_fn(m, d, |x| {
        for (a, g) in args.iter_mut().zip(gs) {
            *a = g.eval(x);
        }
        f.eval(&args)
    })
}

fn proj(i: usize, m: usize) -> Operation {
    NamedOp::Proj { index: i, arity: m }.operation()
}

fn is_projection(f: &Operation) -> Option<usize> {
    (0..f.arity()).find(|&i| *f == proj(i, f.arity()))
}

/// Identify coordinate `j` with coordinate `i < j`; the result drops
/// coordinate `j`.
fn identify(f: &Operation, i: usize, j: usize) -> Operation {
    let m = f.arity();
    let gs: Vec<Operation> = (0..m)
        .map(|c| {
            let src = if c == j { i } else { c };
            proj(if src > j { src - 1 } else { src }, m - 1)
        })
        .collect();
    compose(f, &gs).expect("consistent arities")
}

/// One of `and`, `or`, `majority`, `minority` generated from `f`, following
/// the case analysis of the minimal clones over `{0,1}`.
pub fn derive_schaefer_generator(f: &Operation) -> Result<SchaeferOp> {
    if f.domain_size() != 2 {
        return Err(Error::DomainMismatch {
            left: f.domain_size(),
            right: 2,
        });
    }
    if essentially_unary_witness(f).is_some() {
        return Err(Error::Precondition(
            "operation is essentially unary".into(),
        ));
    }
    let m = f.arity();
    let diag = f.diagonal();
    let check = |op: SchaeferOp, table: Operation| -> Result<SchaeferOp> {
        if table == op.operation() {
            Ok(op)
        } else {
            Err(Error::Internal(format!("derived table is not {op}")))
        }
    };

    if f.is_constant() {
        unreachable!("constant operations are essentially unary");
    }
    if diag.is_constant() {
        let c = diag.table()[0];
        // lexicographically first input where f differs from its diagonal value
        let a = all_tuples(2, m)
            .find(|x| f.eval(x) != c)
            .expect("f is not constant");
        // g(x, y) = f(x where a is 1, y where a is 0)
        let gs: Vec<Operation> = a.iter().map(|&ai| proj(if ai == 1 { 0 } else { 1 }, 2)).collect();
        let g = compose(f, &gs)?;
        let x3 = proj(0, 3);
        let g_yz = compose(&g, &[proj(1, 3), proj(2, 3)])?;
        let g_xy = compose(&g, &[proj(0, 2), proj(1, 2)])?;
        return if g.eval(&[0, 1]) != c {
            // exclusive or, or its complement
            check(SchaeferOp::Minority, compose(&g, &[x3, g_yz])?)
        } else if c == 0 {
            // g = x ∧ ¬y
            check(SchaeferOp::And, compose(&g, &[proj(0, 2), g_xy])?)
        } else {
            // g = ¬x ∨ y
            check(SchaeferOp::Or, compose(&g, &[g_xy, proj(1, 2)])?)
        };
    }

    let mut g = if f.is_idempotent() {
        f.clone()
    } else {
        compose(&diag, std::slice::from_ref(f))?
    };
    'descent: loop {
        let k = g.arity();
        if k == 2 {
            return match (g.eval(&[0, 1]), g.eval(&[1, 0])) {
                (0, 0) => check(SchaeferOp::And, g),
                (1, 1) => check(SchaeferOp::Or, g),
                _ => Err(Error::Internal("binary idempotent projection reached".into())),
            };
        }
        for i in 0..k {
            for j in i + 1..k {
                let h = identify(&g, i, j);
                if is_projection(&h).is_none() {
                    g = h;
                    continue 'descent;
                }
            }
        }
        break;
    }
    if g.arity() != 3 {
        return Err(Error::Internal(format!(
            "every identification of an arity-{} operation is a projection",
            g.arity()
        )));
    }
    // For each pair (p, q), whether identifying them yields the identified
    // variable (x) rather than the remaining one (y).
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let mut to_x = [false; 3];
    for (slot, &(p, q, _)) in to_x.iter_mut().zip(&pairs) {
        let h = identify(&g, p, q);
        // the identified variable sits at position p of the reduced operation
        *slot = match is_projection(&h) {
            Some(idx) => idx == p,
            None => return Err(Error::Internal("arity was not minimal".into())),
        };
    }
    match to_x.iter().filter(|&&b| b).count() {
        3 => check(SchaeferOp::Majority, g),
        0 => check(SchaeferOp::Minority, g),
        1 => {
            let (p, q, r) = pairs[to_x.iter().position(|&b| b).expect("one pair")];
            let (x, y, z) = (proj(0, 3), proj(1, 3), proj(2, 3));
            let mut inner = vec![x.clone(), x.clone(), x.clone()];
            inner[p] = x.clone();
            inner[q] = z.clone();
            inner[r] = y;
            let inner = compose(&g, &inner)?;
            let mut outer = vec![x.clone(), x.clone(), x.clone()];
            outer[p] = x;
            outer[q] = z;
            outer[r] = inner;
            check(SchaeferOp::Majority, compose(&g, &outer)?)
        }
        _ => Err(Error::Internal("idempotent ternary projection reached".into())),
    }
}
