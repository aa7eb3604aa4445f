//! Relations, operations, constraint languages and (quantified) instances.
//!
//! Domain values are small integers `0..d`; over the boolean domain `0` is
//! false and `1` is true. All types are immutable once built and validated on
//! construction, so downstream code never re-checks arities or ranges.

mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{
    parse_instance, parse_language, parse_qcsp, write_instance, write_language, write_qcsp,
};

/// A domain element.
pub type Value = u8;

/// A tuple of domain elements. Relations store them in lexicographic order.
pub type Tuple = Vec<Value>;

fn check_domain(domain_size: usize) -> Result<()> {
    if domain_size < 2 {
        return Err(Error::DomainTooSmall(domain_size));
    }
    if domain_size > usize::from(Value::MAX) + 1 {
        return Err(Error::ValueOutOfDomain {
            value: domain_size - 1,
            domain_size: usize::from(Value::MAX) + 1,
        });
    }
    Ok(())
}

/// Iterate `D^k` in lexicographic order.
pub fn all_tuples(domain_size: usize, arity: usize) -> impl Iterator<Item = Tuple> {
    let total = crate::budget::checked_pow(domain_size, arity).expect("tuple space overflow");
    (0..total).map(move |mut rank| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = (rank % domain_size) as Value;
            rank /= domain_size;
        }
        t
    })
}

/// A finite relation: a set of equal-length tuples over `{0..d-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    name: String,
    arity: usize,
    domain_size: usize,
    tuples: BTreeSet<Tuple>,
}

impl Relation {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        domain_size: usize,
        tuples: impl IntoIterator<Item = Tuple>,
    ) -> Result<Self> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        check_domain(domain_size)?;
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::TupleArity {
                    relation: name,
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| usize::from(v) >= domain_size) {
                return Err(Error::ValueOutOfDomain {
                    value: v.into(),
                    domain_size,
                });
            }
            set.insert(t);
        }
        Ok(Relation {
            name,
            arity,
            domain_size,
            tuples: set,
        })
    }

    /// The relation `{t ∈ D^k : keep(t)}`.
    pub fn from_predicate(
        name: impl Into<String>,
        arity: usize,
        domain_size: usize,
        keep: impl Fn(&[Value]) -> bool,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        check_domain(domain_size)?;
        let tuples = all_tuples(domain_size, arity).filter(|t| keep(t));
        Self::new(name, arity, domain_size, tuples)
    }

    pub fn full(name: impl Into<String>, arity: usize, domain_size: usize) -> Result<Self> {
        Self::from_predicate(name, arity, domain_size, |_| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> impl ExactSizeIterator<Item = &Tuple> + Clone {
        self.tuples.iter()
    }

    pub fn tuple_set(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.tuples.contains(t)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Relation {
        Relation {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Same tuple set, ignoring the name.
    pub fn same_tuples(&self, other: &Relation) -> bool {
        self.arity == other.arity
            && self.domain_size == other.domain_size
            && self.tuples == other.tuples
    }
}

/// A finitary operation `D^m → D` stored as a value table.
///
/// Entry `r` of the table is the value on the input tuple whose lexicographic
/// rank is `r` (first argument most significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    arity: usize,
    domain_size: usize,
    table: Vec<Value>,
}

impl Operation {
    pub fn new(arity: usize, domain_size: usize, table: Vec<Value>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        check_domain(domain_size)?;
        let expected = crate::budget::checked_pow(domain_size, arity).ok_or(
            Error::BudgetExceeded {
                what: "operation table entries",
                requested: u128::MAX,
                limit: usize::MAX as u128,
            },
        )?;
        if table.len() != expected {
            return Err(Error::TableLength {
                expected,
                found: table.len(),
            });
        }
        if let Some(&v) = table.iter().find(|&&v| usize::from(v) >= domain_size) {
            return Err(Error::ValueOutOfDomain {
                value: v.into(),
                domain_size,
            });
        }
        Ok(Operation {
            arity,
            domain_size,
            table,
        })
    }

    /// Tabulate `f` on every input in lexicographic order.
    pub fn from_fn(
        arity: usize,
        domain_size: usize,
        mut f: impl FnMut(&[Value]) -> Value,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        check_domain(domain_size)?;
        let table = all_tuples(domain_size, arity).map(|t| f(&t)).collect();
        Self::new(arity, domain_size, table)
    }

    /// The projection onto coordinate `index` (0-based) of `arity` arguments.
    pub fn projection(index: usize, arity: usize, domain_size: usize) -> Result<Self> {
        if index >= arity {
            return Err(Error::ArityMismatch(format!(
                "projection index {index} out of range for arity {arity}"
            )));
        }
        Self::from_fn(arity, domain_size, |x| x[index])
    }

    pub fn constant(value: Value, arity: usize, domain_size: usize) -> Result<Self> {
        if usize::from(value) >= domain_size {
            return Err(Error::ValueOutOfDomain {
                value: value.into(),
                domain_size,
            });
        }
        Self::from_fn(arity, domain_size, |_| value)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub(crate) fn rank(&self, args: &[Value]) -> usize {
        args.iter()
            .fold(0, |acc, &v| acc * self.domain_size + usize::from(v))
    }

    /// Evaluate on one argument tuple. Panics if `args.len() != arity`.
    pub fn eval(&self, args: &[Value]) -> Value {
        assert_eq!(args.len(), self.arity, "operation arity mismatch");
        self.table[self.rank(args)]
    }

    /// The unary operation `d ↦ f(d, …, d)`.
    pub fn diagonal(&self) -> Operation {
        let table = (0..self.domain_size)
            .map(|d| self.eval(&vec![d as Value; self.arity]))
            .collect();
        Operation {
            arity: 1,
            domain_size: self.domain_size,
            table,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.diagonal()
            .table
            .iter()
            .enumerate()
            .all(|(d, &v)| usize::from(v) == d)
    }

    pub fn is_constant(&self) -> bool {
        self.table.windows(2).all(|w| w[0] == w[1])
    }

    /// Apply the operation coordinate-wise to `ts.len() == arity` tuples of a
    /// common length.
    pub fn apply_coordinatewise<T: AsRef<[Value]>>(&self, ts: &[T]) -> Result<Tuple> {
        if ts.len() != self.arity {
            return Err(Error::ArityMismatch(format!(
                "operation of arity {} applied to {} tuples",
                self.arity,
                ts.len()
            )));
        }
        let width = ts[0].as_ref().len();
        if ts.iter().any(|t| t.as_ref().len() != width) {
            return Err(Error::ArityMismatch(
                "tuples passed to a coordinate-wise application differ in length".into(),
            ));
        }
        let mut column = vec![0; self.arity];
        Ok((0..width)
            .map(|j| {
                for (slot, t) in column.iter_mut().zip(ts) {
                    *slot = t.as_ref()[j];
                }
                self.eval(&column)
            })
            .collect())
    }
}

/// A named set of relations over one domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintLanguage {
    domain_size: usize,
    relations: BTreeMap<String, Relation>,
}

impl ConstraintLanguage {
    pub fn new(domain_size: usize) -> Result<Self> {
        check_domain(domain_size)?;
        Ok(ConstraintLanguage {
            domain_size,
            relations: BTreeMap::new(),
        })
    }

    pub fn with_relations(
        domain_size: usize,
        relations: impl IntoIterator<Item = Relation>,
    ) -> Result<Self> {
        let mut lang = Self::new(domain_size)?;
        for r in relations {
            lang.insert(r)?;
        }
        Ok(lang)
    }

    pub fn insert(&mut self, relation: Relation) -> Result<()> {
        if relation.domain_size != self.domain_size {
            return Err(Error::DomainMismatch {
                left: self.domain_size,
                right: relation.domain_size,
            });
        }
        if self.relations.contains_key(&relation.name) {
            return Err(Error::DuplicateRelation(relation.name));
        }
        self.relations.insert(relation.name.clone(), relation);
        Ok(())
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn get(&self, name: &str) -> Result<&Relation> {
        self.relations
            .get(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    /// Relations ordered by name.
    pub fn relations(&self) -> impl ExactSizeIterator<Item = &Relation> + Clone {
        self.relations.values()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub(crate) fn require_boolean(&self) -> Result<()> {
        if self.domain_size == 2 {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.domain_size,
                right: 2,
            })
        }
    }
}

/// `R(v_1, …, v_k)`; repeated variables are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub relation: String,
    pub vars: Vec<String>,
}

impl Constraint {
    pub fn new<S: Into<String>>(relation: impl Into<String>, vars: impl IntoIterator<Item = S>) -> Self {
        Constraint {
            relation: relation.into(),
            vars: vars.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.vars.join(", "))
    }
}

/// A variable assignment. Iteration order is by variable name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, Value>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<Value> {
        self.0.get(var).copied()
    }

    pub fn insert(&mut self, var: impl Into<String>, value: Value) {
        self.0.insert(var.into(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Build from parallel slices of variables and values.
    pub fn from_values(vars: &[String], values: &[Value]) -> Self {
        Assignment(vars.iter().cloned().zip(values.iter().copied()).collect())
    }
}

impl<S: Into<String>> FromIterator<(S, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Whether `c` holds under `a`.
pub fn eval_constraint(c: &Constraint, lang: &ConstraintLanguage, a: &Assignment) -> Result<bool> {
    let rel = lang.get(&c.relation)?;
    if rel.arity() != c.vars.len() {
        return Err(Error::ConstraintArity {
            relation: c.relation.clone(),
            expected: rel.arity(),
            found: c.vars.len(),
        });
    }
    let t = c
        .vars
        .iter()
        .map(|v| a.get(v).ok_or_else(|| Error::Unassigned(v.clone())))
        .collect::<Result<Tuple>>()?;
    Ok(rel.contains(&t))
}

/// A CSP instance: ordered variables plus a list of constraints over a
/// language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspInstance {
    language: Arc<ConstraintLanguage>,
    variables: Vec<String>,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new<S: Into<String>>(
        language: Arc<ConstraintLanguage>,
        variables: impl IntoIterator<Item = S>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        for c in &constraints {
            let rel = language.get(&c.relation)?;
            if rel.arity() != c.vars.len() {
                return Err(Error::ConstraintArity {
                    relation: c.relation.clone(),
                    expected: rel.arity(),
                    found: c.vars.len(),
                });
            }
            if let Some(v) = c.vars.iter().find(|v| !seen.contains(v.as_str())) {
                return Err(Error::UnknownVariable(v.clone()));
            }
        }
        Ok(CspInstance {
            language,
            variables,
            constraints,
        })
    }

    pub fn language(&self) -> &ConstraintLanguage {
        &self.language
    }

    pub fn language_arc(&self) -> &Arc<ConstraintLanguage> {
        &self.language
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn domain_size(&self) -> usize {
        self.language.domain_size()
    }

    /// Whether `a` is total on the variables and satisfies every constraint.
    pub fn is_solution(&self, a: &Assignment) -> Result<bool> {
        for v in &self.variables {
            match a.get(v) {
                None => return Err(Error::Unassigned(v.clone())),
                Some(x) if usize::from(x) >= self.domain_size() => {
                    return Err(Error::ValueOutOfDomain {
                        value: x.into(),
                        domain_size: self.domain_size(),
                    })
                }
                Some(_) => {}
            }
        }
        for c in &self.constraints {
            if !eval_constraint(c, &self.language, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Same variables and constraints with one more constraint appended.
    pub fn with_constraint(&self, c: Constraint) -> Result<Self> {
        let mut constraints = self.constraints.clone();
        constraints.push(c);
        Self::new(self.language.clone(), self.variables.clone(), constraints)
    }

    pub(crate) fn compile(&self) -> Compiled<'_> {
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let constraints = self
            .constraints
            .iter()
            .map(|c| CompiledConstraint {
                relation: self.language.get(&c.relation).expect("validated"),
                scope: c.vars.iter().map(|v| index[v.as_str()]).collect(),
            })
            .collect();
        Compiled {
            num_vars: self.variables.len(),
            constraints,
        }
    }
}

/// Index-based view of an instance used by the search procedures.
pub(crate) struct Compiled<'a> {
    pub num_vars: usize,
    pub constraints: Vec<CompiledConstraint<'a>>,
}

pub(crate) struct CompiledConstraint<'a> {
    pub relation: &'a Relation,
    pub scope: Vec<usize>,
}

impl CompiledConstraint<'_> {
    pub fn holds(&self, values: &[Value]) -> bool {
        let t: Tuple = self.scope.iter().map(|&i| values[i]).collect();
        self.relation.contains(&t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantifier {
    #[serde(rename = "A")]
    Forall,
    #[serde(rename = "E")]
    Exists,
}

impl Quantifier {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantifier::Forall => "A",
            Quantifier::Exists => "E",
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Forall => "∀",
            Quantifier::Exists => "∃",
        })
    }
}

/// A quantified instance: a CSP instance plus a prefix quantifying every
/// variable exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QcspInstance {
    csp: CspInstance,
    prefix: Vec<(Quantifier, String)>,
}

impl QcspInstance {
    pub fn new(csp: CspInstance, prefix: Vec<(Quantifier, String)>) -> Result<Self> {
        let vars: BTreeSet<&str> = csp.variables().iter().map(String::as_str).collect();
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            if !vars.contains(v.as_str()) {
                return Err(Error::UnknownVariable(v.clone()));
            }
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidPrefix(format!("variable `{v}` quantified twice")));
            }
        }
        if let Some(v) = vars.iter().find(|v| !seen.contains(*v)) {
            return Err(Error::InvalidPrefix(format!("variable `{v}` is not quantified")));
        }
        Ok(QcspInstance { csp, prefix })
    }

    pub fn csp(&self) -> &CspInstance {
        &self.csp
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn language(&self) -> &ConstraintLanguage {
        self.csp.language()
    }

    pub fn constraints(&self) -> &[Constraint] {
        self.csp.constraints()
    }

    pub fn quantifier_of(&self, var: &str) -> Option<Quantifier> {
        self.prefix.iter().find(|(_, v)| v == var).map(|(q, _)| *q)
    }
}
