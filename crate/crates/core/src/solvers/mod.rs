//! Polynomial-time algorithms for boolean CSPs with one of the six
//! tractable polymorphisms, and a dispatcher choosing among them.

mod linear;
mod majority;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{is_polymorphism, SchaeferOp};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::model::{Assignment, ConstraintLanguage, CspInstance, Relation, Value};

pub use linear::{gaussian_solve, minority_solve, minority_system, minority_to_equations, LinearEquation};
pub use majority::{majority_solve, majority_tighten, MajorityState};

pub(crate) fn require_polymorphism(lang: &ConstraintLanguage, op: SchaeferOp) -> Result<()> {
    lang.require_boolean()?;
    if is_polymorphism(&op.operation(), lang)? {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{op} is not a polymorphism of the language")))
    }
}

/// Solving method, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "brute")]
    Brute,
    #[serde(rename = "const0")]
    Const0,
    #[serde(rename = "const1")]
    Const1,
    #[serde(rename = "ac-and")]
    AcAnd,
    #[serde(rename = "ac-or")]
    AcOr,
    #[serde(rename = "majority")]
    Majority,
    #[serde(rename = "minority")]
    Minority,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Brute,
        Method::Const0,
        Method::Const1,
        Method::AcAnd,
        Method::AcOr,
        Method::Majority,
        Method::Minority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Const0 => "const0",
            Method::Const1 => "const1",
            Method::AcAnd => "ac-and",
            Method::AcOr => "ac-or",
            Method::Majority => "majority",
            Method::Minority => "minority",
        }
    }

    /// The polymorphism the method relies on.
    pub fn requires(self) -> Option<SchaeferOp> {
        match self {
            Method::Brute => None,
            Method::Const0 => Some(SchaeferOp::Const0),
            Method::Const1 => Some(SchaeferOp::Const1),
            Method::AcAnd => Some(SchaeferOp::And),
            Method::AcOr => Some(SchaeferOp::Or),
            Method::Majority => Some(SchaeferOp::Majority),
            Method::Minority => Some(SchaeferOp::Minority),
        }
    }

    pub fn for_op(op: SchaeferOp) -> Method {
        match op {
            SchaeferOp::Const0 => Method::Const0,
            SchaeferOp::Const1 => Method::Const1,
            SchaeferOp::And => Method::AcAnd,
            SchaeferOp::Or => Method::AcOr,
            SchaeferOp::Majority => Method::Majority,
            SchaeferOp::Minority => Method::Minority,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Run one method. Non-brute methods check their polymorphism first.
pub fn solve_with(inst: &CspInstance, method: Method, budget: &Budget) -> Result<Option<Assignment>> {
    match method {
        Method::Brute => crate::oracle::brute_solve(inst, budget),
        Method::Const0 => solve_constant(inst, 0),
        Method::Const1 => solve_constant(inst, 1),
        Method::AcAnd => arc_consistency_solve(inst, Semilattice::And),
        Method::AcOr => arc_consistency_solve(inst, Semilattice::Or),
        Method::Majority => {
            require_polymorphism(inst.language(), SchaeferOp::Majority)?;
            majority_solve(inst)
        }
        Method::Minority => {
            require_polymorphism(inst.language(), SchaeferOp::Minority)?;
            minority_solve(inst)
        }
    }
}

/// With a constant polymorphism `b`, the instance is satisfiable iff every
/// constrained relation is non-empty, and then the all-`b` map is a solution.
pub fn solve_constant(inst: &CspInstance, b: Value) -> Result<Option<Assignment>> {
    let op = match b {
        0 => SchaeferOp::Const0,
        1 => SchaeferOp::Const1,
        _ => return Err(Error::ValueOutOfDomain { value: b.into(), domain_size: 2 }),
    };
    require_polymorphism(inst.language(), op)?;
    let any_empty = inst
        .constraints()
        .iter()
        .any(|c| inst.language().get(&c.relation).is_ok_and(Relation::is_empty));
    Ok((!any_empty).then(|| {
        Assignment::from_values(inst.variables(), &vec![b; inst.variables().len()])
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semilattice {
    And,
    Or,
}

impl Semilattice {
    fn op(self) -> SchaeferOp {
        match self {
            Semilattice::And => SchaeferOp::And,
            Semilattice::Or => SchaeferOp::Or,
        }
    }

    /// The value picked when both values remain.
    fn default_value(self) -> Value {
        match self {
            Semilattice::And => 0,
            Semilattice::Or => 1,
        }
    }
}

/// An instance whose constraint relations were replaced by subsets.
#[derive(Clone, Debug)]
pub struct TightenedInstance {
    /// One relation per constraint, in constraint order.
    pub relations: Vec<Relation>,
    /// The final domain of each declared variable, as a bitmask over values.
    pub domains: Vec<u8>,
}

impl TightenedInstance {
    /// The tightened instance as a stand-alone CSP instance whose relations
    /// are named `c0`, `c1`, … after their constraint.
    pub fn to_instance(&self, original: &CspInstance) -> Result<CspInstance> {
        let lang = ConstraintLanguage::with_relations(
            original.domain_size(),
            self.relations.iter().enumerate().map(|(i, r)| r.renamed(format!("c{i}"))),
        )?;
        let constraints = original
            .constraints()
            .iter()
            .enumerate()
            .map(|(i, c)| crate::model::Constraint::new(format!("c{i}"), c.vars.iter().cloned()))
            .collect();
        CspInstance::new(std::sync::Arc::new(lang), original.variables().to_vec(), constraints)
    }
}

/// Arc consistency to a fixpoint. `Err` side of the inner result carries the
/// index of a constraint whose relation became empty.
pub fn arc_consistency(inst: &CspInstance) -> Result<std::result::Result<TightenedInstance, usize>> {
    let compiled = inst.compile();
    let d = inst.domain_size();
    let full: u8 = if d >= 8 { u8::MAX } else { (1u8 << d) - 1 };
    let mut relations: Vec<Relation> = compiled.constraints.iter().map(|c| c.relation.clone()).collect();
    for (i, r) in relations.iter().enumerate() {
        if r.is_empty() {
            return Ok(Err(i));
        }
    }
    loop {
        let mut domains = vec![full; compiled.num_vars];
        for (c, r) in compiled.constraints.iter().zip(&relations) {
            for (pos, &v) in c.scope.iter().enumerate() {
                let proj = r.tuples().fold(0u8, |m, t| m | 1 << t[pos]);
                domains[v] &= proj;
            }
        }
        let mut changed = false;
        for (i, (c, r)) in compiled.constraints.iter().zip(relations.iter_mut()).enumerate() {
            let kept: Vec<_> = r
                .tuples()
                .filter(|t| c.scope.iter().zip(t.iter()).all(|(&v, &x)| domains[v] >> x & 1 == 1))
                .cloned()
                .collect();
            if kept.len() != r.len() {
                if kept.is_empty() {
                    return Ok(Err(i));
                }
                *r = Relation::new(r.name(), r.arity(), r.domain_size(), kept)?;
                changed = true;
            }
        }
        if !changed {
            return Ok(Ok(TightenedInstance { relations, domains }));
        }
    }
}

/// Arc consistency followed by the assignment read off the final domains.
pub fn arc_consistency_solve(inst: &CspInstance, s: Semilattice) -> Result<Option<Assignment>> {
    require_polymorphism(inst.language(), s.op())?;
    let Ok(t) = arc_consistency(inst)? else {
        return Ok(None);
    };
    let values: Vec<Value> = t
        .domains
        .iter()
        .map(|&dom| if dom == 0b11 { s.default_value() } else if dom == 0b10 { 1 } else { 0 })
        .collect();
    Ok(Some(Assignment::from_values(inst.variables(), &values)))
}

/// Outcome of [`dispatch_solve`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub satisfiable: bool,
    pub assignment: Option<Assignment>,
    pub method: Method,
}

/// The first of const0, const1, and, or, majority, minority that is a
/// polymorphism of the language.
pub fn dispatch_method(lang: &ConstraintLanguage) -> Result<Method> {
    lang.require_boolean()?;
    for op in SchaeferOp::ALL {
        if is_polymorphism(&op.operation(), lang)? {
            return Ok(Method::for_op(op));
        }
    }
    Err(Error::NoTractableMethod)
}

/// Solve with the method chosen by [`dispatch_method`]; the returned
/// assignment is re-checked against the constraints.
pub fn dispatch_solve(inst: &CspInstance) -> Result<SolveResult> {
    let method = dispatch_method(inst.language())?;
    let assignment = solve_with(inst, method, &Budget::default())?;
    if let Some(a) = &assignment {
        if !inst.is_solution(a)? {
            return Err(Error::Internal(format!("{method} returned a non-solution")));
        }
    }
    Ok(SolveResult {
        satisfiable: assignment.is_some(),
        assignment,
        method,
    })
}
