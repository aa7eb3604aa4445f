//! Linear equations over GF(2) and the minority algorithm.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebra::{check_relation, NamedOp};
use crate::error::{Error, Result};
use crate::model::{Assignment, CspInstance, Relation, Tuple, Value};

/// `v_1 ⊕ … ⊕ v_l = rhs`. Each variable occurs at most once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LinearEquation {
    pub vars: BTreeSet<String>,
    pub rhs: bool,
}

impl LinearEquation {
    /// Builds the equation, cancelling repeated variables in pairs.
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>, rhs: bool) -> Self {
        let mut set = BTreeSet::new();
        for v in vars {
            let v = v.into();
            if !set.remove(&v) {
                set.insert(v);
            }
        }
        LinearEquation { vars: set, rhs }
    }

    pub fn holds(&self, a: &Assignment) -> Result<bool> {
        let mut acc = false;
        for v in &self.vars {
            acc ^= a.get(v).ok_or_else(|| Error::Unassigned(v.clone()))? == 1;
        }
        Ok(acc == self.rhs)
    }
}

impl fmt::Display for LinearEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            f.write_str("0")?;
        } else {
            let vs: Vec<&str> = self.vars.iter().map(String::as_str).collect();
            f.write_str(&vs.join(" ⊕ "))?;
        }
        write!(f, " = {}", u8::from(self.rhs))
    }
}

/// Equations over coordinate positions: bit `i` of the mask is coordinate `i`.
type PositionEquation = (u64, bool);

/// Recursion on the first coordinate: split into the slices with first value
/// 0 and 1, and if both are non-empty translate the 0-slice equations by
/// `x'_i = x_i ⊕ (c⁰_i ⊕ c¹_i)·x_1`.
fn position_equations(tuples: &BTreeSet<Tuple>, arity: usize, offset: usize) -> Vec<PositionEquation> {
    if arity == 0 {
        return Vec::new();
    }
    let split = |b: Value| -> BTreeSet<Tuple> {
        tuples.iter().filter(|t| t[0] == b).map(|t| t[1..].to_vec()).collect()
    };
    let (r0, r1) = (split(0), split(1));
    let first = 1u64 << offset;
    let mut out: Vec<PositionEquation> = match (r0.is_empty(), r1.is_empty()) {
        (true, true) => unreachable!("only the top level can be empty"),
        (true, false) => {
            let mut e = vec![(first, true)];
            e.extend(position_equations(&r1, arity - 1, offset + 1));
            e
        }
        (false, true) => {
            let mut e = vec![(first, false)];
            e.extend(position_equations(&r0, arity - 1, offset + 1));
            e
        }
        (false, false) => {
            let c0 = r0.iter().next().expect("non-empty");
            let c1 = r1.iter().next().expect("non-empty");
            let mut shift = 0u64;
            for i in 0..arity - 1 {
                if c0[i] != c1[i] {
                    shift |= 1 << (offset + 1 + i);
                }
            }
            position_equations(&r0, arity - 1, offset + 1)
                .into_iter()
                .map(|(mask, rhs)| {
                    if (mask & shift).count_ones() % 2 == 1 {
                        (mask ^ first, rhs)
                    } else {
                        (mask, rhs)
                    }
                })
                .collect()
        }
    };
    out.retain(|&(mask, rhs)| mask != 0 || rhs);
    out
}

fn relation_position_equations(rel: &Relation) -> Result<Vec<PositionEquation>> {
    if rel.domain_size() != 2 {
        return Err(Error::DomainMismatch {
            left: rel.domain_size(),
            right: 2,
        });
    }
    if rel.arity() > 64 {
        return Err(Error::Precondition("relation arity above 64".into()));
    }
    if check_relation(&NamedOp::Minority.operation(), rel)?.is_some() {
        return Err(Error::Precondition(format!(
            "minority is not a polymorphism of `{}`",
            rel.name()
        )));
    }
    if rel.is_empty() {
        return Ok(vec![(0, true)]);
    }
    Ok(position_equations(rel.tuple_set(), rel.arity(), 0))
}

fn instantiate(eqs: &[PositionEquation], vars: &[String]) -> Vec<LinearEquation> {
    eqs.iter()
        .map(|&(mask, rhs)| {
            LinearEquation::new(
                (0..vars.len()).filter(|i| mask >> i & 1 == 1).map(|i| vars[i].clone()),
                rhs,
            )
        })
        .collect()
}

/// A system whose solution set over `vars` is exactly `rel`.
pub fn minority_to_equations(rel: &Relation, vars: &[String]) -> Result<Vec<LinearEquation>> {
    if vars.len() != rel.arity() {
        return Err(Error::ConstraintArity {
            relation: rel.name().to_string(),
            expected: rel.arity(),
            found: vars.len(),
        });
    }
    Ok(instantiate(&relation_position_equations(rel)?, vars))
}

/// Gaussian elimination over GF(2). Each incoming equation is reduced
/// against the pivots so far and pivots on its highest-indexed variable; the
/// system is kept reduced and free variables are set to 0.
pub fn gaussian_solve(eqs: &[LinearEquation], vars: &[String]) -> Result<Option<Assignment>> {
    let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let words = vars.len().div_ceil(64).max(1);
    let mut rows: Vec<(usize, Vec<u64>, bool)> = Vec::new();
    for eq in eqs {
        let mut bits = vec![0u64; words];
        for v in &eq.vars {
            let i = *index
                .get(v.as_str())
                .ok_or_else(|| Error::UnknownVariable(v.clone()))?;
            bits[i / 64] ^= 1 << (i % 64);
        }
        let mut rhs = eq.rhs;
        for (pivot, row, r) in &rows {
            if bits[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (b, x) in bits.iter_mut().zip(row) {
                    *b ^= x;
                }
                rhs ^= r;
            }
        }
        let Some(pivot) = bits
            .iter()
            .enumerate()
            .rfind(|(_, w)| **w != 0)
            .map(|(wi, w)| wi * 64 + 63 - w.leading_zeros() as usize)
        else {
            if rhs {
                return Ok(None);
            }
            continue;
        };
        for (_, row, r) in rows.iter_mut() {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, b) in row.iter_mut().zip(&bits) {
                    *x ^= b;
                }
                *r ^= rhs;
            }
        }
        rows.push((pivot, bits, rhs));
    }
    let mut values = vec![0 as Value; vars.len()];
    for (pivot, _, rhs) in &rows {
        values[*pivot] = Value::from(*rhs);
    }
    Ok(Some(Assignment::from_values(vars, &values)))
}

/// Translate every constraint into equations and solve the system.
pub fn minority_solve(inst: &CspInstance) -> Result<Option<Assignment>> {
    gaussian_solve(&minority_system(inst)?, inst.variables())
}

/// The linear system the minority algorithm solves.
pub fn minority_system(inst: &CspInstance) -> Result<Vec<LinearEquation>> {
    inst.language().require_boolean()?;
    let mut cache: HashMap<&str, Vec<PositionEquation>> = HashMap::new();
    let mut out = Vec::new();
    for c in inst.constraints() {
        if !cache.contains_key(c.relation.as_str()) {
            let rel = inst.language().get(&c.relation)?;
            cache.insert(&c.relation, relation_position_equations(rel)?);
        }
        out.extend(instantiate(&cache[c.relation.as_str()], &c.vars));
    }
    Ok(out)
}
