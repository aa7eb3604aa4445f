//! The majority algorithm: tighten every constraint on at most three
//! variables to its partial solutions until nothing changes, then build a
//! solution one variable at a time.
//!
//! The algorithm adds `D^l(W)` for every set `W` of at most three variables.
//! Those tables are kept as bitmasks, one per sorted variable set. Original
//! constraints on at most three distinct variables are folded into the table
//! of their variable set: after their first tightening both describe the same
//! set of partial solutions, and the fixpoint reached by the tightening is the
//! greatest one regardless of processing order.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Assignment, CspInstance, Relation, Value};

/// Variable set (sorted indices, 1 to 3 of them) to bitmask over its
/// assignments; bit `r` is the assignment with rank `r`, first variable most
/// significant.
type Tables = BTreeMap<Vec<usize>, u8>;

fn rank_of(vars: &[usize], values: &dyn Fn(usize) -> Value) -> usize {
    vars.iter().fold(0, |acc, &v| acc * 2 + usize::from(values(v)))
}

/// Projection of a bitmask table on `set` onto `sub ⊆ set`.
fn project(set: &[usize], mask: u8, sub: &[usize]) -> u8 {
    let mut out = 0u8;
    for r in 0..1usize << set.len() {
        if mask >> r & 1 == 1 {
            let value = |v: usize| -> Value {
                let p = set.iter().position(|&x| x == v).expect("subset");
                ((r >> (set.len() - 1 - p)) & 1) as Value
            };
            out |= 1 << rank_of(sub, &value);
        }
    }
    out
}

fn subsets(set: &[usize]) -> Vec<Vec<usize>> {
    (1..1usize << set.len())
        .map(|bits| {
            set.iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Original constraints after compilation: the sorted set of distinct
/// variables and every assignment to them consistent with some tuple.
struct Wide {
    vars: Vec<usize>,
    assignments: Vec<Vec<Value>>,
}

/// State after the tightening phase.
pub struct MajorityState<'a> {
    inst: &'a CspInstance,
    tables: Tables,
    wide: Vec<Wide>,
}

fn compile(inst: &CspInstance) -> Result<(Tables, Vec<Wide>)> {
    inst.language().require_boolean()?;
    let n = inst.variables().len();
    let mut tables = Tables::new();
    for a in 0..n {
        tables.insert(vec![a], 0b11);
        for b in a + 1..n {
            tables.insert(vec![a, b], 0x0f);
            for c in b + 1..n {
                tables.insert(vec![a, b, c], 0xff);
            }
        }
    }
    let compiled = inst.compile();
    let mut wide = Vec::new();
    for c in &compiled.constraints {
        let vars: Vec<usize> = c.scope.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut assignments = BTreeSet::new();
        for t in c.relation.tuples() {
            let mut vals: BTreeMap<usize, Value> = BTreeMap::new();
            let consistent = c
                .scope
                .iter()
                .zip(t)
                .all(|(&v, &x)| *vals.entry(v).or_insert(x) == x);
            if consistent {
                assignments.insert(vals.into_values().collect::<Vec<_>>());
            }
        }
        if vars.len() <= 3 {
            let mut mask = 0u8;
            for a in &assignments {
                let value = |v: usize| a[vars.iter().position(|&x| x == v).expect("var")];
                mask |= 1 << rank_of(&vars, &value);
            }
            *tables.get_mut(&vars).expect("all small sets present") &= mask;
        } else {
            wide.push(Wide {
                vars,
                assignments: assignments.into_iter().collect(),
            });
        }
    }
    Ok((tables, wide))
}

/// Run the tightening phase. `None` means some relation became empty, so
/// the instance is unsatisfiable.
pub fn majority_tighten(inst: &CspInstance) -> Result<Option<MajorityState<'_>>> {
    super::require_polymorphism(inst.language(), crate::algebra::SchaeferOp::Majority)?;
    let (mut tables, wide) = compile(inst)?;
    if wide.iter().any(|w| w.assignments.is_empty()) || tables.values().any(|&m| m == 0) {
        return Ok(None);
    }
    // projections of the wide constraints are fixed
    let mut wide_proj: BTreeMap<Vec<usize>, u8> = BTreeMap::new();
    for w in &wide {
        for sub in subsets(&w.vars).into_iter().filter(|s| s.len() <= 3) {
            let mut mask = 0u8;
            for a in &w.assignments {
                let value = |v: usize| a[w.vars.iter().position(|&x| x == v).expect("var")];
                mask |= 1 << rank_of(&sub, &value);
            }
            *wide_proj.entry(sub).or_insert(0xff) &= mask;
        }
    }
    let keys: Vec<Vec<usize>> = tables.keys().cloned().collect();
    loop {
        // allowed[S] = intersection of projections onto S of every constraint
        // whose variables include S
        let mut allowed: BTreeMap<Vec<usize>, u8> = wide_proj.clone();
        for (set, &mask) in &tables {
            for sub in subsets(set) {
                *allowed.entry(sub.clone()).or_insert(0xff) &= project(set, mask, &sub);
            }
        }
        let mut changed = false;
        for set in &keys {
            let old = tables[set];
            let mut new = 0u8;
            for r in 0..1usize << set.len() {
                if old >> r & 1 == 0 {
                    continue;
                }
                let value = |v: usize| -> Value {
                    let p = set.iter().position(|&x| x == v).expect("member");
                    ((r >> (set.len() - 1 - p)) & 1) as Value
                };
                let ok = subsets(set).iter().all(|sub| {
                    allowed
                        .get(sub)
                        .is_none_or(|&m| m >> rank_of(sub, &value) & 1 == 1)
                });
                if ok {
                    new |= 1 << r;
                }
            }
            if new == 0 {
                return Ok(None);
            }
            if new != old {
                tables.insert(set.clone(), new);
                changed = true;
            }
        }
        if !changed {
            return Ok(Some(MajorityState { inst, tables, wide }));
        }
    }
}

impl MajorityState<'_> {
    /// The tightened tables as relations, keyed by their variable names.
    pub fn tables(&self) -> Vec<(Vec<String>, Relation)> {
        let names = self.inst.variables();
        self.tables
            .iter()
            .map(|(set, &mask)| {
                let k = set.len();
                let tuples = (0..1usize << k)
                    .filter(|r| mask >> r & 1 == 1)
                    .map(|r| (0..k).map(|p| ((r >> (k - 1 - p)) & 1) as Value).collect());
                let vars: Vec<String> = set.iter().map(|&i| names[i].clone()).collect();
                let rel = Relation::new(vars.join(","), k, 2, tuples).expect("valid table");
                (vars, rel)
            })
            .collect()
    }

    /// Whether `values` (defined on the first `len` declared variables) is a
    /// partial solution of the tightened instance.
    fn is_partial(&self, values: &[Value]) -> bool {
        let defined = values.len();
        let tables_ok = self.tables.iter().all(|(set, &mask)| {
            let sub: Vec<usize> = set.iter().copied().filter(|&v| v < defined).collect();
            sub.is_empty() || project(set, mask, &sub) >> rank_of(&sub, &|v| values[v]) & 1 == 1
        });
        tables_ok
            && self.wide.iter().all(|w| {
                w.assignments.iter().any(|a| {
                    w.vars
                        .iter()
                        .zip(a)
                        .all(|(&v, &x)| v >= defined || values[v] == x)
                })
            })
    }

    /// Extend a partial solution one declared variable at a time, trying
    /// values in increasing order.
    pub fn extend(&self) -> Result<Assignment> {
        let n = self.inst.variables().len();
        let mut values: Vec<Value> = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(0);
            if !self.is_partial(&values) {
                *values.last_mut().expect("pushed") = 1;
                if !self.is_partial(&values) {
                    return Err(Error::Internal(
                        "partial solution has no extension after tightening".into(),
                    ));
                }
            }
        }
        Ok(Assignment::from_values(self.inst.variables(), &values))
    }
}

pub fn majority_solve(inst: &CspInstance) -> Result<Option<Assignment>> {
    super::require_polymorphism(inst.language(), crate::algebra::SchaeferOp::Majority)?;
    if inst.variables().len() < 3 {
        return crate::oracle::brute_solve(inst, &crate::budget::Budget::default());
    }
    match majority_tighten(inst)? {
        None => Ok(None),
        Some(state) => state.extend().map(Some),
    }
}
