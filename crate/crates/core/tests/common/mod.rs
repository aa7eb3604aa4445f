//! Test-only oracles and generators, written independently of the library
//! algorithms they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use polycsp::model::{Constraint, ConstraintLanguage, Quantifier, Relation, Tuple, Value};
use polycsp::reductions::{Atom, FewDefinition, PpDefinition};
use rand::seq::SliceRandom;
use rand::Rng;

/// Every `m`-ary boolean table, as a value vector indexed by the argument
/// read as a binary number (first argument most significant).
pub fn all_boolean_tables(m: usize) -> impl Iterator<Item = Vec<Value>> {
    let points = 1usize << m;
    (0u64..1 << points).map(move |bits| (0..points).map(|i| (bits >> i & 1) as Value).collect())
}

fn rank(args: &[Value]) -> usize {
    args.iter().fold(0, |acc, &a| acc * 2 + a as usize)
}

/// Apply a boolean table coordinatewise to `ts`.
pub fn apply(table: &[Value], ts: &[&Tuple]) -> Tuple {
    let k = ts[0].len();
    (0..k)
        .map(|c| {
            let args: Vec<Value> = ts.iter().map(|t| t[c]).collect();
            table[rank(&args)]
        })
        .collect()
}

/// Every `m`-tuple of rows of `rel`, by repeated choice.
fn row_choices(rel: &Relation, m: usize) -> Vec<Vec<&Tuple>> {
    let rows: Vec<&Tuple> = rel.tuples().collect();
    let mut out: Vec<Vec<&Tuple>> = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p| {
                rows.iter().map(move |r| {
                    let mut q = p.clone();
                    q.push(*r);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn naive_is_polymorphism(table: &[Value], m: usize, lang: &ConstraintLanguage) -> bool {
    lang.relations().all(|rel| {
        rel.is_empty() || row_choices(rel, m).iter().all(|ts| rel.contains(&apply(table, ts)))
    })
}

/// `f(x) = g(x_i)` for some coordinate `i` and unary `g`.
pub fn naive_essentially_unary(table: &[Value], m: usize) -> bool {
    (0..m).any(|i| {
        let mut g: [Option<Value>; 2] = [None, None];
        (0..1usize << m).all(|x| {
            let xi = x >> (m - 1 - i) & 1;
            match g[xi] {
                None => {
                    g[xi] = Some(table[x]);
                    true
                }
                Some(v) => v == table[x],
            }
        })
    })
}

/// Essentially unary through a bijection of the domain.
pub fn naive_acts_as_permutation(table: &[Value], m: usize) -> bool {
    naive_essentially_unary(table, m) && table.contains(&0) && table.contains(&1)
}

/// `{ f(r_1, …, r_m) : f ∈ Pol^(m) }` with `r_1…r_m` the rows of `rel`: the
/// smallest pp-definable relation containing it. For empty `rel`, the
/// constant tuples admitted by every relation.
pub fn naive_pol_closure(rel: &Relation, lang: &ConstraintLanguage) -> BTreeSet<Tuple> {
    let rows: Vec<&Tuple> = rel.tuples().collect();
    let m = rows.len();
    if m == 0 {
        return (0..2)
            .filter(|&c| lang.relations().all(|r| r.contains(&vec![c; r.arity()])))
            .map(|c| vec![c; rel.arity()])
            .collect();
    }
    all_boolean_tables(m)
        .filter(|t| naive_is_polymorphism(t, m, lang))
        .map(|t| apply(&t, &rows))
        .collect()
}

/// Evaluate a few-definition (distinct free variables) by plain recursion
/// over the bound variables.
pub fn naive_eval_few(def: &FewDefinition, lang: &ConstraintLanguage) -> BTreeSet<Tuple> {
    let k = def.free_vars.len();
    let mut out = BTreeSet::new();
    for bits in 0..1u32 << k {
        let t: Tuple = (0..k).map(|i| (bits >> (k - 1 - i) & 1) as Value).collect();
        let mut env: BTreeMap<String, Value> = def.free_vars.iter().cloned().zip(t.iter().copied()).collect();
        if game(def, lang, 0, &mut env) {
            out.insert(t);
        }
    }
    out
}

fn game(def: &FewDefinition, lang: &ConstraintLanguage, i: usize, env: &mut BTreeMap<String, Value>) -> bool {
    if i == def.bound_vars.len() {
        return def.body.iter().all(|a| match a {
            Atom::Eq(u, v) => env[u] == env[v],
            Atom::Constraint(c) => {
                let t: Tuple = c.vars.iter().map(|v| env[v]).collect();
                lang.get(&c.relation).unwrap().contains(&t)
            }
        });
    }
    let (q, v) = &def.bound_vars[i];
    let saved = env.get(v).copied();
    let mut results = (0..2).map(|x| {
        env.insert(v.clone(), x);
        game(def, lang, i + 1, env)
    });
    let r = match q {
        Quantifier::Exists => results.any(|b| b),
        Quantifier::Forall => results.all(|b| b),
    };
    match saved {
        Some(x) => env.insert(v.clone(), x),
        None => env.remove(v),
    };
    r
}

/// A random definition of a `k`-ary relation (`k` in `1..=3`) with up to
/// `max_bound` bound variables, universal ones only when `universals`.
pub fn random_definition<R: Rng>(
    rng: &mut R,
    target: &str,
    lang: &ConstraintLanguage,
    max_bound: usize,
    universals: bool,
) -> FewDefinition {
    let k = rng.gen_range(1..=3);
    let free: Vec<String> = (1..=k).map(|i| format!("v{i}")).collect();
    let bound: Vec<(Quantifier, String)> = (1..=rng.gen_range(0..=max_bound))
        .map(|i| {
            let q = if universals && rng.gen_bool(0.4) { Quantifier::Forall } else { Quantifier::Exists };
            (q, format!("z{i}"))
        })
        .collect();
    let vars: Vec<String> = free.iter().cloned().chain(bound.iter().map(|(_, v)| v.clone())).collect();
    let rels: Vec<&Relation> = lang.relations().collect();
    let body = (0..rng.gen_range(1..=3))
        .map(|_| {
            if rng.gen_bool(0.15) {
                Atom::Eq(vars.choose(rng).unwrap().clone(), vars.choose(rng).unwrap().clone())
            } else {
                let r = rels.choose(rng).unwrap();
                let scope: Vec<String> = (0..r.arity()).map(|_| vars.choose(rng).unwrap().clone()).collect();
                Atom::Constraint(Constraint::new(r.name(), scope))
            }
        })
        .collect();
    FewDefinition {
        target: target.to_string(),
        free_vars: free,
        bound_vars: bound,
        body,
    }
}

pub fn random_pp_definition<R: Rng>(rng: &mut R, target: &str, lang: &ConstraintLanguage, max_bound: usize) -> PpDefinition {
    let few = random_definition(rng, target, lang, max_bound, false);
    PpDefinition {
        target: few.target,
        free_vars: few.free_vars,
        bound_vars: few.bound_vars.into_iter().map(|(_, v)| v).collect(),
        body: few.body,
    }
}

/// A random boolean relation of the given arity with at most `max_tuples`
/// distinct tuples.
pub fn small_relation<R: Rng>(rng: &mut R, name: &str, arity: usize, max_tuples: usize) -> Relation {
    let mut all: Vec<Tuple> = polycsp::model::all_tuples(2, arity).collect();
    all.shuffle(rng);
    let n = rng.gen_range(0..=max_tuples.min(all.len()));
    Relation::new(name, arity, 2, all.into_iter().take(n)).unwrap()
}
