//! Reductions between constraint languages: pp- and few-definitions,
//! synthesis of pp-definitions from the indicator construction, inlining of
//! definitions into instances, spread-expression and the hardness gadgets.

mod gadgets;
mod spread;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::model::{all_tuples, Constraint, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Value};

pub use gadgets::{lift_constants_qcsp, lift_with_constants, negation_closure, negation_csp, negation_qcsp};
pub use spread::{bounded_alt_reduce, is_spread_expressed, spread_express};

/// A conjunct of a definition body.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Constraint(Constraint),
    Eq(String, String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Constraint(c) => write!(f, "{c}"),
            Atom::Eq(u, v) => write!(f, "{u} = {v}"),
        }
    }
}

/// `target(free_vars) ≡ Q x_1 … Q x_m . body`. A pp-definition is the case
/// where every bound variable is existential.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FewDefinition {
    pub target: String,
    pub free_vars: Vec<String>,
    pub bound_vars: Vec<(Quantifier, String)>,
    pub body: Vec<Atom>,
}

/// Existentially quantified definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PpDefinition {
    pub target: String,
    pub free_vars: Vec<String>,
    pub bound_vars: Vec<String>,
    pub body: Vec<Atom>,
}

impl PpDefinition {
    /// `R(v1, …, vk) ≡ R(v1, …, vk)`.
    pub fn identity(rel: &Relation) -> Self {
        let free: Vec<String> = (1..=rel.arity()).map(|i| format!("v{i}")).collect();
        PpDefinition {
            target: rel.name().to_string(),
            body: vec![Atom::Constraint(Constraint::new(rel.name(), free.clone()))],
            free_vars: free,
            bound_vars: Vec::new(),
        }
    }

    pub fn to_few(&self) -> FewDefinition {
        FewDefinition {
            target: self.target.clone(),
            free_vars: self.free_vars.clone(),
            bound_vars: self
                .bound_vars
                .iter()
                .map(|v| (Quantifier::Exists, v.clone()))
                .collect(),
            body: self.body.clone(),
        }
    }

    /// The relation defined over `lang`, by exhaustive search.
    pub fn evaluate(&self, lang: &ConstraintLanguage, budget: &Budget) -> Result<Relation> {
        self.to_few().evaluate(lang, budget)
    }
}

impl From<PpDefinition> for FewDefinition {
    fn from(d: PpDefinition) -> Self {
        d.to_few()
    }
}

fn write_definition(
    f: &mut fmt::Formatter<'_>,
    target: &str,
    free: &[String],
    bound: &[(Quantifier, String)],
    body: &[Atom],
) -> fmt::Result {
    write!(f, "{target}({}) ≡ ", free.join(", "))?;
    for (q, v) in bound {
        write!(f, "{q}{v} ")?;
    }
    if !bound.is_empty() {
        f.write_str(". ")?;
    }
    if body.is_empty() {
        return f.write_str("true");
    }
    let parts: Vec<String> = body.iter().map(ToString::to_string).collect();
    f.write_str(&parts.join(" ∧ "))
}

impl fmt::Display for FewDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_definition(f, &self.target, &self.free_vars, &self.bound_vars, &self.body)
    }
}

impl fmt::Display for PpDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_definition(f, &self.target, &self.free_vars, &self.to_few().bound_vars, &self.body)
    }
}

/// Body atoms over variable indices (free variables first, then bound).
enum CompiledAtom<'a> {
    Rel(&'a Relation, Vec<usize>),
    Eq(usize, usize),
}

impl CompiledAtom<'_> {
    fn holds(&self, values: &[Value]) -> bool {
        match self {
            CompiledAtom::Rel(r, idx) => {
                let t: Vec<Value> = idx.iter().map(|&i| values[i]).collect();
                r.contains(&t)
            }
            CompiledAtom::Eq(a, b) => values[*a] == values[*b],
        }
    }

    fn last(&self) -> usize {
        match self {
            CompiledAtom::Rel(_, idx) => idx.iter().copied().max().unwrap_or(0),
            CompiledAtom::Eq(a, b) => *a.max(b),
        }
    }
}

impl FewDefinition {
    fn all_vars(&self) -> Vec<&str> {
        self.free_vars
            .iter()
            .map(String::as_str)
            .chain(self.bound_vars.iter().map(|(_, v)| v.as_str()))
            .collect()
    }

    fn compile<'a>(&self, lang: &'a ConstraintLanguage) -> Result<Vec<CompiledAtom<'a>>> {
        let vars = self.all_vars();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            if index.insert(v, i).is_some() {
                return Err(Error::DuplicateVariable(v.to_string()));
            }
        }
        let lookup = |v: &str| index.get(v).copied().ok_or_else(|| Error::UnknownVariable(v.to_string()));
        self.body
            .iter()
            .map(|a| match a {
                Atom::Constraint(c) => {
                    let rel = lang.get(&c.relation)?;
                    if rel.arity() != c.vars.len() {
                        return Err(Error::ConstraintArity {
                            relation: c.relation.clone(),
                            expected: rel.arity(),
                            found: c.vars.len(),
                        });
                    }
                    let idx = c.vars.iter().map(|v| lookup(v)).collect::<Result<_>>()?;
                    Ok(CompiledAtom::Rel(rel, idx))
                }
                Atom::Eq(u, v) => Ok(CompiledAtom::Eq(lookup(u)?, lookup(v)?)),
            })
            .collect()
    }

    /// The relation defined over `lang`: for each tuple of free values, the
    /// game over the bound variables in order.
    pub fn evaluate(&self, lang: &ConstraintLanguage, budget: &Budget) -> Result<Relation> {
        let d = lang.domain_size();
        let k = self.free_vars.len();
        if k == 0 {
            return Err(Error::ZeroArity);
        }
        let n = k + self.bound_vars.len();
        budget.check_search(d, n)?;
        let atoms = self.compile(lang)?;
        // atoms grouped by the position after which they are fully assigned
        let mut by_last: Vec<Vec<&CompiledAtom<'_>>> = vec![Vec::new(); n];
        for a in &atoms {
            by_last[a.last()].push(a);
        }
        let quantifiers: Vec<Quantifier> = self.bound_vars.iter().map(|(q, _)| *q).collect();

        fn game(
            pos: usize,
            k: usize,
            d: usize,
            quantifiers: &[Quantifier],
            by_last: &[Vec<&CompiledAtom<'_>>],
            values: &mut Vec<Value>,
        ) -> bool {
            if pos == values.len() {
                return true;
            }
            let branch = |v: Value, values: &mut Vec<Value>| {
                values[pos] = v;
                by_last[pos].iter().all(|a| a.holds(values)) && game(pos + 1, k, d, quantifiers, by_last, values)
            };
            match quantifiers[pos - k] {
                Quantifier::Forall => (0..d as Value).all(|v| branch(v, values)),
                Quantifier::Exists => (0..d as Value).any(|v| branch(v, values)),
            }
        }

        let mut tuples = Vec::new();
        let mut values = vec![0 as Value; n];
        for t in all_tuples(d, k) {
            values[..k].copy_from_slice(&t);
            let free_ok = (0..k).all(|p| by_last[p].iter().all(|a| a.holds(&values)));
            if free_ok && game(k, k, d, &quantifiers, &by_last, &mut values) {
                tuples.push(t);
            }
        }
        Relation::new(self.target.clone(), k, d, tuples)
    }
}

fn point_name(point: &[Value], d: usize) -> String {
    let parts: Vec<String> = point.iter().map(ToString::to_string).collect();
    format!("x{}", parts.join(if d > 10 { "_" } else { "" }))
}

/// Build a pp-definition of `rel` over `lang` from the indicator
/// construction: one variable per point of `D^m` (`m = |rel|`), a constraint
/// `S(p_1, …, p_a)` whenever every row of the points is a tuple of `S`, and
/// the columns of `rel` as free variables. Repeated columns become equality
/// atoms. Returns `None` when the result does not define `rel`, which happens
/// exactly when `rel` is not pp-definable from `lang`.
pub fn synthesize_pp_definition(rel: &Relation, lang: &ConstraintLanguage, budget: &Budget) -> Result<Option<PpDefinition>> {
    let d = lang.domain_size();
    if rel.domain_size() != d {
        return Err(Error::DomainMismatch {
            left: rel.domain_size(),
            right: d,
        });
    }
    let m = rel.len();
    let points = crate::budget::checked_pow(d, m).unwrap_or(usize::MAX);
    budget.check_search(d, points.min(u32::MAX as usize))?;

    let k = rel.arity();
    let tuples: Vec<&Vec<Value>> = rel.tuples().collect();
    let columns: Vec<Vec<Value>> = (0..k).map(|i| tuples.iter().map(|t| t[i]).collect()).collect();
    let free_vars: Vec<String> = (1..=k).map(|i| format!("v{i}")).collect();
    let mut name_of: BTreeMap<Vec<Value>, String> = BTreeMap::new();
    let mut body = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        match name_of.get(col) {
            Some(first) => body.push(Atom::Eq(first.clone(), free_vars[i].clone())),
            None => {
                name_of.insert(col.clone(), free_vars[i].clone());
            }
        }
    }
    let mut bound_vars = Vec::new();
    for p in all_tuples(d, m) {
        let name = point_name(&p, d);
        if let std::collections::btree_map::Entry::Vacant(e) = name_of.entry(p) {
            bound_vars.push(name.clone());
            e.insert(name);
        }
    }
    for s in lang.relations() {
        // choose a tuple of `s` for every row; the points are the columns
        let rows: Vec<&Vec<Value>> = s.tuples().collect();
        budget.check_search(rows.len().max(1), m)?;
        let choices = crate::budget::checked_pow(rows.len(), m).expect("within budget");
        for index in 0..choices {
            // row j takes tuple number `pick[j]`, last row fastest
            let mut rest = index;
            let mut pick = vec![0usize; m];
            for j in (0..m).rev() {
                pick[j] = rest % rows.len();
                rest /= rows.len();
            }
            let vars: Vec<String> = (0..s.arity())
                .map(|c| {
                    let point: Vec<Value> = pick.iter().map(|&r| rows[r][c]).collect();
                    name_of[&point].clone()
                })
                .collect();
            body.push(Atom::Constraint(Constraint::new(s.name(), vars)));
        }
    }
    let def = PpDefinition {
        target: rel.name().to_string(),
        free_vars,
        bound_vars,
        body,
    };
    let defined = def.evaluate(lang, budget)?;
    Ok(defined.same_tuples(rel).then_some(def))
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|c| !taken.contains(c))
        .expect("unbounded")
}

/// Union-find over variable names with a caller-chosen representative.
struct Merge {
    parent: BTreeMap<String, String>,
}

impl Merge {
    fn new() -> Self {
        Merge { parent: BTreeMap::new() }
    }

    fn find(&self, v: &str) -> String {
        let mut cur = v.to_string();
        while let Some(p) = self.parent.get(&cur) {
            cur = p.clone();
        }
        cur
    }
}

/// One renamed copy of a definition body per constraint: free variables are
/// replaced by the constraint's arguments, bound variables get the fresh
/// name `<constraint index>.<bound name>`.
fn instantiate(def: &FewDefinition, c: &Constraint, idx: usize) -> Result<(Vec<(Quantifier, String)>, Vec<Atom>)> {
    if def.free_vars.len() != c.vars.len() {
        return Err(Error::ConstraintArity {
            relation: c.relation.clone(),
            expected: def.free_vars.len(),
            found: c.vars.len(),
        });
    }
    let mut map: HashMap<&str, String> = HashMap::new();
    for (f, v) in def.free_vars.iter().zip(&c.vars) {
        map.insert(f, v.clone());
    }
    for (_, b) in &def.bound_vars {
        map.insert(b, format!("{idx}.{b}"));
    }
    let rename = |v: &String| map.get(v.as_str()).cloned().ok_or_else(|| Error::UnknownVariable(v.clone()));
    let body = def
        .body
        .iter()
        .map(|a| {
            Ok(match a {
                Atom::Constraint(k) => Atom::Constraint(Constraint {
                    relation: k.relation.clone(),
                    vars: k.vars.iter().map(rename).collect::<Result<_>>()?,
                }),
                Atom::Eq(u, v) => Atom::Eq(rename(u)?, rename(v)?),
            })
        })
        .collect::<Result<_>>()?;
    let bound = def.bound_vars.iter().map(|(q, b)| (*q, map[b.as_str()].clone())).collect();
    Ok((bound, body))
}

/// Replace every constraint by its definition over `target`. Equalities are
/// eliminated by substituting the lexicographically smaller variable.
pub fn inline_reduce_csp(
    inst: &CspInstance,
    defs: &BTreeMap<String, PpDefinition>,
    target: Arc<ConstraintLanguage>,
) -> Result<CspInstance> {
    let mut vars: Vec<String> = inst.variables().to_vec();
    let mut atoms = Vec::new();
    for (i, c) in inst.constraints().iter().enumerate() {
        let def = defs
            .get(&c.relation)
            .ok_or_else(|| Error::Precondition(format!("no definition for `{}`", c.relation)))?;
        let (bound, body) = instantiate(&def.to_few(), c, i)?;
        vars.extend(bound.into_iter().map(|(_, v)| v));
        atoms.extend(body);
    }
    let mut merge = Merge::new();
    for a in &atoms {
        if let Atom::Eq(u, v) = a {
            let (ru, rv) = (merge.find(u), merge.find(v));
            if ru != rv {
                let (keep, drop) = if ru < rv { (ru, rv) } else { (rv, ru) };
                merge.parent.insert(drop, keep);
            }
        }
    }
    let constraints = atoms
        .into_iter()
        .filter_map(|a| match a {
            Atom::Constraint(c) => Some(Constraint {
                relation: c.relation,
                vars: c.vars.iter().map(|v| merge.find(v)).collect(),
            }),
            Atom::Eq(..) => None,
        })
        .collect();
    vars.retain(|v| !merge.parent.contains_key(v));
    CspInstance::new(target, vars, constraints)
}

/// Result of inlining few-definitions into a quantified instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QcspReduction {
    Instance(QcspInstance),
    /// An equality forces a universal variable to equal an earlier one.
    ConstantFalse,
}

/// Replace every constraint by its few-definition over `target`, appending
/// the bound quantifiers of each definition to the end of the prefix.
/// Equalities remove the later-quantified variable; if it is universal the
/// sentence is false.
pub fn inline_reduce_qcsp(
    q: &QcspInstance,
    defs: &BTreeMap<String, FewDefinition>,
    target: Arc<ConstraintLanguage>,
) -> Result<QcspReduction> {
    let mut prefix: Vec<(Quantifier, String)> = q.prefix().to_vec();
    let mut atoms = Vec::new();
    for (i, c) in q.constraints().iter().enumerate() {
        let def = defs
            .get(&c.relation)
            .ok_or_else(|| Error::Precondition(format!("no definition for `{}`", c.relation)))?;
        let (bound, body) = instantiate(def, c, i)?;
        prefix.extend(bound);
        atoms.extend(body);
    }
    let position: HashMap<String, usize> = prefix.iter().enumerate().map(|(i, (_, v))| (v.clone(), i)).collect();
    let mut merge = Merge::new();
    for a in &atoms {
        if let Atom::Eq(u, v) = a {
            let (ru, rv) = (merge.find(u), merge.find(v));
            if ru == rv {
                continue;
            }
            let (keep, drop) = if position[&ru] < position[&rv] { (ru, rv) } else { (rv, ru) };
            if prefix[position[&drop]].0 == Quantifier::Forall {
                return Ok(QcspReduction::ConstantFalse);
            }
            merge.parent.insert(drop, keep);
        }
    }
    let constraints: Vec<Constraint> = atoms
        .into_iter()
        .filter_map(|a| match a {
            Atom::Constraint(c) => Some(Constraint {
                relation: c.relation,
                vars: c.vars.iter().map(|v| merge.find(v)).collect(),
            }),
            Atom::Eq(..) => None,
        })
        .collect();
    prefix.retain(|(_, v)| !merge.parent.contains_key(v));
    let vars: Vec<String> = prefix.iter().map(|(_, v)| v.clone()).collect();
    let csp = CspInstance::new(target, vars, constraints)?;
    QcspInstance::new(csp, prefix).map(QcspReduction::Instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_language, parse_qcsp};
    use crate::oracle::{brute_eval_qcsp, brute_solve, pp_closure};

    pub(super) const GAMMA3: &str = "domain 2\nrelation R03 3\n001 010 011 100 101 110 111\nrelation R13 3\n000 001 010 011 101 110 111\nrelation R23 3\n000 001 010 011 100 101 111\nrelation R33 3\n000 001 010 011 100 101 110\n";

    fn neq() -> Relation {
        Relation::new("NEQ", 2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn c(rel: &str, vars: &[&str]) -> Atom {
        Atom::Constraint(Constraint::new(rel, vars.iter().copied()))
    }

    #[test]
    fn hand_written_neq_definition() {
        // S(y,z) = ∃x (R03(x,y,z) ∧ R13(x,y,z) ∧ R23(z,y,x) ∧ R33(z,y,x))
        let g3 = parse_language(GAMMA3).unwrap();
        let def = PpDefinition {
            target: "S".into(),
            free_vars: vec!["y".into(), "z".into()],
            bound_vars: vec!["x".into()],
            body: vec![
                c("R03", &["x", "y", "z"]),
                c("R13", &["x", "y", "z"]),
                c("R23", &["z", "y", "x"]),
                c("R33", &["z", "y", "x"]),
            ],
        };
        assert!(def.evaluate(&g3, &Budget::default()).unwrap().same_tuples(&neq()));
    }

    #[test]
    fn synthesizes_neq_from_gamma3() {
        let g3 = parse_language(GAMMA3).unwrap();
        let def = synthesize_pp_definition(&neq(), &g3, &Budget::default()).unwrap().unwrap();
        // 4 points of D^2, columns (0,1) and (1,0) are free
        assert_eq!(def.bound_vars, vec!["x00", "x11"]);
        assert!(def.evaluate(&g3, &Budget::default()).unwrap().same_tuples(&neq()));
    }

    #[test]
    fn eq_uses_one_equality_atom() {
        let l = parse_language("domain 2\nrelation OR2 2\n01 10 11\n").unwrap();
        let eq = Relation::new("EQ", 2, 2, vec![vec![0, 0], vec![1, 1]]).unwrap();
        let def = synthesize_pp_definition(&eq, &l, &Budget::default()).unwrap().unwrap();
        let eqs: Vec<&Atom> = def.body.iter().filter(|a| matches!(a, Atom::Eq(..))).collect();
        assert_eq!(eqs, vec![&Atom::Eq("v1".into(), "v2".into())]);
    }

    #[test]
    fn non_members_give_none() {
        let horn = parse_language("domain 2\nrelation IMP 2\n00 01 11\n").unwrap();
        assert!(!pp_closure(&neq(), &horn, &Budget::default()).unwrap().same_tuples(&neq()));
        assert_eq!(synthesize_pp_definition(&neq(), &horn, &Budget::default()).unwrap(), None);
    }

    #[test]
    fn inline_csp_preserves_satisfiability() {
        let g3 = Arc::new(parse_language(GAMMA3).unwrap());
        let src = Arc::new(parse_language("domain 2\nrelation NEQ 2\n01 10\n").unwrap());
        let def = synthesize_pp_definition(&neq(), &g3, &Budget::default()).unwrap().unwrap();
        let defs: BTreeMap<String, PpDefinition> = [("NEQ".to_string(), def)].into();
        for text in ["vars a b\nconstraint NEQ a b\n", "vars a b c\nconstraint NEQ a b\nconstraint NEQ b c\nconstraint NEQ a c\n"] {
            let inst = parse_instance(text, src.clone()).unwrap();
            let out = inline_reduce_csp(&inst, &defs, g3.clone()).unwrap();
            let b = Budget::default();
            assert_eq!(brute_solve(&inst, &b).unwrap().is_some(), brute_solve(&out, &b).unwrap().is_some());
        }
    }

    #[test]
    fn identity_and_equality_only_definitions() {
        let l = Arc::new(parse_language("domain 2\nrelation OR2 2\n01 10 11\nrelation EQ 2\n00 11\n").unwrap());
        let inst = parse_instance("vars a b c\nconstraint OR2 a b\nconstraint EQ c a\n", l.clone()).unwrap();
        let mut defs = BTreeMap::new();
        defs.insert("OR2".to_string(), PpDefinition::identity(l.get("OR2").unwrap()));
        defs.insert(
            "EQ".to_string(),
            PpDefinition {
                target: "EQ".into(),
                free_vars: vec!["v1".into(), "v2".into()],
                bound_vars: vec![],
                body: vec![Atom::Eq("v1".into(), "v2".into())],
            },
        );
        let out = inline_reduce_csp(&inst, &defs, l).unwrap();
        assert_eq!(out.variables(), ["a", "b"]);
        assert_eq!(out.constraints(), [Constraint::new("OR2", ["a", "b"])]);
    }

    #[test]
    fn qcsp_equality_on_later_universal_is_false() {
        let l = Arc::new(parse_language("domain 2\nrelation EQ 2\n00 11\n").unwrap());
        let eqdef = FewDefinition {
            target: "EQ".into(),
            free_vars: vec!["v1".into(), "v2".into()],
            bound_vars: vec![],
            body: vec![Atom::Eq("v1".into(), "v2".into())],
        };
        let defs: BTreeMap<String, FewDefinition> = [("EQ".to_string(), eqdef)].into();
        let q = parse_qcsp("vars u v\nconstraint EQ u v\nprefix E u A v\n", l.clone()).unwrap();
        assert_eq!(inline_reduce_qcsp(&q, &defs, l.clone()).unwrap(), QcspReduction::ConstantFalse);
        let q = parse_qcsp("vars u v\nconstraint EQ u v\nprefix A u E v\n", l.clone()).unwrap();
        let QcspReduction::Instance(out) = inline_reduce_qcsp(&q, &defs, l).unwrap() else {
            panic!("expected an instance");
        };
        assert_eq!(out.prefix(), [(Quantifier::Forall, "u".to_string())]);
        assert!(brute_eval_qcsp(&out, &Budget::default()).unwrap());
    }

    #[test]
    fn few_definition_evaluation() {
        let l = parse_language("domain 2\nrelation NEQ 2\n01 10\nrelation EQ 2\n00 11\n").unwrap();
        let all_neq = FewDefinition {
            target: "R".into(),
            free_vars: vec!["v".into()],
            bound_vars: vec![(Quantifier::Forall, "y".into())],
            body: vec![c("NEQ", &["v", "y"])],
        };
        assert!(all_neq.evaluate(&l, &Budget::default()).unwrap().is_empty());
        let some_eq = FewDefinition {
            target: "R".into(),
            free_vars: vec!["v".into()],
            bound_vars: vec![(Quantifier::Exists, "x".into())],
            body: vec![c("EQ", &["v", "x"])],
        };
        assert_eq!(some_eq.evaluate(&l, &Budget::default()).unwrap().len(), 2);
    }
}
