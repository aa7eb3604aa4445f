//! Spread-expression of few-definable relations and the reduction that keeps
//! the prefix class.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{fresh_name, FewDefinition};
use crate::budget::Budget;
use crate::classify::PrefixKind;
use crate::error::{Error, Result};
use crate::model::{all_tuples, Constraint, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Tuple, Value};
use crate::qcsp::PrefixPattern;

/// A relation `R'` of arity `k + 2` spread-expressing the relation defined by
/// `def`. Bound variables are peeled innermost first: an existential one is
/// projected away, a universal one `x` gives
/// `R'_2(…, y1, y2) = R'(…, y1, y1, y2) ∧ R'(…, y2, y1, y2)`.
pub fn spread_express(def: &FewDefinition, lang: &ConstraintLanguage, budget: &Budget) -> Result<Relation> {
    if lang.domain_size() != 2 {
        return Err(Error::DomainMismatch {
            left: lang.domain_size(),
            right: 2,
        });
    }
    let k = def.free_vars.len();
    let open = FewDefinition {
        target: def.target.clone(),
        free_vars: def
            .free_vars
            .iter()
            .cloned()
            .chain(def.bound_vars.iter().map(|(_, v)| v.clone()))
            .collect(),
        bound_vars: Vec::new(),
        body: def.body.clone(),
    };
    let base = open.evaluate(lang, budget)?;
    let mut cur: BTreeSet<Tuple> = BTreeSet::new();
    for t in base.tuples() {
        for y in all_tuples(2, 2) {
            cur.insert(t.iter().chain(&y).copied().collect());
        }
    }
    for (i, (q, _)) in def.bound_vars.iter().enumerate().rev() {
        let p = k + i;
        cur = match q {
            Quantifier::Exists => cur
                .iter()
                .map(|t| t[..p].iter().chain(&t[p + 1..]).copied().collect())
                .collect(),
            Quantifier::Forall => cur
                .iter()
                .filter(|t| t[p] == t[p + 1])
                .filter_map(|t| {
                    let (y1, y2) = (t[p + 1], t[p + 2]);
                    let mut other = t.clone();
                    other[p] = y2;
                    cur.contains(&other).then(|| {
                        let mut out = t[..p].to_vec();
                        out.extend([y1, y2]);
                        out
                    })
                })
                .collect(),
        };
    }
    Relation::new(format!("{}'", def.target), k + 2, 2, cur)
}

/// Whether `r` is spread-expressed by `rp` (arity `k + d`): membership is
/// monotone in the set of the last `d` values, and equals `r` once those
/// values cover the domain.
pub fn is_spread_expressed(r: &Relation, rp: &Relation) -> bool {
    let d = r.domain_size();
    let k = r.arity();
    if rp.domain_size() != d || rp.arity() != k + d {
        return false;
    }
    let ys: Vec<(Tuple, BTreeSet<Value>)> = all_tuples(d, d)
        .map(|b| {
            let set = b.iter().copied().collect();
            (b, set)
        })
        .collect();
    let holds = |a: &[Value], b: &[Value]| {
        let t: Vec<Value> = a.iter().chain(b).copied().collect();
        rp.contains(&t)
    };
    all_tuples(d, k).all(|a| {
        ys.iter().all(|(b, set)| {
            let expression = set.len() < d || holds(&a, b) == r.contains(&a);
            let monotone = !holds(&a, b) || ys.iter().filter(|(_, s2)| s2.is_subset(set)).all(|(b2, _)| holds(&a, b2));
            expression && monotone
        })
    })
}

/// Replace each constraint `R(v…)` by `R''(v…, y1, …, yd)` with fresh
/// universal variables placed at the end of the outermost universal block.
/// `spread` maps each relation name to its spread relation; the output
/// language uses the original names for them.
pub fn bounded_alt_reduce(q: &QcspInstance, spread: &BTreeMap<String, Relation>) -> Result<QcspInstance> {
    let pattern = PrefixPattern::from_quantifiers(q.prefix().iter().map(|(qt, _)| *qt));
    match pattern.class() {
        Some((PrefixKind::Pi, k)) if k >= 2 && k.is_multiple_of(2) => {}
        Some((PrefixKind::Sigma, k)) if k >= 3 && !k.is_multiple_of(2) => {}
        _ => return Err(Error::UnsupportedPrefixClass(pattern.class_label())),
    }
    let d = q.csp().domain_size();
    let mut taken: BTreeSet<String> = q.csp().variables().iter().cloned().collect();
    let mut ys = Vec::new();
    for i in 1..=d {
        let y = fresh_name(&format!("y{i}"), &taken);
        taken.insert(y.clone());
        ys.push(y);
    }

    let mut lang = ConstraintLanguage::new(d)?;
    let mut constraints = Vec::new();
    for c in q.constraints() {
        let rel = spread
            .get(&c.relation)
            .ok_or_else(|| Error::Precondition(format!("no spread relation for `{}`", c.relation)))?;
        if rel.arity() != c.vars.len() + d {
            return Err(Error::ConstraintArity {
                relation: c.relation.clone(),
                expected: rel.arity(),
                found: c.vars.len() + d,
            });
        }
        if lang.get(&c.relation).is_err() {
            lang.insert(rel.renamed(c.relation.clone()))?;
        }
        constraints.push(Constraint::new(c.relation.clone(), c.vars.iter().chain(&ys).cloned()));
    }

    let first = q.prefix().iter().position(|(qt, _)| *qt == Quantifier::Forall).expect("class has a universal block");
    let end = q.prefix()[first..]
        .iter()
        .position(|(qt, _)| *qt != Quantifier::Forall)
        .map_or(q.prefix().len(), |o| first + o);
    let mut prefix = q.prefix()[..end].to_vec();
    prefix.extend(ys.iter().map(|y| (Quantifier::Forall, y.clone())));
    prefix.extend_from_slice(&q.prefix()[end..]);

    let vars: Vec<String> = q.csp().variables().iter().chain(&ys).cloned().collect();
    let csp = CspInstance::new(Arc::new(lang), vars, constraints)?;
    QcspInstance::new(csp, prefix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_language, parse_qcsp};
    use crate::oracle::brute_eval_qcsp;
    use crate::reductions::Atom;

    fn lang() -> ConstraintLanguage {
        parse_language("domain 2\nrelation NEQ 2\n01 10\nrelation EQ 2\n00 11\n").unwrap()
    }

    fn def(q: Quantifier, rel: &str) -> FewDefinition {
        FewDefinition {
            target: "R".into(),
            free_vars: vec!["v".into()],
            bound_vars: vec![(q, "y".into())],
            body: vec![Atom::Constraint(Constraint::new(rel, ["v", "y"]))],
        }
    }

    #[test]
    fn universal_neq() {
        let l = lang();
        let d = def(Quantifier::Forall, "NEQ");
        let rp = spread_express(&d, &l, &Budget::default()).unwrap();
        let expected = Relation::from_predicate("R'", 3, 2, |t| t[0] != t[1] && t[0] != t[2]).unwrap();
        assert!(rp.same_tuples(&expected));
        let r = d.evaluate(&l, &Budget::default()).unwrap();
        assert!(r.is_empty());
        assert!(is_spread_expressed(&r, &rp));
    }

    #[test]
    fn quantifier_free_and_existential() {
        let l = lang();
        let free = FewDefinition {
            target: "N".into(),
            free_vars: vec!["a".into(), "b".into()],
            bound_vars: vec![],
            body: vec![Atom::Constraint(Constraint::new("NEQ", ["a", "b"]))],
        };
        let rp = spread_express(&free, &l, &Budget::default()).unwrap();
        assert_eq!(rp.len(), 8);
        assert!(is_spread_expressed(l.get("NEQ").unwrap(), &rp));

        let ex = def(Quantifier::Exists, "EQ");
        let rp = spread_express(&ex, &l, &Budget::default()).unwrap();
        assert!(rp.same_tuples(&Relation::full("F", 3, 2).unwrap()));
    }

    #[test]
    fn checker_rejects_non_monotone() {
        let r = Relation::full("T", 1, 2).unwrap();
        // holds only when y1 = 0, y2 = 1
        let rp = Relation::from_predicate("B", 3, 2, |t| t[1] == 0 && t[2] == 1).unwrap();
        assert!(!is_spread_expressed(&r, &rp));
    }

    #[test]
    fn pi2_reduction_keeps_truth_and_class() {
        let l = Arc::new(lang());
        let b = Budget::default();
        let spread: BTreeMap<String, Relation> = ["NEQ", "EQ"]
            .iter()
            .map(|name| {
                let free = FewDefinition {
                    target: name.to_string(),
                    free_vars: vec!["a".into(), "b".into()],
                    bound_vars: vec![],
                    body: vec![Atom::Constraint(Constraint::new(*name, ["a", "b"]))],
                };
                (name.to_string(), spread_express(&free, &l, &b).unwrap())
            })
            .collect();
        for text in [
            "vars u x\nconstraint NEQ u x\nprefix A u E x\n",
            "vars u v x\nconstraint NEQ u x\nconstraint EQ v x\nprefix A u A v E x\n",
            "vars u x\nprefix A u E x\n",
        ] {
            let q = parse_qcsp(text, l.clone()).unwrap();
            let out = bounded_alt_reduce(&q, &spread).unwrap();
            assert_eq!(brute_eval_qcsp(&q, &b).unwrap(), brute_eval_qcsp(&out, &b).unwrap());
            let pat = PrefixPattern::from_quantifiers(out.prefix().iter().map(|(qt, _)| *qt));
            assert_eq!(pat.class(), Some((PrefixKind::Pi, 2)));
        }
        let sigma2 = parse_qcsp("vars x u\nconstraint NEQ u x\nprefix E x A u\n", l).unwrap();
        assert!(matches!(bounded_alt_reduce(&sigma2, &spread), Err(Error::UnsupportedPrefixClass(_))));
    }
}
