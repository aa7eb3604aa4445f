//! Gadgets used by the hardness proofs over the boolean domain: adding both
//! constant tuples, and closing a relation under negation with a pivot.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::fresh_name;
use crate::error::{Error, Result};
use crate::model::{Constraint, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Tuple};

fn require_boolean(rel: &Relation) -> Result<()> {
    if rel.domain_size() == 2 {
        Ok(())
    } else {
        Err(Error::DomainMismatch {
            left: rel.domain_size(),
            right: 2,
        })
    }
}

/// `(R × {0,1}) ∪ {0…0, 1…1}`. `R(v…)` is equivalent to `∀y R'(v…, y)`.
pub fn lift_with_constants(rel: &Relation) -> Result<Relation> {
    require_boolean(rel)?;
    let k = rel.arity();
    let mut tuples: BTreeSet<Tuple> = BTreeSet::new();
    for t in rel.tuples() {
        for y in 0..2 {
            let mut u = t.clone();
            u.push(y);
            tuples.insert(u);
        }
    }
    tuples.insert(vec![0; k + 1]);
    tuples.insert(vec![1; k + 1]);
    Relation::new(rel.name(), k + 1, 2, tuples)
}

/// `{(0, t) : t ∈ R} ∪ {(1, ¬t) : t ∈ R}`, which has negation as a
/// polymorphism.
pub fn negation_closure(rel: &Relation) -> Result<Relation> {
    require_boolean(rel)?;
    let mut tuples: BTreeSet<Tuple> = BTreeSet::new();
    for t in rel.tuples() {
        tuples.insert(std::iter::once(0).chain(t.iter().copied()).collect());
        tuples.insert(std::iter::once(1).chain(t.iter().map(|&x| 1 - x)).collect());
    }
    Relation::new(rel.name(), rel.arity() + 1, 2, tuples)
}

fn map_language(lang: &ConstraintLanguage, f: fn(&Relation) -> Result<Relation>) -> Result<Arc<ConstraintLanguage>> {
    let rels = lang.relations().map(f).collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(ConstraintLanguage::with_relations(lang.domain_size(), rels)?))
}

fn fresh(csp: &CspInstance, base: &str) -> String {
    let taken: BTreeSet<String> = csp.variables().iter().cloned().collect();
    fresh_name(base, &taken)
}

/// Every relation replaced by [`lift_with_constants`] and every constraint
/// given one shared, innermost universal variable.
pub fn lift_constants_qcsp(q: &QcspInstance) -> Result<QcspInstance> {
    let lang = map_language(q.language(), lift_with_constants)?;
    let y = fresh(q.csp(), "y");
    let constraints = q
        .constraints()
        .iter()
        .map(|c| Constraint::new(c.relation.clone(), c.vars.iter().chain([&y]).cloned()))
        .collect();
    let vars: Vec<String> = q.csp().variables().iter().chain([&y]).cloned().collect();
    let mut prefix = q.prefix().to_vec();
    prefix.push((Quantifier::Forall, y));
    QcspInstance::new(CspInstance::new(lang, vars, constraints)?, prefix)
}

fn negation_parts(csp: &CspInstance) -> Result<(Arc<ConstraintLanguage>, String, Vec<String>, Vec<Constraint>)> {
    let lang = map_language(csp.language(), negation_closure)?;
    let b0 = fresh(csp, "b0");
    let vars = std::iter::once(&b0).chain(csp.variables()).cloned().collect();
    let constraints = csp
        .constraints()
        .iter()
        .map(|c| Constraint::new(c.relation.clone(), std::iter::once(&b0).chain(&c.vars).cloned()))
        .collect();
    Ok((lang, b0, vars, constraints))
}

/// Every constraint `R(v…)` becomes `R''(b0, v…)` for a fresh pivot `b0`.
pub fn negation_csp(inst: &CspInstance) -> Result<CspInstance> {
    let (lang, _, vars, constraints) = negation_parts(inst)?;
    CspInstance::new(lang, vars, constraints)
}

/// As [`negation_csp`], with the pivot quantified outermost by `pivot`.
pub fn negation_qcsp(q: &QcspInstance, pivot: Quantifier) -> Result<QcspInstance> {
    let (lang, b0, vars, constraints) = negation_parts(q.csp())?;
    let prefix = std::iter::once((pivot, b0)).chain(q.prefix().iter().cloned()).collect();
    QcspInstance::new(CspInstance::new(lang, vars, constraints)?, prefix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{is_polymorphism, NamedOp, SchaeferOp};
    use crate::budget::Budget;
    use crate::model::{all_tuples, parse_language, parse_qcsp};
    use crate::oracle::{brute_eval_qcsp, brute_solve};

    fn r01() -> Relation {
        Relation::new("R", 2, 2, vec![vec![0, 1]]).unwrap()
    }

    #[test]
    fn lift_example() {
        let l = lift_with_constants(&r01()).unwrap();
        let expected = Relation::new("R", 3, 2, vec![vec![0, 1, 0], vec![0, 1, 1], vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        assert!(l.same_tuples(&expected));
        let empty = Relation::new("E", 2, 2, vec![]).unwrap();
        assert_eq!(lift_with_constants(&empty).unwrap().len(), 2);
        let lang = ConstraintLanguage::with_relations(2, vec![l.clone()]).unwrap();
        assert!(is_polymorphism(&SchaeferOp::Const0.operation(), &lang).unwrap());
        assert!(is_polymorphism(&SchaeferOp::Const1.operation(), &lang).unwrap());
        // ∀y R'(v, y) is R
        for v in all_tuples(2, 2) {
            let all = (0..2).all(|y| l.contains(&[v[0], v[1], y]));
            assert_eq!(all, r01().contains(&v));
        }
    }

    #[test]
    fn negation_example() {
        let n = negation_closure(&r01()).unwrap();
        let expected = Relation::new("R", 3, 2, vec![vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        assert!(n.same_tuples(&expected));
        let lang = ConstraintLanguage::with_relations(2, vec![n]).unwrap();
        assert!(is_polymorphism(&NamedOp::Not.operation(), &lang).unwrap());
    }

    #[test]
    fn instance_transforms_preserve_answers() {
        let l = Arc::new(parse_language("domain 2\nrelation R 2\n01\nrelation OR2 2\n01 10 11\n").unwrap());
        let b = Budget::default();
        for text in [
            "vars a b\nconstraint R a b\nprefix E a E b\n",
            "vars a b\nconstraint R a b\nprefix A a E b\n",
            "vars a b c\nconstraint OR2 a b\nconstraint OR2 b c\nprefix A b E a E c\n",
            "vars a b\nconstraint R a b\nconstraint R b a\nprefix E a E b\n",
        ] {
            let q = parse_qcsp(text, l.clone()).unwrap();
            let truth = brute_eval_qcsp(&q, &b).unwrap();
            assert_eq!(brute_eval_qcsp(&lift_constants_qcsp(&q).unwrap(), &b).unwrap(), truth);
            for pivot in [Quantifier::Exists, Quantifier::Forall] {
                assert_eq!(brute_eval_qcsp(&negation_qcsp(&q, pivot).unwrap(), &b).unwrap(), truth);
            }
            let csp = q.csp();
            assert_eq!(
                brute_solve(&negation_csp(csp).unwrap(), &b).unwrap().is_some(),
                brute_solve(csp, &b).unwrap().is_some()
            );
        }
    }
}
