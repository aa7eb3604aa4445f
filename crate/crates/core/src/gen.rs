//! Seeded random generators for languages and instances, plus the named
//! boolean languages. Used by the test suites and the `selfcheck` command.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::SchaeferOp;
use crate::equality::{EqFormula, EqSentence, Expr};
use crate::model::{
    all_tuples, parse_language, Constraint, ConstraintLanguage, CspInstance, Operation, QcspInstance, Quantifier,
    Relation, Tuple,
};

/// Each tuple of `D^k` is kept with probability `density`.
pub fn random_relation<R: Rng>(rng: &mut R, name: &str, arity: usize, d: usize, density: f64) -> Relation {
    let tuples: Vec<Tuple> = all_tuples(d, arity).filter(|_| rng.gen_bool(density)).collect();
    Relation::new(name, arity, d, tuples).expect("generated tuples are in range")
}

/// The smallest relation containing `rel` that is closed under `f`.
pub fn close_under(rel: &Relation, f: &Operation) -> Relation {
    let mut set: BTreeSet<Tuple> = rel.tuple_set().clone();
    loop {
        let current: Vec<Tuple> = set.iter().cloned().collect();
        let m = f.arity();
        let mut added = false;
        let mut idx = vec![0usize; m];
        if current.is_empty() {
            break;
        }
        'outer: loop {
            let args: Vec<&Tuple> = idx.iter().map(|&i| &current[i]).collect();
            let image = f.apply_coordinatewise(&args).expect("same arity");
            added |= set.insert(image);
            for p in (0..m).rev() {
                idx[p] += 1;
                if idx[p] < current.len() {
                    continue 'outer;
                }
                idx[p] = 0;
            }
            break;
        }
        if !added {
            break;
        }
    }
    Relation::new(rel.name(), rel.arity(), rel.domain_size(), set).expect("closure stays in range")
}

/// A boolean language of 1 to `max_relations` relations with arities in
/// `1..=max_arity`. With `closed_under`, every relation is closed under that
/// operation.
pub fn random_language<R: Rng>(
    rng: &mut R,
    max_relations: usize,
    max_arity: usize,
    closed_under: Option<SchaeferOp>,
) -> ConstraintLanguage {
    let count = rng.gen_range(1..=max_relations);
    let mut rels = Vec::new();
    for i in 0..count {
        let arity = rng.gen_range(1..=max_arity);
        let density = rng.gen_range(0.15..0.85);
        let mut rel = random_relation(rng, &format!("R{i}"), arity, 2, density);
        if let Some(op) = closed_under {
            rel = close_under(&rel, &op.operation());
        }
        rels.push(rel);
    }
    ConstraintLanguage::with_relations(2, rels).expect("distinct names")
}

fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_constraints<R: Rng>(rng: &mut R, lang: &ConstraintLanguage, vars: &[String], count: usize) -> Vec<Constraint> {
    let rels: Vec<&Relation> = lang.relations().collect();
    if rels.is_empty() || vars.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let r = rels.choose(rng).expect("non-empty");
            let scope: Vec<String> = (0..r.arity()).map(|_| vars.choose(rng).expect("non-empty").clone()).collect();
            Constraint::new(r.name(), scope)
        })
        .collect()
}

/// `n` variables `x0…` and `m` constraints with uniformly chosen relations
/// and scopes.
pub fn random_csp<R: Rng>(rng: &mut R, lang: Arc<ConstraintLanguage>, n: usize, m: usize) -> CspInstance {
    let vars = var_names("x", n);
    let constraints = random_constraints(rng, &lang, &vars, m);
    CspInstance::new(lang, vars, constraints).expect("well-formed by construction")
}

/// A Π₂ instance `∀y0… ∃x0… φ` with `m` random constraints.
pub fn random_pi2<R: Rng>(rng: &mut R, lang: Arc<ConstraintLanguage>, ys: usize, xs: usize, m: usize) -> QcspInstance {
    let y = var_names("y", ys);
    let x = var_names("x", xs);
    let all: Vec<String> = y.iter().chain(&x).cloned().collect();
    let constraints = random_constraints(rng, &lang, &all, m);
    let prefix = y
        .iter()
        .map(|v| (Quantifier::Forall, v.clone()))
        .chain(x.iter().map(|v| (Quantifier::Exists, v.clone())))
        .collect();
    let csp = CspInstance::new(lang, all, constraints).expect("well-formed by construction");
    QcspInstance::new(csp, prefix).expect("prefix covers every variable")
}

/// `n` variables in a random order with independently random quantifiers.
pub fn random_qcsp<R: Rng>(rng: &mut R, lang: Arc<ConstraintLanguage>, n: usize, m: usize) -> QcspInstance {
    let vars = var_names("v", n);
    let constraints = random_constraints(rng, &lang, &vars, m);
    let mut order = vars.clone();
    order.shuffle(rng);
    let prefix = order
        .into_iter()
        .map(|v| {
            let q = if rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
            (q, v)
        })
        .collect();
    let csp = CspInstance::new(lang, vars, constraints).expect("well-formed by construction");
    QcspInstance::new(csp, prefix).expect("prefix covers every variable")
}

/// A random prefix of exactly `blocks` alternating blocks over `n ≥ blocks`
/// variables, starting with `first`.
pub fn random_block_qcsp<R: Rng>(
    rng: &mut R,
    lang: Arc<ConstraintLanguage>,
    n: usize,
    m: usize,
    first: Quantifier,
    blocks: usize,
) -> QcspInstance {
    assert!(blocks >= 1 && n >= blocks);
    let vars = var_names("v", n);
    let constraints = random_constraints(rng, &lang, &vars, m);
    // block sizes: one each, the rest spread at random
    let mut sizes = vec![1usize; blocks];
    for _ in blocks..n {
        sizes[rng.gen_range(0..blocks)] += 1;
    }
    let mut order = vars.clone();
    order.shuffle(rng);
    let mut prefix = Vec::with_capacity(n);
    let mut q = first;
    let mut it = order.into_iter();
    for size in sizes {
        for _ in 0..size {
            prefix.push((q, it.next().expect("sizes sum to n")));
        }
        q = match q {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        };
    }
    let csp = CspInstance::new(lang, vars, constraints).expect("well-formed by construction");
    QcspInstance::new(csp, prefix).expect("prefix covers every variable")
}

/// A random matrix over `vars` with `atoms` atoms; only `=`, `∧`, `∨` when
/// `positive`.
pub fn random_eq_expr<R: Rng>(rng: &mut R, vars: &[String], atoms: usize, positive: bool) -> Expr {
    let atom = |rng: &mut R| {
        let u = vars.choose(rng).expect("non-empty");
        let v = vars.choose(rng).expect("non-empty");
        if !positive && rng.gen_bool(0.3) {
            Expr::neq(u, v)
        } else {
            Expr::eq(u, v)
        }
    };
    let mut e = atom(rng);
    for _ in 1..atoms.max(1) {
        let a = atom(rng);
        e = if rng.gen_bool(0.5) { Expr::and(e, a) } else { Expr::or(e, a) };
        if !positive && rng.gen_bool(0.15) {
            e = Expr::Not(Box::new(e));
        }
    }
    e
}

/// `n` variables `v0…` in order with random quantifiers and a random matrix.
pub fn random_eq_sentence<R: Rng>(rng: &mut R, n: usize, atoms: usize, positive: bool) -> EqSentence {
    let vars = var_names("v", n.max(1));
    let prefix = vars
        .iter()
        .map(|v| {
            let q = if rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
            (q, v.clone())
        })
        .collect();
    let matrix = EqFormula::new(random_eq_expr(rng, &vars, atoms, positive));
    EqSentence::new(prefix, matrix).expect("all variables quantified")
}

/// The four ternary clause relations `R_{i,3}`: tuples satisfying a clause
/// whose first `i` literals are negated.
pub const GAMMA3: &str = "domain 2
relation R03 3
001 010 011 100 101 110 111
relation R13 3
000 001 010 011 101 110 111
relation R23 3
000 001 010 011 100 101 111
relation R33 3
000 001 010 011 100 101 110
";

pub const NAE: &str = "domain 2\nrelation NAE 3\n001 010 011 100 101 110\n";
pub const ONE_IN_THREE: &str = "domain 2\nrelation ONE_IN_3 3\n001 010 100\n";
pub const C0_C1_S: &str = "domain 2\nrelation C0 1\n0\nrelation C1 1\n1\nrelation S 3\n000 001 011 100 110 111\n";
pub const HORN: &str = "domain 2\nrelation C0 1\n0\nrelation C1 1\n1\nrelation IMP 2\n00 01 11\nrelation H3 3\n000 001 010 011 100 101 111\n";
pub const TWO_CLAUSE: &str = "domain 2\nrelation OR2 2\n01 10 11\nrelation IMP 2\n00 01 11\nrelation NAND 2\n00 01 10\n";
pub const AFFINE: &str = "domain 2\nrelation EVEN3 3\n000 011 101 110\nrelation ODD3 3\n001 010 100 111\nrelation NEQ 2\n01 10\n";

/// The named languages with their labels.
pub fn named_languages() -> Vec<(&'static str, ConstraintLanguage)> {
    [
        ("gamma3", GAMMA3),
        ("nae", NAE),
        ("one-in-three", ONE_IN_THREE),
        ("c0-c1-s", C0_C1_S),
        ("horn", HORN),
        ("two-clause", TWO_CLAUSE),
        ("affine", AFFINE),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_language(text).expect("fixture parses")))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::is_polymorphism;
    use crate::classify::schaefer_witnesses;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn closure_is_closed_and_minimal() {
        let mut rng = StdRng::seed_from_u64(1);
        for op in [SchaeferOp::And, SchaeferOp::Or, SchaeferOp::Majority, SchaeferOp::Minority] {
            for _ in 0..20 {
                let lang = random_language(&mut rng, 3, 3, Some(op));
                assert!(is_polymorphism(&op.operation(), &lang).unwrap());
            }
        }
        let r = Relation::new("R", 2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(close_under(&r, &SchaeferOp::And.operation()).len(), 3);
        assert!(close_under(&r, &SchaeferOp::Minority.operation()).same_tuples(&r));
    }

    #[test]
    fn named_fixtures() {
        let named = named_languages();
        let ws = |name: &str| schaefer_witnesses(&named.iter().find(|(n, _)| *n == name).unwrap().1).unwrap();
        assert!(ws("gamma3").is_empty());
        assert!(ws("nae").is_empty());
        assert!(ws("one-in-three").is_empty());
        assert!(ws("c0-c1-s").is_empty());
        assert!(ws("horn").contains(&SchaeferOp::And));
        assert!(ws("two-clause").contains(&SchaeferOp::Majority));
        assert!(ws("affine").contains(&SchaeferOp::Minority));
    }

    #[test]
    fn block_prefixes_have_requested_shape() {
        let mut rng = StdRng::seed_from_u64(3);
        let lang = Arc::new(parse_language(TWO_CLAUSE).unwrap());
        for blocks in 1..=4 {
            let q = random_block_qcsp(&mut rng, lang.clone(), 6, 4, Quantifier::Forall, blocks);
            let pat = crate::qcsp::prefix_pattern(&q);
            assert_eq!(pat.blocks().len(), blocks);
        }
    }
}
