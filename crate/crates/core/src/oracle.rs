//! Exhaustive reference procedures. Deliberately naive; every clever solver
//! in the crate is tested against these.

use crate::algebra::polymorphisms_of_arity;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::model::{Assignment, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Tuple, Value};

/// A mapping defined on a subset of the variables.
pub type PartialAssignment = Assignment;

/// Depth-first search over values in increasing order, variables in declared
/// order, so the first solution found is the lexicographically first one.
pub fn brute_solve(inst: &CspInstance, budget: &Budget) -> Result<Option<Assignment>> {
    Ok(search(inst, budget, true)?
        .into_iter()
        .next()
        .map(|values| Assignment::from_values(inst.variables(), &values)))
}

/// Every solution, as value vectors in declared variable order, in
/// lexicographic order.
pub fn all_solutions(inst: &CspInstance, budget: &Budget) -> Result<Vec<Vec<Value>>> {
    search(inst, budget, false)
}

fn search(inst: &CspInstance, budget: &Budget, first_only: bool) -> Result<Vec<Vec<Value>>> {
    let d = inst.domain_size();
    let n = inst.variables().len();
    budget.check_search(d, n)?;
    let compiled = inst.compile();
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (ci, c) in compiled.constraints.iter().enumerate() {
        // constraints with no variables cannot occur (arity >= 1)
        let last = c.scope.iter().max().map_or(0, |&m| m + 1);
        by_last[last].push(ci);
    }
    let mut values = vec![0 as Value; n];
    let mut out = Vec::new();

    fn go(
        pos: usize,
        d: usize,
        values: &mut Vec<Value>,
        by_last: &[Vec<usize>],
        compiled: &crate::model::Compiled<'_>,
        first_only: bool,
        out: &mut Vec<Vec<Value>>,
    ) -> bool {
        if pos == values.len() {
            out.push(values.clone());
            return first_only;
        }
        for v in 0..d as Value {
            values[pos] = v;
            if by_last[pos + 1].iter().all(|&ci| compiled.constraints[ci].holds(values))
                && go(pos + 1, d, values, by_last, compiled, first_only, out)
            {
                return true;
            }
        }
        false
    }
    go(0, d, &mut values, &by_last, &compiled, first_only, &mut out);
    Ok(out)
}

/// Game-tree evaluation in prefix order: a universal node is the conjunction
/// of its children, an existential node their disjunction.
pub fn brute_eval_qcsp(q: &QcspInstance, budget: &Budget) -> Result<bool> {
    let csp = q.csp();
    let d = csp.domain_size();
    let n = csp.variables().len();
    budget.check_search(d, n)?;
    let compiled = csp.compile();
    // position of each declared variable in the prefix
    let mut order = vec![0usize; n];
    let quantifiers: Vec<Quantifier> = q.prefix().iter().map(|(qt, _)| *qt).collect();
    for (p, (_, v)) in q.prefix().iter().enumerate() {
        let idx = csp.variables().iter().position(|x| x == v).expect("validated prefix");
        order[idx] = p;
    }
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (ci, c) in compiled.constraints.iter().enumerate() {
        let last = c.scope.iter().map(|&i| order[i] + 1).max().unwrap_or(0);
        by_last[last].push(ci);
    }
    let prefix_var: Vec<usize> = q
        .prefix()
        .iter()
        .map(|(_, v)| csp.variables().iter().position(|x| x == v).expect("validated"))
        .collect();
    let mut values = vec![0 as Value; n];

    struct Ctx<'a> {
        d: usize,
        quantifiers: &'a [Quantifier],
        prefix_var: &'a [usize],
        by_last: &'a [Vec<usize>],
        compiled: &'a crate::model::Compiled<'a>,
    }
    fn eval(ctx: &Ctx<'_>, pos: usize, values: &mut Vec<Value>) -> bool {
        if pos == ctx.prefix_var.len() {
            return true;
        }
        let var = ctx.prefix_var[pos];
        let branch = |v: Value, values: &mut Vec<Value>| {
            values[var] = v;
            ctx.by_last[pos + 1]
                .iter()
                .all(|&ci| ctx.compiled.constraints[ci].holds(values))
                && eval(ctx, pos + 1, values)
        };
        match ctx.quantifiers[pos] {
            Quantifier::Forall => (0..ctx.d as Value).all(|v| branch(v, values)),
            Quantifier::Exists => (0..ctx.d as Value).any(|v| branch(v, values)),
        }
    }
    // constraints over no prefix position cannot exist; by_last[0] is empty
    let ctx = Ctx {
        d,
        quantifiers: &quantifiers,
        prefix_var: &prefix_var,
        by_last: &by_last,
        compiled: &compiled,
    };
    Ok(eval(&ctx, 0, &mut values))
}

/// Every constraint has a tuple agreeing with `p` on the constrained
/// variables that `p` assigns. Assigned variables outside the instance are
/// ignored.
pub fn is_partial_solution(inst: &CspInstance, p: &PartialAssignment) -> bool {
    inst.constraints().iter().all(|c| {
        let rel = inst.language().get(&c.relation).expect("validated");
        rel.tuples().any(|t| {
            c.vars
                .iter()
                .zip(t)
                .all(|(v, &x)| p.get(v).is_none_or(|y| y == x))
        })
    })
}

/// The smallest relation pp-definable from `lang` that contains `rel`: the
/// coordinate-wise images of the tuple list of `rel` under every polymorphism
/// of arity `|rel|`. For empty `rel` these are the constant tuples `c…c`
/// with `c` a constant polymorphism.
pub fn pp_closure(rel: &Relation, lang: &ConstraintLanguage, budget: &Budget) -> Result<Relation> {
    if rel.domain_size() != lang.domain_size() {
        return Err(Error::DomainMismatch {
            left: rel.domain_size(),
            right: lang.domain_size(),
        });
    }
    if rel.is_empty() {
        // nullary polymorphisms: the constants every relation admits
        let constants = (0..lang.domain_size() as Value)
            .filter(|&c| lang.relations().all(|r| r.contains(&vec![c; r.arity()])))
            .map(|c| vec![c; rel.arity()]);
        return Relation::new(rel.name(), rel.arity(), rel.domain_size(), constants);
    }
    let tuples: Vec<&Tuple> = rel.tuples().collect();
    let pols = polymorphisms_of_arity(lang, tuples.len(), budget)?;
    let images = pols
        .iter()
        .map(|f| f.apply_coordinatewise(&tuples))
        .collect::<Result<Vec<_>>>()?;
    Relation::new(rel.name(), rel.arity(), rel.domain_size(), images)
}
