//! Prefix patterns and the Π₂ decision procedure that only inspects a
//! polynomial family of universal assignments.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::SchaeferOp;
use crate::budget::Budget;
use crate::classify::{schaefer_witnesses, PrefixKind};
use crate::error::{Error, Result};
use crate::model::{Assignment, Constraint, ConstraintLanguage, CspInstance, QcspInstance, Quantifier, Relation, Value};

/// Maximal blocks of equal quantifiers, outermost first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrefixPattern {
    blocks: Vec<(Quantifier, usize)>,
}

impl PrefixPattern {
    pub fn from_quantifiers(qs: impl IntoIterator<Item = Quantifier>) -> Self {
        let mut blocks: Vec<(Quantifier, usize)> = Vec::new();
        for q in qs {
            match blocks.last_mut() {
                Some((last, n)) if *last == q => *n += 1,
                _ => blocks.push((q, 1)),
            }
        }
        PrefixPattern { blocks }
    }

    pub fn blocks(&self) -> &[(Quantifier, usize)] {
        &self.blocks
    }

    /// The block quantifiers, e.g. `∃∀∃`.
    pub fn pattern(&self) -> Vec<Quantifier> {
        self.blocks.iter().map(|(q, _)| *q).collect()
    }

    /// `Σk` when the outermost block is existential, `Πk` when universal,
    /// with `k` the number of blocks. `None` for the empty prefix.
    pub fn class(&self) -> Option<(PrefixKind, usize)> {
        let kind = match self.blocks.first()?.0 {
            Quantifier::Exists => PrefixKind::Sigma,
            Quantifier::Forall => PrefixKind::Pi,
        };
        Some((kind, self.blocks.len()))
    }

    pub fn class_label(&self) -> String {
        match self.class() {
            Some((kind, k)) => format!("{kind}{k}"),
            None => "Σ0".into(),
        }
    }
}

impl fmt::Display for PrefixPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in self.pattern() {
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

pub fn prefix_pattern(q: &QcspInstance) -> PrefixPattern {
    PrefixPattern::from_quantifiers(q.prefix().iter().map(|(qt, _)| *qt))
}

/// `[≤ max, value]`: assignments sending at most `max` variables to `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FamilyComponent {
    pub max: usize,
    pub value: bool,
}

impl FamilyComponent {
    pub fn new(max: usize, value: bool) -> Self {
        FamilyComponent { max, value }
    }

    pub fn contains(&self, values: &[Value]) -> bool {
        let b = Value::from(self.value);
        values.iter().filter(|&&v| v == b).count() <= self.max
    }

    /// `Σ_{i ≤ max} C(m, i)`.
    pub fn size(&self, m: usize) -> u128 {
        let mut total = 0u128;
        let mut binom = 1u128;
        for i in 0..=self.max.min(m) {
            total += binom;
            binom = binom * (m - i) as u128 / (i + 1) as u128;
        }
        total
    }
}

impl fmt::Display for FamilyComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[≤{},{}]", self.max, self.value)
    }
}

/// A union of `[≤ j, b]` sets over the universal variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct AssignmentFamily {
    components: BTreeSet<FamilyComponent>,
}

impl AssignmentFamily {
    pub fn new(components: impl IntoIterator<Item = FamilyComponent>) -> Self {
        AssignmentFamily {
            components: components.into_iter().collect(),
        }
    }

    pub fn single(max: usize, value: bool) -> Self {
        Self::new([FamilyComponent::new(max, value)])
    }

    pub fn union(&self, other: &AssignmentFamily) -> Self {
        Self::new(self.components.iter().chain(&other.components).copied())
    }

    pub fn components(&self) -> impl Iterator<Item = &FamilyComponent> {
        self.components.iter()
    }

    pub fn contains(&self, values: &[Value]) -> bool {
        self.components.iter().any(|c| c.contains(values))
    }

    /// Whether every member of `other` over `m` variables is a member of
    /// `self`.
    pub fn covers(&self, other: &AssignmentFamily, m: usize) -> bool {
        family_values(other, m).iter().all(|v| self.contains(v))
    }

    /// The default family for a language: `[≤1,false]` for ∧, `[≤1,true]`
    /// for ∨ and `[≤2,false]` for majority or minority.
    pub fn default_for(lang: &ConstraintLanguage) -> Result<Self> {
        let ws = schaefer_witnesses(lang)?;
        for op in [SchaeferOp::And, SchaeferOp::Or, SchaeferOp::Majority, SchaeferOp::Minority] {
            if ws.contains(&op) {
                return Ok(sound_families(op).swap_remove(0));
            }
        }
        Err(Error::NoTractableMethod)
    }
}

impl fmt::Display for AssignmentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

/// Parses unions such as `[<=1,false]|[<=0,true]`; `≤`, `∪`, brackets and
/// `0`/`1` for the value are also accepted.
impl FromStr for AssignmentFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("cannot parse family `{s}`"));
        let mut comps = Vec::new();
        for part in s.split(['|', '∪']) {
            let part = part.trim().trim_start_matches('[').trim_end_matches(']');
            let part = part.trim_start_matches("<=").trim_start_matches('≤');
            let (j, b) = part.split_once(',').ok_or_else(bad)?;
            let max: usize = j.trim().parse().map_err(|_| bad())?;
            let value = match b.trim() {
                "false" | "0" => false,
                "true" | "1" => true,
                _ => return Err(bad()),
            };
            comps.push(FamilyComponent::new(max, value));
        }
        Ok(AssignmentFamily::new(comps))
    }
}

/// Families known to be sound for Π₂ instances over languages preserved by
/// `op`; the first one is the default. Empty for the constants.
pub fn sound_families(op: SchaeferOp) -> Vec<AssignmentFamily> {
    let s = AssignmentFamily::single;
    match op {
        SchaeferOp::And => vec![s(1, false)],
        SchaeferOp::Or => vec![s(1, true)],
        SchaeferOp::Majority => vec![
            s(2, false),
            s(2, true),
            s(1, false).union(&s(0, true)),
            s(1, true).union(&s(0, false)),
        ],
        SchaeferOp::Minority => vec![s(2, false), s(2, true), s(1, false), s(1, true)],
        SchaeferOp::Const0 | SchaeferOp::Const1 => Vec::new(),
    }
}

/// Whether `fam` over `m` universal variables contains one of the sound
/// families of some non-constant polymorphism of `lang`.
pub fn family_is_sound(fam: &AssignmentFamily, lang: &ConstraintLanguage, m: usize) -> Result<bool> {
    let ws = schaefer_witnesses(lang)?;
    Ok(ws
        .into_iter()
        .flat_map(sound_families)
        .any(|req| fam.covers(&req, m)))
}

/// Sort key of a member: for the component that needs the fewest
/// variables sent to its value, those positions (shorter lists first).
fn member_key(fam: &AssignmentFamily, v: &[Value]) -> (usize, Vec<usize>) {
    fam.components
        .iter()
        .filter(|c| c.contains(v))
        .map(|c| {
            let b = Value::from(c.value);
            let pos: Vec<usize> = (0..v.len()).filter(|&i| v[i] == b).collect();
            (pos.len(), pos)
        })
        .min()
        .expect("member of some component")
}

/// Members as value vectors, deduplicated, ordered by [`member_key`].
fn family_values(fam: &AssignmentFamily, m: usize) -> Vec<Vec<Value>> {
    let mut out: BTreeSet<Vec<Value>> = BTreeSet::new();
    for c in &fam.components {
        let b = Value::from(c.value);
        let mut chosen: Vec<usize> = Vec::new();
        fn go(m: usize, left: usize, start: usize, b: Value, chosen: &mut Vec<usize>, out: &mut BTreeSet<Vec<Value>>) {
            let mut v = vec![1 - b; m];
            for &i in chosen.iter() {
                v[i] = b;
            }
            out.insert(v);
            if left == 0 {
                return;
            }
            for i in start..m {
                chosen.push(i);
                go(m, left - 1, i + 1, b, chosen, out);
                chosen.pop();
            }
        }
        go(m, c.max.min(m), 0, b, &mut chosen, &mut out);
    }
    let mut members: Vec<Vec<Value>> = out.into_iter().collect();
    members.sort_by_cached_key(|v| (member_key(fam, v), v.clone()));
    members
}

/// Members of `fam` over `ys`: fewest variables sent to the component's
/// value first, then lexicographically by which variables (in `ys` order)
/// those are.
pub fn enumerate_family(fam: &AssignmentFamily, ys: &[String], budget: &Budget) -> Result<Vec<Assignment>> {
    budget.check_family_vars(ys.len())?;
    Ok(family_values(fam, ys.len())
        .iter()
        .map(|v| Assignment::from_values(ys, v))
        .collect())
}

/// Result of [`pi2_decide`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi2Outcome {
    pub holds: bool,
    /// The first family member, in enumeration order, with no extension.
    pub counterexample: Option<Assignment>,
    pub members_checked: usize,
}

/// The existential and universal variables of a prefix of class Π₂, Π₁, Σ₁
/// or empty, in prefix order.
fn split_prefix(q: &QcspInstance) -> Result<(Vec<String>, Vec<String>)> {
    let pattern = prefix_pattern(q);
    let ok = matches!(
        pattern.pattern().as_slice(),
        [] | [Quantifier::Exists] | [Quantifier::Forall] | [Quantifier::Forall, Quantifier::Exists]
    );
    if !ok {
        return Err(Error::UnsupportedPrefixClass(pattern.class_label()));
    }
    let pick = |want: Quantifier| -> Vec<String> {
        q.prefix()
            .iter()
            .filter(|(qt, _)| *qt == want)
            .map(|(_, v)| v.clone())
            .collect()
    };
    Ok((pick(Quantifier::Forall), pick(Quantifier::Exists)))
}

/// Instantiate the universal variables: each constraint becomes its
/// restriction to tuples agreeing with `ys`, projected onto the existential
/// positions. `None` when a fully universal constraint is violated.
pub fn residual_instance(q: &QcspInstance, ys: &Assignment) -> Result<Option<CspInstance>> {
    let d = q.csp().domain_size();
    let mut lang = ConstraintLanguage::new(d)?;
    let mut constraints = Vec::new();
    for (ci, c) in q.constraints().iter().enumerate() {
        let rel = q.language().get(&c.relation)?;
        let free: Vec<usize> = (0..c.vars.len()).filter(|&i| ys.get(&c.vars[i]).is_none()).collect();
        let agrees = |t: &[Value]| {
            c.vars
                .iter()
                .zip(t)
                .all(|(v, &x)| ys.get(v).is_none_or(|y| y == x))
        };
        if free.is_empty() {
            if !rel.tuples().any(|t| agrees(t)) {
                return Ok(None);
            }
            continue;
        }
        let tuples: Vec<Vec<Value>> = rel
            .tuples()
            .filter(|t| agrees(t))
            .map(|t| free.iter().map(|&i| t[i]).collect())
            .collect();
        let name = format!("{}#{ci}", c.relation);
        lang.insert(Relation::new(name.clone(), free.len(), d, tuples)?)?;
        constraints.push(Constraint::new(name, free.iter().map(|&i| c.vars[i].clone())));
    }
    let xs: Vec<String> = q
        .prefix()
        .iter()
        .filter(|(_, v)| ys.get(v).is_none())
        .map(|(_, v)| v.clone())
        .collect();
    CspInstance::new(Arc::new(lang), xs, constraints).map(Some)
}

/// Decide a Π₂ sentence by checking that every member of `fam` extends to
/// the existential variables, using `base` for the residual CSPs. Members
/// are tried in the order of [`enumerate_family`] and the first failure is
/// reported.
pub fn pi2_decide<F>(q: &QcspInstance, fam: &AssignmentFamily, budget: &Budget, mut base: F) -> Result<Pi2Outcome>
where
    F: FnMut(&CspInstance) -> Result<Option<Assignment>>,
{
    let (ys, _) = split_prefix(q)?;
    if !family_is_sound(fam, q.language(), ys.len())? {
        return Err(Error::Precondition(format!(
            "family {fam} is not known to be sound for this language"
        )));
    }
    let members = enumerate_family(fam, &ys, budget)?;
    let mut checked = 0;
    for member in members {
        checked += 1;
        let extends = match residual_instance(q, &member)? {
            None => false,
            Some(residual) => base(&residual)?.is_some(),
        };
        if !extends {
            return Ok(Pi2Outcome {
                holds: false,
                counterexample: Some(member),
                members_checked: checked,
            });
        }
    }
    Ok(Pi2Outcome {
        holds: true,
        counterexample: None,
        members_checked: checked,
    })
}

/// [`pi2_decide`] with the default family and the dispatching CSP solver.
pub fn pi2_solve(q: &QcspInstance, budget: &Budget) -> Result<Pi2Outcome> {
    let fam = AssignmentFamily::default_for(q.language())?;
    pi2_decide(q, &fam, budget, |inst| {
        Ok(crate::solvers::dispatch_solve(inst)?.assignment)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_language, parse_qcsp};
    use crate::oracle::brute_eval_qcsp;

    fn q(lang: &str, text: &str) -> QcspInstance {
        parse_qcsp(text, Arc::new(parse_language(lang).unwrap())).unwrap()
    }

    fn pattern_of(s: &str) -> PrefixPattern {
        PrefixPattern::from_quantifiers(s.chars().map(|c| match c {
            'A' => Quantifier::Forall,
            _ => Quantifier::Exists,
        }))
    }

    const HORN_LANG: &str = "domain 2\nrelation IMP 2\n00 01 11\nrelation R23 3\n000 001 010 011 100 101 111\nrelation NAND 2\n00 01 10\n";
    // ¬y ∨ x1, ¬y' ∨ ¬x1 ∨ y, ¬x2 ∨ ¬y, ¬y'' ∨ ¬x1 ∨ x2
    const HORN: &str = "vars y y1 y2 x1 x2\nconstraint IMP y x1\nconstraint R23 y1 x1 y\nconstraint NAND x2 y\nconstraint R23 y2 x1 x2\nprefix A y A y1 A y2 E x1 E x2\n";

    const TWO_SAT_LANG: &str = "domain 2\nrelation IMP 2\n00 01 11\nrelation NAND 2\n00 01 10\n";
    const TWO_SAT: &str = "vars v t u w\nconstraint IMP u v\nconstraint NAND u v\nconstraint IMP v w\nconstraint IMP w t\nconstraint IMP t v\nprefix A v A t E u E w\n";

    #[test]
    fn patterns() {
        let p = pattern_of("EEAAE");
        assert_eq!(p.to_string(), "∃∀∃");
        assert_eq!(p.class(), Some((PrefixKind::Sigma, 3)));
        assert_eq!(p.blocks(), &[(Quantifier::Exists, 2), (Quantifier::Forall, 2), (Quantifier::Exists, 1)]);
        assert_eq!(pattern_of("AAA").class(), Some((PrefixKind::Pi, 1)));
        assert_eq!(pattern_of("AAEE").class(), Some((PrefixKind::Pi, 2)));
        assert_eq!(pattern_of("").class(), None);
    }

    #[test]
    fn family_counts() {
        let ys = |n: usize| (0..n).map(|i| format!("y{i}")).collect::<Vec<_>>();
        let b = Budget::default();
        assert_eq!(enumerate_family(&AssignmentFamily::single(1, false), &ys(3), &b).unwrap().len(), 4);
        assert_eq!(enumerate_family(&AssignmentFamily::single(2, false), &ys(4), &b).unwrap().len(), 11);
        let ex = AssignmentFamily::single(1, false).union(&AssignmentFamily::single(0, true));
        assert_eq!(enumerate_family(&ex, &ys(3), &b).unwrap().len(), 5);
        for m in 0..10 {
            assert_eq!(FamilyComponent::new(2, false).size(m), (1 + m + m * m.saturating_sub(1) / 2) as u128);
        }
    }

    #[test]
    fn family_order() {
        let ys: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let members = enumerate_family(&AssignmentFamily::single(1, false), &ys, &Budget::default()).unwrap();
        let shown: Vec<String> = members.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["a=1 b=1 c=1", "a=0 b=1 c=1", "a=1 b=0 c=1", "a=1 b=1 c=0"]);
        let dual = enumerate_family(&AssignmentFamily::single(1, true), &ys, &Budget::default()).unwrap();
        let shown: Vec<String> = dual.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["a=0 b=0 c=0", "a=1 b=0 c=0", "a=0 b=1 c=0", "a=0 b=0 c=1"]);
    }

    #[test]
    fn family_parsing() {
        let f: AssignmentFamily = "[<=1,false]|[<=0,true]".parse().unwrap();
        assert_eq!(f, AssignmentFamily::single(1, false).union(&AssignmentFamily::single(0, true)));
        assert_eq!(f.to_string().parse::<AssignmentFamily>().unwrap(), f);
        assert!("[1,maybe]".parse::<AssignmentFamily>().is_err());
    }

    #[test]
    fn horn_example() {
        let inst = q(HORN_LANG, HORN);
        let out = pi2_decide(&inst, &AssignmentFamily::single(1, false), &Budget::default(), |c| {
            crate::oracle::brute_solve(c, &Budget::default())
        })
        .unwrap();
        assert!(!out.holds);
        assert!(!brute_eval_qcsp(&inst, &Budget::default()).unwrap());
        assert_eq!(out.counterexample.unwrap().to_string(), "y=1 y1=1 y2=1");
        assert_eq!(out.members_checked, 1);
        // y' = false fails as well: y forces x1, then x2 both ways
        let other: Assignment = [("y", 1), ("y1", 0), ("y2", 1)].into_iter().collect();
        let residual = residual_instance(&inst, &other).unwrap().unwrap();
        assert_eq!(crate::oracle::brute_solve(&residual, &Budget::default()).unwrap(), None);
    }

    #[test]
    fn two_sat_example() {
        let inst = q(TWO_SAT_LANG, TWO_SAT);
        let out = pi2_solve(&inst, &Budget::default()).unwrap();
        assert!(!out.holds);
        assert!(!brute_eval_qcsp(&inst, &Budget::default()).unwrap());
        // ¬t ∨ v already fails at v=0, t=1, the first member with a false
        assert_eq!(out.counterexample.unwrap().to_string(), "t=1 v=0");
        // v=1,t=0 forces w both ways
        let bad: Assignment = [("v", 1), ("t", 0)].into_iter().collect();
        let residual = residual_instance(&inst, &bad).unwrap().unwrap();
        assert_eq!(crate::oracle::brute_solve(&residual, &Budget::default()).unwrap(), None);
    }

    #[test]
    fn no_universals_is_csp() {
        let inst = q(TWO_SAT_LANG, "vars a b\nconstraint IMP a b\nconstraint NAND a b\nprefix E a E b\n");
        let out = pi2_solve(&inst, &Budget::default()).unwrap();
        assert!(out.holds);
        assert_eq!(out.members_checked, 1);
    }

    #[test]
    fn rejects_other_prefixes_and_unsound_families() {
        let inst = q(TWO_SAT_LANG, "vars a b c\nconstraint IMP a b\nconstraint IMP b c\nprefix E a A b E c\n");
        assert!(matches!(pi2_solve(&inst, &Budget::default()), Err(Error::UnsupportedPrefixClass(_))));
        let horn = q(HORN_LANG, HORN);
        let err = pi2_decide(&horn, &AssignmentFamily::single(0, false), &Budget::default(), |_| Ok(None));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
