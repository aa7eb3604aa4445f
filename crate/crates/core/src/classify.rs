//! Complexity classification of boolean languages for the CSP, the QCSP and
//! the QCSP restricted to a bounded-alternation prefix class.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::algebra::{is_polymorphism, SchaeferOp};
use crate::error::{Error, Result};
use crate::model::ConstraintLanguage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PrefixKind {
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "pi")]
    Pi,
}

impl fmt::Display for PrefixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefixKind::Sigma => "Σ",
            PrefixKind::Pi => "Π",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Csp,
    Qcsp,
    QcspPrefix { k: usize, prefix: PrefixKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardnessClass {
    NpComplete,
    PspaceComplete,
    SigmaP(usize),
    PiP(usize),
}

impl HardnessClass {
    /// ASCII label used in reports.
    pub fn label(self) -> String {
        match self {
            HardnessClass::NpComplete => "NP-complete".into(),
            HardnessClass::PspaceComplete => "PSPACE-complete".into(),
            HardnessClass::SigmaP(k) => format!("Sigma_{k}^p-complete"),
            HardnessClass::PiP(k) => format!("Pi_{k}^p-complete"),
        }
    }
}

impl Serialize for HardnessClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl fmt::Display for HardnessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardnessClass::NpComplete => f.write_str("NP-complete"),
            HardnessClass::PspaceComplete => f.write_str("PSPACE-complete"),
            HardnessClass::SigmaP(k) => write!(f, "Σ{k}ᵖ-complete"),
            HardnessClass::PiP(k) => write!(f, "Π{k}ᵖ-complete"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Tractable { witnesses: BTreeSet<SchaeferOp> },
    Hard { class: HardnessClass },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub problem: Problem,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl Classification {
    pub fn is_tractable(&self) -> bool {
        matches!(self.verdict, Verdict::Tractable { .. })
    }

    pub fn witnesses(&self) -> BTreeSet<SchaeferOp> {
        match &self.verdict {
            Verdict::Tractable { witnesses } => witnesses.clone(),
            Verdict::Hard { .. } => BTreeSet::new(),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Tractable { witnesses } => {
                let names: Vec<&str> = witnesses.iter().map(|w| w.name()).collect();
                write!(f, "tractable via {{{}}}", names.join(", "))
            }
            Verdict::Hard { class } => write!(f, "{class}"),
        }
    }
}

/// The members of the six operations that preserve `lang`.
pub fn schaefer_witnesses(lang: &ConstraintLanguage) -> Result<BTreeSet<SchaeferOp>> {
    lang.require_boolean()?;
    let mut out = BTreeSet::new();
    for op in SchaeferOp::ALL {
        if is_polymorphism(&op.operation(), lang)? {
            out.insert(op);
        }
    }
    Ok(out)
}

fn non_constant(ws: BTreeSet<SchaeferOp>) -> BTreeSet<SchaeferOp> {
    ws.into_iter()
        .filter(|w| !matches!(w, SchaeferOp::Const0 | SchaeferOp::Const1))
        .collect()
}

fn verdict(witnesses: BTreeSet<SchaeferOp>, hard: HardnessClass) -> Verdict {
    if witnesses.is_empty() {
        Verdict::Hard { class: hard }
    } else {
        Verdict::Tractable { witnesses }
    }
}

pub fn schaefer_classify(lang: &ConstraintLanguage) -> Result<Classification> {
    Ok(Classification {
        problem: Problem::Csp,
        verdict: verdict(schaefer_witnesses(lang)?, HardnessClass::NpComplete),
    })
}

/// Constants do not help once universal quantifiers are allowed.
pub fn qcsp_classify(lang: &ConstraintLanguage) -> Result<Classification> {
    Ok(Classification {
        problem: Problem::Qcsp,
        verdict: verdict(non_constant(schaefer_witnesses(lang)?), HardnessClass::PspaceComplete),
    })
}

/// Tractable for every `k ≥ 1` when one of and/or/majority/minority is a
/// polymorphism. Hardness labels are only given for the classes with an
/// existential innermost quantifier: `Π_k` with even `k ≥ 2` and `Σ_k` with
/// odd `k ≥ 3`.
pub fn bounded_alternation_classify(
    lang: &ConstraintLanguage,
    k: usize,
    prefix: PrefixKind,
) -> Result<Classification> {
    if k == 0 {
        return Err(Error::UnsupportedPrefixClass(format!("{prefix}0")));
    }
    let problem = Problem::QcspPrefix { k, prefix };
    let witnesses = non_constant(schaefer_witnesses(lang)?);
    if !witnesses.is_empty() {
        return Ok(Classification {
            problem,
            verdict: Verdict::Tractable { witnesses },
        });
    }
    let class = match prefix {
        PrefixKind::Pi if k >= 2 && k.is_multiple_of(2) => HardnessClass::PiP(k),
        PrefixKind::Sigma if k >= 3 && !k.is_multiple_of(2) => HardnessClass::SigmaP(k),
        _ => return Err(Error::UnsupportedPrefixClass(format!("{prefix}{k}"))),
    };
    Ok(Classification {
        problem,
        verdict: Verdict::Hard { class },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_language;

    const GAMMA3: &str = "domain 2\nrelation R03 3\n001 010 011 100 101 110 111\nrelation R13 3\n000 001 010 011 101 110 111\nrelation R23 3\n000 001 010 011 100 101 111\nrelation R33 3\n000 001 010 011 100 101 110\n";

    #[test]
    fn named_languages() {
        let g3 = parse_language(GAMMA3).unwrap();
        assert_eq!(schaefer_classify(&g3).unwrap().verdict, Verdict::Hard { class: HardnessClass::NpComplete });
        assert_eq!(qcsp_classify(&g3).unwrap().verdict, Verdict::Hard { class: HardnessClass::PspaceComplete });

        let nae = parse_language("domain 2\nrelation NAE 3\n001 010 011 100 101 110\n").unwrap();
        assert!(!schaefer_classify(&nae).unwrap().is_tractable());

        let c0c1s = parse_language("domain 2\nrelation C0 1\n0\nrelation C1 1\n1\nrelation S 3\n000 001 011 100 110 111\n").unwrap();
        assert!(!schaefer_classify(&c0c1s).unwrap().is_tractable());

        let horn = parse_language("domain 2\nrelation IMP 2\n00 01 11\nrelation C0 1\n0\nrelation C1 1\n1\n").unwrap();
        assert!(schaefer_classify(&horn).unwrap().witnesses().contains(&SchaeferOp::And));
    }

    #[test]
    fn qcsp_ignores_constants() {
        let two = parse_language("domain 2\nrelation OR2 2\n01 10 11\nrelation NAND 2\n00 01 10\n").unwrap();
        assert!(qcsp_classify(&two).unwrap().witnesses().contains(&SchaeferOp::Majority));
        // contains both constant tuples but is closed under none of the four
        let both = parse_language("domain 2\nrelation S 3\n000 001 011 100 110 111\n").unwrap();
        let ws = schaefer_witnesses(&both).unwrap();
        assert_eq!(ws, [SchaeferOp::Const0, SchaeferOp::Const1].into_iter().collect());
        assert!(schaefer_classify(&both).unwrap().is_tractable());
        assert!(!qcsp_classify(&both).unwrap().is_tractable());
    }

    #[test]
    fn empty_language_has_all_witnesses() {
        let empty = ConstraintLanguage::new(2).unwrap();
        assert_eq!(schaefer_witnesses(&empty).unwrap().len(), 6);
    }

    #[test]
    fn bounded_alternation() {
        let g3 = parse_language(GAMMA3).unwrap();
        assert_eq!(
            bounded_alternation_classify(&g3, 2, PrefixKind::Pi).unwrap().verdict,
            Verdict::Hard { class: HardnessClass::PiP(2) }
        );
        assert_eq!(
            bounded_alternation_classify(&g3, 3, PrefixKind::Sigma).unwrap().verdict,
            Verdict::Hard { class: HardnessClass::SigmaP(3) }
        );
        assert!(matches!(
            bounded_alternation_classify(&g3, 2, PrefixKind::Sigma),
            Err(Error::UnsupportedPrefixClass(_))
        ));
        let two = parse_language("domain 2\nrelation OR2 2\n01 10 11\n").unwrap();
        assert!(bounded_alternation_classify(&two, 3, PrefixKind::Sigma).unwrap().is_tractable());
    }

    #[test]
    fn rejects_non_boolean() {
        let l = ConstraintLanguage::new(3).unwrap();
        assert!(matches!(schaefer_classify(&l), Err(Error::DomainMismatch { .. })));
    }
}
