//! Explicit limits for every exhaustive procedure.
//!
//! Nothing in the crate silently truncates an enumeration: when a request is
//! larger than the configured budget the caller receives
//! [`Error::BudgetExceeded`].

use crate::error::{Error, Result};

/// Environment variable read by [`Budget::from_env`].
///
/// Format: comma separated `key=value` pairs, for example
/// `POLYCSP_BUDGET="op_table=16,search_vars=20,eq_vars=10"`.
pub const BUDGET_ENV: &str = "POLYCSP_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest operation table (d^m entries) that may be enumerated
    /// exhaustively. 16 admits arity 4 over the boolean domain.
    pub max_op_table: usize,
    /// Largest number of variables for exhaustive CSP/QCSP search at d=2.
    /// For larger domains the equivalent d^n bound applies.
    pub max_search_vars: usize,
    /// Largest number of variables in a quantified equality sentence.
    pub max_eq_vars: usize,
    /// Largest universal block that may be fully enumerated by families.
    pub max_family_vars: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_op_table: 16,
            max_search_vars: 20,
            max_eq_vars: 10,
            max_family_vars: 24,
        }
    }
}

impl Budget {
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(spec) => Self::parse(&spec),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut budget = Self::default();
        for (i, item) in spec.split(',').map(str::trim).enumerate() {
            if item.is_empty() {
                continue;
            }
            let bad = || Error::syntax(1, i + 1, format!("bad budget entry `{item}`"));
            let (key, value) = item.split_once('=').ok_or_else(bad)?;
            let value: usize = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "op_table" => budget.max_op_table = value,
                "search_vars" => budget.max_search_vars = value,
                "eq_vars" => budget.max_eq_vars = value,
                "family_vars" => budget.max_family_vars = value,
                _ => return Err(bad()),
            }
        }
        Ok(budget)
    }

    /// Check that an operation table of `d^m` entries may be enumerated.
    pub(crate) fn check_op_table(&self, domain_size: usize, arity: usize) -> Result<usize> {
        let len = checked_pow(domain_size, arity);
        match len {
            Some(len) if len <= self.max_op_table => Ok(len),
            _ => Err(Error::BudgetExceeded {
                what: "operation table entries",
                requested: len.map_or(u128::MAX, |l| l as u128),
                limit: self.max_op_table as u128,
            }),
        }
    }

    /// Check that `d^n` assignments may be searched.
    pub(crate) fn check_search(&self, domain_size: usize, vars: usize) -> Result<()> {
        let requested = (domain_size as u128).checked_pow(vars as u32);
        let limit = 1u128 << self.max_search_vars.min(120);
        match requested {
            Some(r) if r <= limit => Ok(()),
            _ => Err(Error::BudgetExceeded {
                what: "search assignments",
                requested: requested.unwrap_or(u128::MAX),
                limit,
            }),
        }
    }

    pub(crate) fn check_eq_vars(&self, vars: usize) -> Result<()> {
        if vars <= self.max_eq_vars {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                what: "equality sentence variables",
                requested: vars as u128,
                limit: self.max_eq_vars as u128,
            })
        }
    }

    pub(crate) fn check_family_vars(&self, vars: usize) -> Result<()> {
        if vars <= self.max_family_vars {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                what: "universal variables",
                requested: vars as u128,
                limit: self.max_family_vars as u128,
            })
        }
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_only_named_keys() {
        let b = Budget::parse("op_table=8, search_vars=12").unwrap();
        assert_eq!(b.max_op_table, 8);
        assert_eq!(b.max_search_vars, 12);
        assert_eq!(b.max_eq_vars, Budget::default().max_eq_vars);
    }

    #[test]
    fn parse_rejects_unknown_key() {
        assert!(matches!(Budget::parse("speed=3"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn op_table_limit() {
        let b = Budget::default();
        assert_eq!(b.check_op_table(2, 4).unwrap(), 16);
        assert!(matches!(
            b.check_op_table(2, 5),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
