// SPDX-License-Identifier: Apache-2.0

//! Alias queries over a canonical solution and the per-function
//! load/store conflict rate.

use std::fmt;

use serde::Serialize;

use crate::error::AliasError;
use crate::frontend::{register_name, Statement, TinyModule};
use crate::graph::Solution;
use crate::model::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AliasResult {
    NoAlias,
    MayAlias,
    MustAlias,
}

impl fmt::Display for AliasResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AliasResult::NoAlias => "NoAlias",
            AliasResult::MayAlias => "MayAlias",
            AliasResult::MustAlias => "MustAlias",
        })
    }
}

/// MustAlias only for the same original variable; unification of equal
/// sets says nothing about runtime values.
pub fn alias(sol: &Solution, a: VarId, b: VarId) -> Result<AliasResult, AliasError> {
    let unknown = |v: VarId| {
        let known = v.index() < sol.names().count();
        AliasError::UnknownVar(if known {
            sol.name(v).to_string()
        } else {
            v.to_string()
        })
    };
    let pa = sol.get(a).ok_or_else(|| unknown(a))?;
    let pb = sol.get(b).ok_or_else(|| unknown(b))?;
    Ok(if a == b {
        AliasResult::MustAlias
    } else if pa.intersects(pb) {
        AliasResult::MayAlias
    } else {
        AliasResult::NoAlias
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AliasCounts {
    pub may: u64,
    pub no: u64,
    pub must: u64,
}

impl AliasCounts {
    pub fn total(&self) -> u64 {
        self.may + self.no + self.must
    }

    pub fn record(&mut self, r: AliasResult) {
        match r {
            AliasResult::NoAlias => self.no += 1,
            AliasResult::MayAlias => self.may += 1,
            AliasResult::MustAlias => self.must += 1,
        }
    }

    pub fn add(&mut self, other: &AliasCounts) {
        self.may += other.may;
        self.no += other.no;
        self.must += other.must;
    }

    /// MayAlias share in percent; 0 when there were no queries.
    pub fn may_percent(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => 100.0 * self.may as f64 / t as f64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConflictReport {
    pub functions: Vec<(String, AliasCounts)>,
    pub total: AliasCounts,
}

/// Queries every store against every other load and store of the same
/// function. Each unordered pair is counted once.
pub fn conflict_rate(sol: &Solution, m: &TinyModule) -> Result<ConflictReport, AliasError> {
    let mut report = ConflictReport::default();
    for f in m.functions.iter().filter(|f| !f.is_import()) {
        let mut accesses = Vec::new();
        for s in &f.body {
            if let Some(addr) = s.access_address() {
                let name = register_name(&f.name, addr);
                let v = sol
                    .lookup(&name)
                    .ok_or_else(|| AliasError::ModuleMismatch(m.name.clone()))?;
                accesses.push((matches!(s, Statement::Store { .. }), v));
            }
        }
        let mut counts = AliasCounts::default();
        for (i, &(si, a)) in accesses.iter().enumerate() {
            for &(sj, b) in &accesses[i + 1..] {
                if si || sj {
                    counts.record(alias(sol, a, b)?);
                }
            }
        }
        report.total.add(&counts);
        report.functions.push((f.name.clone(), counts));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lower, parse_tiny_module};
    use crate::solver::{solve_module, SolverConfig};
    use crate::Representation;

    fn solved(text: &str) -> (TinyModule, Solution) {
        let t = parse_tiny_module(text).unwrap();
        let m = lower(&t).unwrap();
        let cfg = SolverConfig::naive(Representation::Ip);
        (t, solve_module(&m, cfg).unwrap().0)
    }

    #[test]
    fn single_store_makes_no_queries() {
        let (t, sol) = solved("module m\nfunc f(%p: ptr) {\n  store ptr %p, %p\n}\n");
        let r = conflict_rate(&sol, &t).unwrap();
        assert_eq!(r.total.total(), 0);
    }

    #[test]
    fn two_stores_through_one_register() {
        let (t, sol) = solved("module m\nfunc f(%p: ptr, %k: scalar) {\n  store scalar %p, %k\n  store scalar %p, %k\n}\n");
        let r = conflict_rate(&sol, &t).unwrap();
        assert_eq!(
            r.total,
            AliasCounts {
                may: 0,
                no: 0,
                must: 1
            }
        );
    }

    #[test]
    fn disjoint_allocas() {
        let (t, sol) = solved(
            "module m\nfunc f(%k: scalar) {\n  %a = alloca scalar\n  %b = alloca scalar\n  store scalar %a, %k\n  %v = load scalar %b\n}\n",
        );
        let r = conflict_rate(&sol, &t).unwrap();
        assert_eq!(
            r.total,
            AliasCounts {
                may: 0,
                no: 1,
                must: 0
            }
        );
    }
}
