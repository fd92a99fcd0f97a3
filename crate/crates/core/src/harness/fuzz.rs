// SPDX-License-Identifier: Apache-2.0

//! Partial-versus-whole soundness: each module solved alone must cover
//! what the linked program derives for the module's variables.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate_program, FuzzParams};
use crate::error::Error;
use crate::frontend::{link, lower, TinyModule};
use crate::graph::Solution;
use crate::solver::{solve_module, SolverConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessViolation {
    pub module: String,
    pub var: String,
    /// A member of the whole-program set the partial set does not cover.
    pub target: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzFailure {
    pub seed: u64,
    pub violations: Vec<SoundnessViolation>,
    /// Minimized program still showing a violation, as TinyIR text.
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzReport {
    pub programs: usize,
    pub modules: usize,
    pub checked_vars: usize,
    pub failures: Vec<FuzzFailure>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn solved(m: &TinyModule, cfg: SolverConfig) -> Result<Solution, Error> {
    let lowered = lower(m)?;
    Ok(solve_module(&lowered, cfg)?.0)
}

/// Checks one program; returns the violations and the number of checked
/// variables.
pub fn check_program(
    modules: &[TinyModule],
    cfg: SolverConfig,
) -> Result<(Vec<SoundnessViolation>, usize), Error> {
    let linked = link(modules)?;
    let whole = solved(&linked.module, cfg)?;
    let mut out = Vec::new();
    let mut checked = 0;
    for (i, m) in modules.iter().enumerate() {
        let part = solved(m, cfg)?;
        let local: HashMap<String, &str> =
            part.names().map(|n| (linked.translate(i, n), n)).collect();
        for (v, pv) in part.iter() {
            let name = part.name(v);
            let Some(wv) = whole.get_by_name(&linked.translate(i, name)) else {
                continue;
            };
            checked += 1;
            let mut fail = |target: &str| {
                out.push(SoundnessViolation {
                    module: m.name.clone(),
                    var: name.to_string(),
                    target: target.to_string(),
                })
            };
            if wv.external && !pv.external {
                fail(crate::graph::EXTERNAL);
            }
            for &x in wv.targets() {
                let xname = whole.name(x);
                let covered = match local.get(xname) {
                    Some(lx) => {
                        let lx = part.lookup(lx).expect("local name");
                        pv.contains(lx) || (pv.external && part.external_set().contains(&lx))
                    }
                    None => pv.external,
                };
                if !covered {
                    fail(xname);
                }
            }
        }
    }
    Ok((out, checked))
}

fn has_violation(modules: &[TinyModule], cfg: SolverConfig) -> bool {
    matches!(check_program(modules, cfg), Ok((v, _)) if !v.is_empty())
}

/// Greedily drops statements while a violation remains.
pub fn minimize(modules: &[TinyModule], cfg: SolverConfig) -> Vec<TinyModule> {
    let mut cur = modules.to_vec();
    loop {
        let mut changed = false;
        for i in 0..cur.len() {
            for f in 0..cur[i].functions.len() {
                let mut s = cur[i].functions[f].body.len();
                while s > 0 {
                    s -= 1;
                    let mut trial = cur.clone();
                    trial[i].functions[f].body.remove(s);
                    let text = trial[i].to_string();
                    let parses = crate::frontend::parse_tiny_module(&text).is_ok();
                    if parses && has_violation(&trial, cfg) {
                        cur = trial;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

/// Runs `programs` seeded programs starting at `p.seed`.
pub fn fuzz_soundness(
    p: &FuzzParams,
    programs: usize,
    cfg: SolverConfig,
) -> Result<FuzzReport, Error> {
    let results = (0..programs as u64)
        .into_par_iter()
        .map(|k| {
            let seed = p.seed + k;
            let params = FuzzParams { seed, ..p.clone() };
            let modules = generate_program(&params);
            let (v, checked) = check_program(&modules, cfg)?;
            Ok((seed, v, checked))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut report = FuzzReport {
        programs,
        modules: programs * p.modules,
        ..FuzzReport::default()
    };
    for (seed, violations, checked) in results {
        report.checked_vars += checked;
        if !violations.is_empty() {
            let modules = generate_program(&FuzzParams { seed, ..p.clone() });
            let witness = minimize(&modules, cfg)
                .iter()
                .map(|m| m.to_string())
                .collect();
            report.failures.push(FuzzFailure {
                seed,
                violations,
                witness,
            });
        }
    }
    Ok(report)
}
