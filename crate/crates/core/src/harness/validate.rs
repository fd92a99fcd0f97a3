// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{build_graph, Solution, SolutionDiff};
use crate::model::ConstraintModule;
use crate::solver::{audit, solve, SolveStats, SolverConfig};

#[derive(Clone, Debug, Serialize)]
pub struct ConfigMismatch {
    pub baseline: String,
    pub config: String,
    pub var: String,
    pub baseline_set: String,
    pub config_set: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub module: String,
    pub configs: usize,
    pub mismatch: Option<ConfigMismatch>,
    /// Closure-audit findings for the common solution. When the solutions
    /// agree, auditing one of them covers every configuration.
    pub audit: Vec<String>,
    #[serde(skip)]
    pub stats: Vec<(SolverConfig, SolveStats)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.audit.is_empty()
    }
}

pub struct ConfigRun {
    pub config: SolverConfig,
    pub solution: Solution,
    pub stats: SolveStats,
}

pub fn run_config(m: &ConstraintModule, cfg: SolverConfig) -> ConfigRun {
    let mut g = build_graph(m, cfg.representation);
    let stats = solve(&mut g, cfg).expect("enumerated configurations are valid");
    let solution = g.canonical_solution().expect("solved");
    ConfigRun {
        config: cfg,
        solution,
        stats,
    }
}

/// Solves `m` under `configs` and compares every canonical solution with
/// the first one.
pub fn validate_configs(m: &ConstraintModule, configs: &[SolverConfig]) -> ValidationReport {
    let runs: Vec<ConfigRun> = configs.par_iter().map(|&c| run_config(m, c)).collect();
    let mut report = ValidationReport {
        module: m.name().to_string(),
        configs: runs.len(),
        mismatch: None,
        audit: Vec::new(),
        stats: Vec::new(),
    };
    let Some(base) = runs.first() else {
        return report;
    };
    report.audit = audit(m, &base.solution)
        .iter()
        .map(|v| v.to_string())
        .collect();
    for r in &runs {
        if report.mismatch.is_none() {
            if let Some(SolutionDiff { var, left, right }) =
                base.solution.first_difference(&r.solution)
            {
                report.mismatch = Some(ConfigMismatch {
                    baseline: base.config.to_string(),
                    config: r.config.to_string(),
                    var,
                    baseline_set: left,
                    config_set: right,
                });
            }
        }
    }
    report.stats = runs.into_iter().map(|r| (r.config, r.stats)).collect();
    report
}

pub fn validate_all_configs(m: &ConstraintModule) -> ValidationReport {
    validate_configs(m, &SolverConfig::enumerate())
}
