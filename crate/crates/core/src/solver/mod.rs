// SPDX-License-Identifier: Apache-2.0

//! Fixpoint engines: the naive solver and the worklist solver with its
//! iteration orders, cycle detection, difference propagation and PIP.

mod audit;
mod config;
mod cycles;
mod engine;
mod hcd;
mod order;
mod ovs;

use std::time::Duration;

use serde::Serialize;

pub use audit::{audit, AuditViolation};
pub use config::{CycleDetection, Engine, Order, SolverConfig};
pub use engine::Solver;
pub use hcd::hcd_offline;
pub use ovs::ovs_preprocess;

use crate::error::ConfigError;
use crate::graph::{build_graph, ConstraintGraph, Solution};
use crate::model::ConstraintModule;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub node_visits: u64,
    /// Sum of `|Sol_e|` over representatives at the fixpoint.
    pub explicit_pointees: u64,
    pub edges_added: u64,
    pub edges_removed: u64,
    pub unifications: u64,
    /// Largest number of visits any node received while it was marked
    /// both points-external and pointees-escape.
    pub max_double_flag_visits: u32,
    /// `|Sol_e|` summed over representatives that are both points-external
    /// and pointees-escape at the fixpoint.
    pub doubly_flagged_pointees: u64,
    #[serde(rename = "solve_time_us", serialize_with = "as_micros")]
    pub solve_time: Duration,
}

fn as_micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_micros() as u64)
}

/// Solves `g` in place under `cfg`.
pub fn solve(g: &mut ConstraintGraph, cfg: SolverConfig) -> Result<SolveStats, ConfigError> {
    Ok(Solver::new(g, cfg)?.run())
}

/// Builds, solves and canonicalizes in one call.
pub fn solve_module(
    m: &ConstraintModule,
    cfg: SolverConfig,
) -> Result<(Solution, SolveStats), ConfigError> {
    let mut g = build_graph(m, cfg.representation);
    let stats = solve(&mut g, cfg)?;
    let sol = g.canonical_solution().expect("solver reached the fixpoint");
    Ok((sol, stats))
}
