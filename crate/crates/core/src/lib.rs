// SPDX-License-Identifier: Apache-2.0

//! Inclusion-based (Andersen-style) points-to analysis for incomplete
//! programs, with the external region represented either explicitly (EP)
//! or implicitly through per-variable flags (IP).

pub mod alias;
pub mod error;
pub mod frontend;
pub mod graph;
pub mod harness;
pub mod model;
pub mod solver;

pub use error::Error;
pub use graph::{build_graph, ConstraintGraph, PointsTo, Representation, Solution, EXTERNAL};
pub use model::{Constraint, ConstraintModule, Flags, VarId, VarInfo};
pub use solver::{solve, solve_module, SolveStats, SolverConfig};
