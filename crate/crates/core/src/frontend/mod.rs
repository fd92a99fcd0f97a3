// SPDX-License-Identifier: Apache-2.0

//! TinyIR: a small SSA-like module language, its parser, lowering to
//! constraints, and a linker for multi-module programs.

mod ast;
mod link;
mod lower;
mod parse;
mod summary;

pub use ast::{Function, Global, Param, Statement, TinyModule, ValueType};
pub use link::{link, Linked};
pub use lower::{lower, lower_with, register_name, LowerCx, Operand};
pub use parse::parse_tiny_module;
pub use summary::{CallSummary, SummaryTable};
