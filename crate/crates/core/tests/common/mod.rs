// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

pub mod exec;
pub mod oracle;

use andersen_core::frontend::{lower, parse_tiny_module, TinyModule};
use andersen_core::model::{parse_constraint_module, ConstraintModule};

pub const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");

pub fn corpus_text(file: &str) -> String {
    std::fs::read_to_string(format!("{CORPUS}/{file}")).expect("corpus file")
}

pub fn tiny(file: &str) -> TinyModule {
    parse_tiny_module(&corpus_text(file)).expect("corpus parses")
}

/// Every golden corpus module, lowered.
pub fn golden() -> Vec<ConstraintModule> {
    let mut names: Vec<String> = std::fs::read_dir(CORPUS)
        .expect("corpus dir")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .iter()
        .filter_map(|n| {
            if n.ends_with(".tir") {
                Some(lower(&tiny(n)).expect("corpus lowers"))
            } else if n.ends_with(".cons") {
                Some(parse_constraint_module(&corpus_text(n)).expect("corpus parses"))
            } else {
                None
            }
        })
        .collect()
}
