// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undeclared variable `{name}`")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: base target `{name}` is a register")]
    BaseTargetRegister {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("more than 2^32 variables")]
    TooManyVars,
    #[error("module is not well formed: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}: undeclared operand `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("{line}: imported function `{name}` has a body")]
    BodyOnImport { line: usize, name: String },
    #[error("{line}: function `{name}` has no body")]
    MissingBody { line: usize, name: String },
    #[error("{line}: duplicate symbol `{name}`")]
    DuplicateSymbol { line: usize, name: String },
    #[error("{line}: register `%{name}` redefined with a different type")]
    TypeMismatch { line: usize, name: String },
    #[error("{line}: `{name}` is not a function")]
    NotAFunction { line: usize, name: String },
    #[error("{line}: address operand `%{name}` is not a pointer")]
    ScalarAddress { line: usize, name: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error("symbol `{0}` is exported by more than one module")]
    DuplicateExport(String),
    #[error("symbol `{0}` is imported as a different kind than it is defined")]
    KindMismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot parse configuration `{0}`")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(&'static str),
    #[error("configuration uses {config} but the graph was built for {graph}")]
    RepresentationMismatch {
        config: &'static str,
        graph: &'static str,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AliasError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("solution does not belong to module `{0}`")]
    ModuleMismatch(String),
}

/// Umbrella error for callers that drive the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Alias(#[from] AliasError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
