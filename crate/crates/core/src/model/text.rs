// SPDX-License-Identifier: Apache-2.0

//! Line-oriented text form of a [`ConstraintModule`].
//!
//! ```text
//! module <name>
//! var <name> (reg|mem) (ptr|scalar) [export|import] [func]
//! <p> <- &<x>
//! <p> <- <q>
//! <p> <- *<q>
//! *<p> <- <q>
//! fun <f> ret=<r|_> args=(<a1>,...)
//! call <h> ret=<r|_> args=(<a1>,...)
//! flag <v> (ext_target|points_ext|pointees_escape|store_scalar|load_scalar|imported_func)
//! ```
//!
//! Tokens starting with `#` begin a comment that runs to the end of the line.

use std::fmt::Write as _;

use super::{validate, Constraint, ConstraintModule, Flags, Linkage, VarId, VarInfo, VarKind};
use crate::error::ModelError;

pub fn print_constraint_module(m: &ConstraintModule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "module {}", m.name());
    for info in m.vars() {
        let kind = match info.kind {
            VarKind::Register => "reg",
            VarKind::Memory => "mem",
        };
        let ty = if info.pointer_compatible {
            "ptr"
        } else {
            "scalar"
        };
        let _ = write!(out, "var {} {kind} {ty}", info.name);
        match info.linkage {
            Linkage::Internal => {}
            Linkage::Export => out.push_str(" export"),
            Linkage::Import => out.push_str(" import"),
        }
        if info.is_function {
            out.push_str(" func");
        }
        out.push('\n');
    }
    let name = |v: VarId| m.var(v).name.as_str();
    let slot = |v: &Option<VarId>| v.map_or("_", name);
    let slots = |args: &[Option<VarId>]| args.iter().map(slot).collect::<Vec<_>>().join(",");
    for c in m.constraints() {
        let _ = match c {
            Constraint::Base { ptr, target } => {
                writeln!(out, "{} <- &{}", name(*ptr), name(*target))
            }
            Constraint::Simple { dst, src } => writeln!(out, "{} <- {}", name(*dst), name(*src)),
            Constraint::Load { dst, addr } => writeln!(out, "{} <- *{}", name(*dst), name(*addr)),
            Constraint::Store { addr, src } => writeln!(out, "*{} <- {}", name(*addr), name(*src)),
            Constraint::Function { func, ret, args } => writeln!(
                out,
                "fun {} ret={} args=({})",
                name(*func),
                slot(ret),
                slots(args)
            ),
            Constraint::Call { callee, ret, args } => writeln!(
                out,
                "call {} ret={} args=({})",
                name(*callee),
                slot(ret),
                slots(args)
            ),
        };
    }
    for v in m.var_ids() {
        let flags = m.flags(v);
        for (f, kw) in Flags::ALL_NAMED {
            if flags.contains(f) {
                let _ = writeln!(out, "flag {} {kw}", name(v));
            }
        }
    }
    out
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    if let Some(pos) = out.iter().position(|t| t.text.starts_with('#')) {
        out.truncate(pos);
    }
    out
}

struct Parser {
    module: ConstraintModule,
    line: usize,
}

impl Parser {
    fn syntax(&self, column: usize, message: impl Into<String>) -> ModelError {
        ModelError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn resolve(&self, name: &str, column: usize) -> Result<VarId, ModelError> {
        self.module
            .lookup(name)
            .ok_or_else(|| ModelError::Undeclared {
                line: self.line,
                column,
                name: name.to_string(),
            })
    }

    fn slot(&self, name: &str, column: usize) -> Result<Option<VarId>, ModelError> {
        if name == "_" {
            Ok(None)
        } else {
            self.resolve(name, column).map(Some)
        }
    }

    fn var_decl(&mut self, toks: &[Token<'_>]) -> Result<(), ModelError> {
        if toks.len() < 4 {
            return Err(self.syntax(
                toks[0].column,
                "expected `var <name> (reg|mem) (ptr|scalar)`",
            ));
        }
        let kind = match toks[2].text {
            "reg" => VarKind::Register,
            "mem" => VarKind::Memory,
            other => return Err(self.syntax(toks[2].column, format!("unknown kind `{other}`"))),
        };
        let pointer_compatible = match toks[3].text {
            "ptr" => true,
            "scalar" => false,
            other => return Err(self.syntax(toks[3].column, format!("unknown type `{other}`"))),
        };
        let mut linkage = Linkage::Internal;
        let mut is_function = false;
        let mut rest = &toks[4..];
        if let Some(t) = rest.first() {
            match t.text {
                "export" => linkage = Linkage::Export,
                "import" => linkage = Linkage::Import,
                _ => {}
            }
            if linkage != Linkage::Internal {
                rest = &rest[1..];
            }
        }
        if let Some(t) = rest.first() {
            if t.text == "func" {
                is_function = true;
                rest = &rest[1..];
            }
        }
        if let Some(t) = rest.first() {
            return Err(self.syntax(t.column, format!("unexpected `{}`", t.text)));
        }
        let info = VarInfo {
            name: toks[1].text.to_string(),
            kind,
            pointer_compatible,
            linkage,
            is_function,
        };
        self.module.add_var(info).map_err(|e| match e {
            ModelError::DuplicateVar(n) | ModelError::InvalidName(n) => {
                self.syntax(toks[1].column, format!("bad or duplicate variable `{n}`"))
            }
            other => other,
        })?;
        Ok(())
    }

    fn head_constraint(&self, toks: &[Token<'_>]) -> Result<Constraint, ModelError> {
        if toks.len() != 4 {
            return Err(self.syntax(toks[0].column, "expected `<head> ret=<r> args=(...)`"));
        }
        let head = self.resolve(toks[1].text, toks[1].column)?;
        let ret_text = toks[2]
            .text
            .strip_prefix("ret=")
            .ok_or_else(|| self.syntax(toks[2].column, "expected `ret=`"))?;
        let ret = self.slot(ret_text, toks[2].column + 4)?;
        let args_text = toks[3]
            .text
            .strip_prefix("args=(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| self.syntax(toks[3].column, "expected `args=(...)`"))?;
        let mut args = Vec::new();
        if !args_text.is_empty() {
            let mut col = toks[3].column + 6;
            for a in args_text.split(',') {
                if a.is_empty() {
                    return Err(self.syntax(col, "empty argument"));
                }
                args.push(self.slot(a, col)?);
                col += a.len() + 1;
            }
        }
        Ok(if toks[0].text == "fun" {
            Constraint::Function {
                func: head,
                ret,
                args,
            }
        } else {
            Constraint::Call {
                callee: head,
                ret,
                args,
            }
        })
    }

    fn assignment(&self, toks: &[Token<'_>]) -> Result<Constraint, ModelError> {
        if toks.len() != 3 || toks[1].text != "<-" {
            return Err(self.syntax(toks[0].column, "expected `<lhs> <- <rhs>`"));
        }
        let (lhs, rhs) = (&toks[0], &toks[2]);
        if let Some(addr) = lhs.text.strip_prefix('*') {
            let addr = self.resolve(addr, lhs.column + 1)?;
            let src = self.resolve(rhs.text, rhs.column)?;
            return Ok(Constraint::Store { addr, src });
        }
        let dst = self.resolve(lhs.text, lhs.column)?;
        if let Some(target) = rhs.text.strip_prefix('&') {
            let tid = self.resolve(target, rhs.column + 1)?;
            if !self.module.var(tid).is_memory() {
                return Err(ModelError::BaseTargetRegister {
                    line: self.line,
                    column: rhs.column + 1,
                    name: target.to_string(),
                });
            }
            Ok(Constraint::Base {
                ptr: dst,
                target: tid,
            })
        } else if let Some(addr) = rhs.text.strip_prefix('*') {
            let addr = self.resolve(addr, rhs.column + 1)?;
            Ok(Constraint::Load { dst, addr })
        } else {
            let src = self.resolve(rhs.text, rhs.column)?;
            Ok(Constraint::Simple { dst, src })
        }
    }
}

/// Parses and validates a module in the text form above.
pub fn parse_constraint_module(text: &str) -> Result<ConstraintModule, ModelError> {
    let mut parser = Parser {
        module: ConstraintModule::default(),
        line: 0,
    };
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        parser.line = idx + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        if !seen_header {
            if toks[0].text != "module" || toks.len() != 2 {
                return Err(parser.syntax(toks[0].column, "expected `module <name>`"));
            }
            parser.module = ConstraintModule::new(toks[1].text);
            seen_header = true;
            continue;
        }
        match toks[0].text {
            "var" => parser.var_decl(&toks)?,
            "fun" | "call" => {
                let c = parser.head_constraint(&toks)?;
                parser.module.add_constraint(c);
            }
            "flag" => {
                if toks.len() != 3 {
                    return Err(parser.syntax(toks[0].column, "expected `flag <var> <kind>`"));
                }
                let v = parser.resolve(toks[1].text, toks[1].column)?;
                let f = Flags::from_keyword(toks[2].text).ok_or_else(|| {
                    parser.syntax(toks[2].column, format!("unknown flag `{}`", toks[2].text))
                })?;
                parser.module.set_flag(v, f);
            }
            "module" => return Err(parser.syntax(toks[0].column, "duplicate module header")),
            _ => {
                let c = parser.assignment(&toks)?;
                parser.module.add_constraint(c);
            }
        }
    }
    if !seen_header {
        return Err(ModelError::Syntax {
            line: 1,
            column: 1,
            message: "missing `module <name>` header".into(),
        });
    }
    let violations = validate(&parser.module);
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    Ok(parser.module)
}
