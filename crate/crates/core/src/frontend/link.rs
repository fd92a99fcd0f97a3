// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::ast::{Statement, TinyModule, ValueType};
use crate::error::LinkError;
use crate::model::Linkage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SymKind {
    Global(ValueType),
    Function,
}

/// The result of [`link`]: the fused module and, per input module, the
/// symbols that were renamed to avoid clashes between internal names.
#[derive(Clone, Debug)]
pub struct Linked {
    pub module: TinyModule,
    pub renames: Vec<HashMap<String, String>>,
}

impl Linked {
    /// Translates a lowered variable name of input module `i` into the
    /// corresponding name in the linked module.
    pub fn translate(&self, i: usize, var: &str) -> String {
        let map = &self.renames[i];
        let (synthetic, rest) = match var.strip_prefix('$') {
            Some(r) => ("$", r),
            None => ("", var),
        };
        match rest.split_once("::") {
            Some((func, tail)) => match map.get(func) {
                Some(new) => format!("{synthetic}{new}::{tail}"),
                None => var.to_string(),
            },
            None => map.get(rest).cloned().unwrap_or_else(|| var.to_string()),
        }
    }
}

/// Links modules into one. Imports satisfied by another module's export
/// are dropped so references bind to the definition; unresolved imports
/// stay imports. Internal symbols whose name occurs in more than one
/// module are renamed `module.symbol`.
pub fn link(modules: &[TinyModule]) -> Result<Linked, LinkError> {
    let mut exports: HashMap<&str, SymKind> = HashMap::new();
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for m in modules {
        let syms = m
            .globals
            .iter()
            .map(|g| (g.name.as_str(), g.linkage, SymKind::Global(g.ty)))
            .chain(
                m.functions
                    .iter()
                    .map(|f| (f.name.as_str(), f.linkage, SymKind::Function)),
            );
        for (name, linkage, kind) in syms {
            *occurrences.entry(name).or_insert(0) += 1;
            if linkage == Linkage::Export && exports.insert(name, kind).is_some() {
                return Err(LinkError::DuplicateExport(name.to_string()));
            }
        }
    }

    let mut imports: HashMap<&str, SymKind> = HashMap::new();
    let mut renames = Vec::with_capacity(modules.len());
    for m in modules {
        let mut map = HashMap::new();
        let syms = m
            .globals
            .iter()
            .map(|g| (g.name.as_str(), g.linkage, SymKind::Global(g.ty)))
            .chain(
                m.functions
                    .iter()
                    .map(|f| (f.name.as_str(), f.linkage, SymKind::Function)),
            );
        for (name, linkage, kind) in syms {
            match linkage {
                Linkage::Internal if occurrences[name] > 1 => {
                    map.insert(name.to_string(), format!("{}.{name}", m.name));
                }
                Linkage::Import => {
                    let known = exports.get(name).or_else(|| imports.get(name));
                    if known.is_some_and(|k| *k != kind) {
                        return Err(LinkError::KindMismatch(name.to_string()));
                    }
                    imports.entry(name).or_insert(kind);
                }
                _ => {}
            }
        }
        renames.push(map);
    }

    if modules.len() == 1 {
        return Ok(Linked {
            module: modules[0].clone(),
            renames,
        });
    }

    let name = modules
        .iter()
        .map(|m| m.name.as_str())
        .collect::<Vec<_>>()
        .join("_");
    let mut out = TinyModule::new(name);
    let mut emitted_imports: HashMap<&str, ()> = HashMap::new();
    let keep =
        |name: &str, linkage: Linkage| linkage != Linkage::Import || !exports.contains_key(name);
    for (m, map) in modules.iter().zip(&renames) {
        let rn = |s: &str| map.get(s).cloned().unwrap_or_else(|| s.to_string());
        for g in &m.globals {
            if !keep(&g.name, g.linkage)
                || (g.linkage == Linkage::Import && emitted_imports.insert(&g.name, ()).is_some())
            {
                continue;
            }
            let mut g = g.clone();
            g.name = rn(&g.name);
            g.init = g.init.as_deref().map(rn);
            out.globals.push(g);
        }
        for f in &m.functions {
            if !keep(&f.name, f.linkage)
                || (f.linkage == Linkage::Import && emitted_imports.insert(&f.name, ()).is_some())
            {
                continue;
            }
            let mut f = f.clone();
            f.name = rn(&f.name);
            for s in &mut f.body {
                match s {
                    Statement::AddrOf { symbol, .. } => *symbol = rn(symbol),
                    Statement::Call { callee, .. } => *callee = rn(callee),
                    _ => {}
                }
            }
            out.functions.push(f);
        }
    }
    Ok(Linked {
        module: out,
        renames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_tiny_module;

    #[test]
    fn single_module_is_identity() {
        let m = parse_tiny_module("module a\nglobal g ptr\nfunc h() import\n").unwrap();
        let l = link(std::slice::from_ref(&m)).unwrap();
        assert_eq!(l.module, m);
    }

    #[test]
    fn import_binds_to_export() {
        let a = parse_tiny_module("module a\nfunc f() export {\n  ret\n}\n").unwrap();
        let b =
            parse_tiny_module("module b\nfunc f() import\nfunc g() {\n  call @f()\n}\n").unwrap();
        let l = link(&[a, b]).unwrap();
        assert_eq!(l.module.functions.len(), 2);
        assert_eq!(l.module.function("f").unwrap().linkage, Linkage::Export);
        assert!(l.module.functions.iter().all(|f| !f.is_import()));
    }

    #[test]
    fn clashing_internals_are_renamed() {
        let a =
            parse_tiny_module("module a\nglobal g ptr\nfunc f() {\n  %x = addr @g\n}\n").unwrap();
        let b =
            parse_tiny_module("module b\nglobal g ptr\nfunc f() {\n  %x = addr @g\n}\n").unwrap();
        let l = link(&[a, b]).unwrap();
        assert!(l.module.global("a.g").is_some() && l.module.global("b.g").is_some());
        assert_eq!(l.translate(1, "f::%x"), "b.f::%x");
        assert_eq!(l.translate(0, "$f::call#0"), "$a.f::call#0");
        assert_eq!(l.translate(0, "g"), "a.g");
    }

    #[test]
    fn duplicate_export_is_rejected() {
        let a = parse_tiny_module("module a\nglobal g ptr export\n").unwrap();
        let b = parse_tiny_module("module b\nglobal g ptr export\n").unwrap();
        assert_eq!(
            link(&[a, b]).unwrap_err(),
            LinkError::DuplicateExport("g".into())
        );
    }

    #[test]
    fn import_of_wrong_kind_is_rejected() {
        let a = parse_tiny_module("module a\nglobal g ptr export\n").unwrap();
        let b = parse_tiny_module("module b\nfunc g() import\n").unwrap();
        assert!(matches!(link(&[a, b]), Err(LinkError::KindMismatch(_))));
    }
}
