// SPDX-License-Identifier: Apache-2.0

//! Constraint variables and the base/extended constraint languages.
//!
//! A [`ConstraintModule`] is the unit handed to the solver: a list of
//! variables (registers and abstract memory locations), a set of base
//! constraints, and the per-variable flags of the extended language that
//! describe interaction with the external region.

mod text;
mod validate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

pub use text::{parse_constraint_module, print_constraint_module};
pub use validate::{validate, Violation};

use crate::error::ModelError;

/// Index of a constraint variable within its module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Register,
    Memory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Linkage {
    Internal,
    Export,
    Import,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub pointer_compatible: bool,
    pub linkage: Linkage,
    pub is_function: bool,
}

impl VarInfo {
    pub fn register(name: impl Into<String>, pointer_compatible: bool) -> Self {
        VarInfo {
            name: name.into(),
            kind: VarKind::Register,
            pointer_compatible,
            linkage: Linkage::Internal,
            is_function: false,
        }
    }

    pub fn memory(name: impl Into<String>, pointer_compatible: bool, linkage: Linkage) -> Self {
        VarInfo {
            name: name.into(),
            kind: VarKind::Memory,
            pointer_compatible,
            linkage,
            is_function: false,
        }
    }

    pub fn function(name: impl Into<String>, linkage: Linkage) -> Self {
        VarInfo {
            name: name.into(),
            kind: VarKind::Memory,
            pointer_compatible: false,
            linkage,
            is_function: true,
        }
    }

    pub fn is_memory(&self) -> bool {
        self.kind == VarKind::Memory
    }

    /// Variables introduced by lowering (call routing registers, memcpy
    /// temporaries, return slots). They never appear in reported solutions.
    pub fn is_synthetic(&self) -> bool {
        self.name.starts_with('$')
    }
}

bitflags! {
    /// The six constraint forms of the extended language, one bit each.
    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub struct Flags: u8 {
        /// `Ω ⊒ {x}`: x is externally accessible.
        const EXT_TARGET = 1 << 0;
        /// `p ⊒ Ω`: p may target any externally accessible location.
        const POINTS_EXTERNAL = 1 << 1;
        /// `Ω ⊒ p`: every pointee of p is externally accessible.
        const POINTEES_ESCAPE = 1 << 2;
        /// `*p ⊒ Ω`: a scalar is stored through p.
        const STORE_SCALAR = 1 << 3;
        /// `Ω ⊒ *p`: a scalar is loaded through p.
        const LOAD_SCALAR = 1 << 4;
        /// `ImportedFunc(f)`.
        const IMPORTED_FUNC = 1 << 5;
    }
}

impl Flags {
    /// Flags describing a variable in its role as a pointee. They are never
    /// merged by unification.
    pub const LOCATION: Flags = Flags::EXT_TARGET.union(Flags::IMPORTED_FUNC);
    /// Flags describing a variable in its role as a pointer.
    pub const POINTER: Flags = Flags::POINTS_EXTERNAL
        .union(Flags::POINTEES_ESCAPE)
        .union(Flags::STORE_SCALAR)
        .union(Flags::LOAD_SCALAR);

    pub const ALL_NAMED: [(Flags, &'static str); 6] = [
        (Flags::EXT_TARGET, "ext_target"),
        (Flags::POINTS_EXTERNAL, "points_ext"),
        (Flags::POINTEES_ESCAPE, "pointees_escape"),
        (Flags::STORE_SCALAR, "store_scalar"),
        (Flags::LOAD_SCALAR, "load_scalar"),
        (Flags::IMPORTED_FUNC, "imported_func"),
    ];

    pub fn keyword(self) -> Option<&'static str> {
        Self::ALL_NAMED
            .iter()
            .find(|(f, _)| *f == self)
            .map(|(_, k)| *k)
    }

    pub fn from_keyword(word: &str) -> Option<Flags> {
        Self::ALL_NAMED
            .iter()
            .find(|(_, k)| *k == word)
            .map(|(f, _)| *f)
    }
}

/// A constraint of the base language. Variant order is the print order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// `ptr ⊇ {target}`
    Base { ptr: VarId, target: VarId },
    /// `dst ⊇ src`
    Simple { dst: VarId, src: VarId },
    /// `dst ⊇ *addr`
    Load { dst: VarId, addr: VarId },
    /// `*addr ⊇ src`
    Store { addr: VarId, src: VarId },
    /// `Func(func, ret, args...)`; `None` marks a pointer-incompatible slot.
    Function {
        func: VarId,
        ret: Option<VarId>,
        args: Vec<Option<VarId>>,
    },
    /// `CallFunc(callee, ret, args...)`
    Call {
        callee: VarId,
        ret: Option<VarId>,
        args: Vec<Option<VarId>>,
    },
}

impl Constraint {
    /// Every variable the constraint mentions, in operand order.
    pub fn operands(&self) -> Vec<VarId> {
        match self {
            Constraint::Base { ptr, target } => vec![*ptr, *target],
            Constraint::Simple { dst, src } => vec![*dst, *src],
            Constraint::Load { dst, addr } => vec![*dst, *addr],
            Constraint::Store { addr, src } => vec![*addr, *src],
            Constraint::Function {
                func: head,
                ret,
                args,
            }
            | Constraint::Call {
                callee: head,
                ret,
                args,
            } => {
                let mut v = vec![*head];
                v.extend(ret.iter().copied());
                v.extend(args.iter().flatten().copied());
                v
            }
        }
    }

    /// Number of argument slots for Function and Call constraints.
    pub fn arity(&self) -> usize {
        match self {
            Constraint::Function { args, .. } | Constraint::Call { args, .. } => args.len(),
            _ => 0,
        }
    }
}

/// A parsed or lowered unit of constraints.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstraintModule {
    name: String,
    vars: Arc<Vec<VarInfo>>,
    by_name: HashMap<String, VarId>,
    constraints: BTreeSet<Constraint>,
    flags: Vec<Flags>,
}

impl ConstraintModule {
    pub fn new(name: impl Into<String>) -> Self {
        ConstraintModule {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_var(&mut self, info: VarInfo) -> Result<VarId, ModelError> {
        if !is_valid_name(&info.name) {
            return Err(ModelError::InvalidName(info.name));
        }
        if self.by_name.contains_key(&info.name) {
            return Err(ModelError::DuplicateVar(info.name));
        }
        let id = VarId(u32::try_from(self.vars.len()).map_err(|_| ModelError::TooManyVars)?);
        self.by_name.insert(info.name.clone(), id);
        Arc::make_mut(&mut self.vars).push(info);
        self.flags.push(Flags::empty());
        Ok(id)
    }

    /// Inserts a constraint. Returns false if it was already present.
    pub fn add_constraint(&mut self, c: Constraint) -> bool {
        self.constraints.insert(c)
    }

    pub fn set_flag(&mut self, v: VarId, flag: Flags) {
        self.flags[v.index()] |= flag;
    }

    pub fn flags(&self, v: VarId) -> Flags {
        self.flags[v.index()]
    }

    pub fn var(&self, v: VarId) -> &VarInfo {
        &self.vars[v.index()]
    }

    /// The variable table, shared rather than copied.
    pub(crate) fn shared_vars(&self) -> Arc<Vec<VarInfo>> {
        Arc::clone(&self.vars)
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len() as u32).map(VarId)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> + '_ {
        self.constraints.iter()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        self.constraints.contains(c)
    }

    /// Largest argument count over all Function and Call constraints.
    pub fn max_arity(&self) -> usize {
        self.constraints
            .iter()
            .map(Constraint::arity)
            .max()
            .unwrap_or(0)
    }
}

/// Names are whitespace-free tokens that cannot be confused with the
/// operators of the text format.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "_"
        && !name.starts_with('#')
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '=' | '&' | '*' | '<'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_constraint_is_noop() {
        let mut m = ConstraintModule::new("m");
        let p = m.add_var(VarInfo::register("p", true)).unwrap();
        let x = m
            .add_var(VarInfo::memory("x", false, Linkage::Internal))
            .unwrap();
        assert!(m.add_constraint(Constraint::Base { ptr: p, target: x }));
        let before = m.clone();
        assert!(!m.add_constraint(Constraint::Base { ptr: p, target: x }));
        assert_eq!(m, before);
    }

    #[test]
    fn every_extended_form_has_one_flag() {
        let all: Vec<_> = Flags::ALL_NAMED.iter().map(|(f, _)| *f).collect();
        assert_eq!(all.len(), 6);
        let union = all.iter().fold(Flags::empty(), |a, f| a | *f);
        assert_eq!(union.bits().count_ones(), 6);
        assert_eq!(Flags::LOCATION | Flags::POINTER, union);
        for (f, k) in Flags::ALL_NAMED {
            assert_eq!(Flags::from_keyword(k), Some(f));
            assert_eq!(f.keyword(), Some(k));
        }
    }

    #[test]
    fn rejects_bad_names() {
        let mut m = ConstraintModule::new("m");
        assert!(m.add_var(VarInfo::register("a b", true)).is_err());
        assert!(m.add_var(VarInfo::register("_", true)).is_err());
        assert!(m.add_var(VarInfo::register("*p", true)).is_err());
        m.add_var(VarInfo::register("f::%p", true)).unwrap();
        assert!(matches!(
            m.add_var(VarInfo::register("f::%p", true)),
            Err(ModelError::DuplicateVar(_))
        ));
    }
}
