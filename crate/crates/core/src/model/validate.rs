// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::{Constraint, ConstraintModule, Flags, Linkage, VarId, VarKind};

/// A broken invariant of a [`ConstraintModule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownVar(VarId),
    RegisterNotInternal(String),
    FunctionNotMemory(String),
    BaseTargetNotMemory { ptr: String, target: String },
    BasePointerIncompatible(String),
    NotAFunction(String),
    IncompatibleSlot { head: String, var: String },
    IncompatibleCallee(String),
    IncompatibleAddress(String),
    ImportedFuncOnNonFunction(String),
    ExtTargetOnRegister(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVar(v) => write!(f, "constraint references unknown {v}"),
            Violation::RegisterNotInternal(n) => write!(f, "register `{n}` has external linkage"),
            Violation::FunctionNotMemory(n) => write!(f, "function `{n}` is not a memory variable"),
            Violation::BaseTargetNotMemory { ptr, target } => {
                write!(f, "`{ptr} <- &{target}` targets a register")
            }
            Violation::BasePointerIncompatible(n) => {
                write!(f, "base constraint on pointer-incompatible `{n}`")
            }
            Violation::NotAFunction(n) => write!(f, "`fun {n}` on a non-function variable"),
            Violation::IncompatibleSlot { head, var } => {
                write!(f, "slot `{var}` of `{head}` is not pointer compatible")
            }
            Violation::IncompatibleCallee(n) => write!(f, "callee `{n}` is not pointer compatible"),
            Violation::IncompatibleAddress(n) => {
                write!(f, "dereferenced `{n}` is not pointer compatible")
            }
            Violation::ImportedFuncOnNonFunction(n) => {
                write!(f, "imported_func flag on non-function `{n}`")
            }
            Violation::ExtTargetOnRegister(n) => write!(f, "ext_target flag on register `{n}`"),
        }
    }
}

/// Checks every structural invariant; an empty result means well formed.
pub fn validate(m: &ConstraintModule) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = m.num_vars();
    let name = |v: VarId| m.var(v).name.clone();

    for v in m.var_ids() {
        let info = m.var(v);
        if info.kind == VarKind::Register && info.linkage != Linkage::Internal {
            out.push(Violation::RegisterNotInternal(info.name.clone()));
        }
        if info.is_function && info.kind != VarKind::Memory {
            out.push(Violation::FunctionNotMemory(info.name.clone()));
        }
        if m.flags(v).contains(Flags::EXT_TARGET) && info.kind == VarKind::Register {
            out.push(Violation::ExtTargetOnRegister(info.name.clone()));
        }
        if m.flags(v).contains(Flags::IMPORTED_FUNC) && !info.is_function {
            out.push(Violation::ImportedFuncOnNonFunction(info.name.clone()));
        }
    }

    for c in m.constraints() {
        if let Some(bad) = c.operands().into_iter().find(|v| v.index() >= n) {
            out.push(Violation::UnknownVar(bad));
            continue;
        }
        let compatible = |v: VarId| m.var(v).pointer_compatible;
        match c {
            Constraint::Base { ptr, target } => {
                if !m.var(*target).is_memory() {
                    out.push(Violation::BaseTargetNotMemory {
                        ptr: name(*ptr),
                        target: name(*target),
                    });
                }
                if !compatible(*ptr) {
                    out.push(Violation::BasePointerIncompatible(name(*ptr)));
                }
            }
            Constraint::Simple { .. } => {}
            Constraint::Load { addr, .. } | Constraint::Store { addr, .. } => {
                if !compatible(*addr) {
                    out.push(Violation::IncompatibleAddress(name(*addr)));
                }
            }
            Constraint::Function { func, ret, args } => {
                if !m.var(*func).is_function {
                    out.push(Violation::NotAFunction(name(*func)));
                }
                for v in ret.iter().chain(args.iter().flatten()) {
                    if !compatible(*v) {
                        out.push(Violation::IncompatibleSlot {
                            head: name(*func),
                            var: name(*v),
                        });
                    }
                }
            }
            Constraint::Call { callee, ret, args } => {
                if !compatible(*callee) {
                    out.push(Violation::IncompatibleCallee(name(*callee)));
                }
                for v in ret.iter().chain(args.iter().flatten()) {
                    if !compatible(*v) {
                        out.push(Violation::IncompatibleSlot {
                            head: name(*callee),
                            var: name(*v),
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarInfo;

    fn base() -> (ConstraintModule, VarId, VarId) {
        let mut m = ConstraintModule::new("t");
        let p = m.add_var(VarInfo::register("p", true)).unwrap();
        let x = m
            .add_var(VarInfo::memory("x", true, Linkage::Internal))
            .unwrap();
        m.add_constraint(Constraint::Base { ptr: p, target: x });
        (m, p, x)
    }

    #[test]
    fn valid_module_has_no_violations() {
        let (m, _, _) = base();
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn call_through_scalar_is_flagged() {
        let (mut m, _, _) = base();
        let h = m.add_var(VarInfo::register("h", false)).unwrap();
        m.add_constraint(Constraint::Call {
            callee: h,
            ret: None,
            args: vec![],
        });
        assert_eq!(
            validate(&m),
            vec![Violation::IncompatibleCallee("h".into())]
        );
    }

    #[test]
    fn ext_target_on_register_is_flagged() {
        let (mut m, p, _) = base();
        m.set_flag(p, Flags::EXT_TARGET);
        assert_eq!(
            validate(&m),
            vec![Violation::ExtTargetOnRegister("p".into())]
        );
    }

    #[test]
    fn imported_func_on_data_is_flagged() {
        let (mut m, _, x) = base();
        m.set_flag(x, Flags::IMPORTED_FUNC);
        assert_eq!(
            validate(&m),
            vec![Violation::ImportedFuncOnNonFunction("x".into())]
        );
    }

    #[test]
    fn unknown_operand_is_flagged() {
        let (mut m, p, _) = base();
        m.add_constraint(Constraint::Simple {
            dst: p,
            src: VarId(99),
        });
        assert_eq!(validate(&m), vec![Violation::UnknownVar(VarId(99))]);
    }
}
