// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::ast::{Function, Statement, TinyModule, ValueType};
use super::summary::SummaryTable;
use crate::error::FrontendError;
use crate::model::{Constraint, ConstraintModule, Flags, Linkage, VarId, VarInfo};

/// A lowered value: its variable and whether it can hold a pointer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Operand {
    pub var: VarId,
    pub pointer: bool,
}

/// Name of the register variable for `%reg` inside `func`.
pub fn register_name(func: &str, reg: &str) -> String {
    format!("{func}::%{reg}")
}

/// Lowering state for one function body. Summaries receive it to emit
/// their constraints.
pub struct LowerCx<'a> {
    module: &'a mut ConstraintModule,
    func: String,
    counters: &'a mut HashMap<String, usize>,
}

impl LowerCx<'_> {
    pub fn function(&self) -> &str {
        &self.func
    }

    fn fresh_name(&mut self, stem: &str) -> String {
        let k = self.counters.entry(stem.to_string()).or_insert(0);
        let name = format!("{stem}#{k}");
        *k += 1;
        name
    }

    /// A new abstract heap location for this function, `f::malloc#k`.
    pub fn fresh_heap(&mut self) -> VarId {
        let name = self.fresh_name(&format!("{}::malloc", self.func));
        self.module
            .add_var(VarInfo::memory(name, true, Linkage::Internal))
            .expect("fresh names are unique")
    }

    /// A new synthetic pointer register, `$f::<stem>#k`.
    pub fn fresh_register(&mut self, stem: &str) -> VarId {
        let name = self.fresh_name(&format!("${}::{stem}", self.func));
        self.module
            .add_var(VarInfo::register(name, true))
            .expect("fresh names are unique")
    }

    pub fn flag(&mut self, v: VarId, f: Flags) {
        self.module.set_flag(v, f);
    }

    pub fn base(&mut self, ptr: VarId, target: VarId) {
        self.module.add_constraint(Constraint::Base { ptr, target });
    }

    /// `dst ⊇ src`; a mixed pair becomes the matching cast flag.
    pub fn simple(&mut self, dst: Operand, src: Operand) {
        match (dst.pointer, src.pointer) {
            (true, true) => {
                if dst.var != src.var {
                    self.module.add_constraint(Constraint::Simple {
                        dst: dst.var,
                        src: src.var,
                    });
                }
            }
            (true, false) => self.flag(dst.var, Flags::POINTS_EXTERNAL),
            (false, true) => self.flag(src.var, Flags::POINTEES_ESCAPE),
            (false, false) => {}
        }
    }

    /// `dst ⊇ *addr`
    pub fn load(&mut self, dst: Operand, addr: VarId) {
        if dst.pointer {
            self.module
                .add_constraint(Constraint::Load { dst: dst.var, addr });
        } else {
            self.flag(addr, Flags::LOAD_SCALAR);
        }
    }

    /// `*addr ⊇ src`
    pub fn store(&mut self, addr: VarId, src: Operand) {
        if src.pointer {
            self.module
                .add_constraint(Constraint::Store { addr, src: src.var });
        } else {
            self.flag(addr, Flags::STORE_SCALAR);
        }
    }

    pub fn call(&mut self, callee: VarId, ret: Option<Operand>, args: &[Operand]) {
        let slot = |o: &Operand| o.pointer.then_some(o.var);
        self.module.add_constraint(Constraint::Call {
            callee,
            ret: ret.as_ref().and_then(slot),
            args: args.iter().map(slot).collect(),
        });
    }
}

/// Lowers with the standard malloc/free/memcpy summaries.
pub fn lower(m: &TinyModule) -> Result<ConstraintModule, FrontendError> {
    lower_with(m, &SummaryTable::standard())
}

/// Lowers `m`, routing direct calls to imported functions that have an
/// entry in `summaries` through that summary instead of a call constraint.
pub fn lower_with(
    m: &TinyModule,
    summaries: &SummaryTable,
) -> Result<ConstraintModule, FrontendError> {
    let mut out = ConstraintModule::new(m.name.clone());
    let mut symbols: HashMap<&str, VarId> = HashMap::new();

    for g in &m.globals {
        let v = out.add_var(VarInfo::memory(&g.name, g.ty.is_pointer(), g.linkage))?;
        symbols.insert(&g.name, v);
    }
    for f in &m.functions {
        let v = out.add_var(VarInfo::function(&f.name, f.linkage))?;
        symbols.insert(&f.name, v);
    }

    for g in &m.globals {
        let v = symbols[g.name.as_str()];
        if g.linkage != Linkage::Internal {
            out.set_flag(v, Flags::EXT_TARGET);
        }
        if let Some(init) = &g.init {
            let target = *symbols
                .get(init.as_str())
                .ok_or_else(|| FrontendError::Undeclared {
                    line: 0,
                    name: init.clone(),
                })?;
            if g.ty.is_pointer() {
                out.add_constraint(Constraint::Base { ptr: v, target });
            } else {
                out.set_flag(target, Flags::EXT_TARGET);
            }
        }
    }
    for f in &m.functions {
        let v = symbols[f.name.as_str()];
        if f.linkage != Linkage::Internal {
            out.set_flag(v, Flags::EXT_TARGET);
        }
        if f.is_import() {
            out.set_flag(v, Flags::IMPORTED_FUNC);
        }
    }

    let mut counters = HashMap::new();
    for f in m.functions.iter().filter(|f| !f.is_import()) {
        lower_function(&mut out, m, f, &symbols, summaries, &mut counters)?;
    }
    Ok(out)
}

fn lower_function(
    out: &mut ConstraintModule,
    m: &TinyModule,
    f: &Function,
    symbols: &HashMap<&str, VarId>,
    summaries: &SummaryTable,
    counters: &mut HashMap<String, usize>,
) -> Result<(), FrontendError> {
    let mut regs: HashMap<&str, Operand> = HashMap::new();
    let define = |out: &mut ConstraintModule,
                  regs: &mut HashMap<&str, Operand>,
                  name: &'_ str,
                  ty: ValueType|
     -> Result<Operand, FrontendError> {
        if let Some(o) = regs.get(name) {
            return Ok(*o);
        }
        let var = out.add_var(VarInfo::register(
            register_name(&f.name, name),
            ty.is_pointer(),
        ))?;
        Ok(Operand {
            var,
            pointer: ty.is_pointer(),
        })
    };

    let mut params = Vec::new();
    for p in &f.params {
        let o = define(out, &mut regs, &p.name, p.ty)?;
        regs.insert(&p.name, o);
        params.push(o);
    }
    let ret_slot = match f.ret {
        Some(ValueType::Ptr) => {
            Some(out.add_var(VarInfo::register(format!("${}::ret", f.name), true))?)
        }
        _ => None,
    };
    out.add_constraint(Constraint::Function {
        func: symbols[f.name.as_str()],
        ret: ret_slot,
        args: params.iter().map(|o| o.pointer.then_some(o.var)).collect(),
    });

    let mut allocas: HashMap<&str, usize> = HashMap::new();
    for s in &f.body {
        let used = |regs: &HashMap<&str, Operand>, r: &str| -> Result<Operand, FrontendError> {
            regs.get(r)
                .copied()
                .ok_or_else(|| FrontendError::Undeclared {
                    line: 0,
                    name: format!("%{r}"),
                })
        };
        let mut cx = LowerCx {
            module: out,
            func: f.name.clone(),
            counters,
        };
        match s {
            Statement::Alloca { dest, cell } => {
                let k = allocas.entry(dest).or_insert(0);
                let name = match *k {
                    0 => format!("{}::{dest}", f.name),
                    k => format!("{}::{dest}#{k}", f.name),
                };
                *k += 1;
                let cellv = cx.module.add_var(VarInfo::memory(
                    name,
                    cell.is_pointer(),
                    Linkage::Internal,
                ))?;
                let d = define(cx.module, &mut regs, dest, ValueType::Ptr)?;
                regs.insert(dest, d);
                cx.base(d.var, cellv);
            }
            Statement::AddrOf { dest, symbol } => {
                let target =
                    *symbols
                        .get(symbol.as_str())
                        .ok_or_else(|| FrontendError::Undeclared {
                            line: 0,
                            name: format!("@{symbol}"),
                        })?;
                let d = define(cx.module, &mut regs, dest, ValueType::Ptr)?;
                regs.insert(dest, d);
                cx.base(d.var, target);
            }
            Statement::Copy { dest, src } => {
                let s = used(&regs, src)?;
                let ty = if s.pointer {
                    ValueType::Ptr
                } else {
                    ValueType::Scalar
                };
                let d = define(cx.module, &mut regs, dest, ty)?;
                regs.insert(dest, d);
                cx.simple(d, s);
            }
            Statement::Load { dest, addr, ty } => {
                let a = used(&regs, addr)?;
                let d = define(cx.module, &mut regs, dest, *ty)?;
                regs.insert(dest, d);
                cx.load(d, a.var);
            }
            Statement::Store { addr, src, ty } => {
                let a = used(&regs, addr)?;
                let s = used(&regs, src)?;
                match (ty.is_pointer(), s.pointer) {
                    (true, true) => cx.store(a.var, s),
                    (true, false) => cx.flag(a.var, Flags::STORE_SCALAR),
                    (false, sp) => {
                        cx.flag(a.var, Flags::STORE_SCALAR);
                        if sp {
                            cx.flag(s.var, Flags::POINTEES_ESCAPE);
                        }
                    }
                }
            }
            Statement::Call { dest, callee, args } => {
                let actuals = args
                    .iter()
                    .map(|a| used(&regs, a))
                    .collect::<Result<Vec<_>, _>>()?;
                let d = match dest {
                    Some((name, ty)) => {
                        let d = define(cx.module, &mut regs, name, *ty)?;
                        regs.insert(name, d);
                        Some(d)
                    }
                    None => None,
                };
                let imported = m.function(callee).is_some_and(Function::is_import);
                match summaries.get(callee).filter(|_| imported) {
                    Some(summary) => summary.lower_call(&mut cx, d, &actuals),
                    None => {
                        let target = *symbols.get(callee.as_str()).ok_or_else(|| {
                            FrontendError::Undeclared {
                                line: 0,
                                name: format!("@{callee}"),
                            }
                        })?;
                        let router = cx.fresh_register("call");
                        cx.base(router, target);
                        cx.call(router, d, &actuals);
                    }
                }
            }
            Statement::CallIndirect { dest, target, args } => {
                let t = used(&regs, target)?;
                let actuals = args
                    .iter()
                    .map(|a| used(&regs, a))
                    .collect::<Result<Vec<_>, _>>()?;
                let d = match dest {
                    Some((name, ty)) => {
                        let d = define(cx.module, &mut regs, name, *ty)?;
                        regs.insert(name, d);
                        Some(d)
                    }
                    None => None,
                };
                cx.call(t.var, d, &actuals);
            }
            Statement::Ret(v) => {
                if let Some(v) = v {
                    let v = used(&regs, v)?;
                    match ret_slot {
                        Some(r) => cx.simple(
                            Operand {
                                var: r,
                                pointer: true,
                            },
                            v,
                        ),
                        None if v.pointer => cx.flag(v.var, Flags::POINTEES_ESCAPE),
                        None => {}
                    }
                }
            }
            Statement::PtrToInt { dest, src } => {
                let s = used(&regs, src)?;
                let d = define(cx.module, &mut regs, dest, ValueType::Scalar)?;
                regs.insert(dest, d);
                if s.pointer {
                    cx.flag(s.var, Flags::POINTEES_ESCAPE);
                }
            }
            Statement::IntToPtr { dest, src } => {
                let s = used(&regs, src)?;
                let d = define(cx.module, &mut regs, dest, ValueType::Ptr)?;
                regs.insert(dest, d);
                if s.pointer {
                    cx.flag(s.var, Flags::POINTEES_ESCAPE);
                }
                cx.flag(d.var, Flags::POINTS_EXTERNAL);
            }
            Statement::Malloc { dest } => {
                let d = define(cx.module, &mut regs, dest, ValueType::Ptr)?;
                regs.insert(dest, d);
                super::summary::lower_malloc(&mut cx, Some(d));
            }
            Statement::Free { arg } => {
                used(&regs, arg)?;
            }
            Statement::Memcpy { dst, src } => {
                let d = used(&regs, dst)?;
                let s = used(&regs, src)?;
                super::summary::lower_memcpy(&mut cx, d, s);
            }
        }
    }
    Ok(())
}
