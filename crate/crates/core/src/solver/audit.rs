// SPDX-License-Identifier: Apache-2.0

//! Post-solve closure check over the module and its canonical solution.
//! It does not look at any solver state, so it judges every engine and
//! representation by the same standard.

use std::fmt;

use super::engine::{call_effects, CallEffect};
use crate::graph::{PointsTo, SlotRec, Solution};
use crate::model::{Constraint, ConstraintModule, Flags, VarId};

/// An inference rule whose premises hold but whose conclusion is missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

struct Checker<'a> {
    m: &'a ConstraintModule,
    sol: &'a Solution,
    empty: PointsTo,
    out: Vec<AuditViolation>,
}

impl Checker<'_> {
    fn name(&self, v: VarId) -> &str {
        &self.m.var(v).name
    }

    fn pts(&self, v: VarId) -> &PointsTo {
        self.sol.get(v).unwrap_or(&self.empty)
    }

    fn compatible(&self, v: VarId) -> bool {
        self.m.var(v).pointer_compatible
    }

    fn fail(&mut self, rule: &'static str, detail: String) {
        self.out.push(AuditViolation { rule, detail });
    }

    /// `v ⊒ Ω`
    fn require_px(&mut self, rule: &'static str, v: VarId) {
        if self.compatible(v) && !self.pts(v).external {
            let d = format!("{} lacks EXTERNAL", self.name(v));
            self.fail(rule, d);
        }
    }

    /// `Ω ⊒ v`: every pointee of v is externally accessible.
    fn require_escape(&mut self, rule: &'static str, v: VarId) {
        if !self.compatible(v) {
            return;
        }
        let e = self.sol.external_set();
        if let Some(x) = self.pts(v).targets().iter().find(|x| !e.contains(x)) {
            let d = format!("pointee {} of {} is not in E", self.name(*x), self.name(v));
            self.fail(rule, d);
        }
    }

    /// `dst ⊇ src` with cast semantics for pointer-incompatible ends.
    fn require_subset(&mut self, rule: &'static str, src: VarId, dst: VarId) {
        match (self.compatible(src), self.compatible(dst)) {
            (true, true) => {
                if !self.pts(src).is_subset(self.pts(dst)) {
                    let d = format!("{} ⊉ {}", self.name(dst), self.name(src));
                    self.fail(rule, d);
                }
            }
            (false, true) => self.require_px(rule, dst),
            (true, false) => self.require_escape(rule, src),
            (false, false) => {}
        }
    }

    fn slots(head: VarId, ret: &Option<VarId>, args: &[Option<VarId>]) -> SlotRec {
        SlotRec {
            head: head.0,
            ret: ret.map(|v| v.0),
            args: args.iter().map(|a| a.map(|v| v.0)).collect(),
        }
    }

    fn apply_effects(&mut self, rule: &'static str, call: &SlotRec, func: &SlotRec) {
        let mut effects = Vec::new();
        call_effects(call, func, &mut effects);
        for e in effects {
            match e {
                CallEffect::Edge { src, dst } => self.require_subset(rule, VarId(src), VarId(dst)),
                CallEffect::PointsExternal(v) => self.require_px(rule, VarId(v)),
                CallEffect::PointeesEscape(v) => self.require_escape(rule, VarId(v)),
            }
        }
    }

    fn call_external(&mut self, rule: &'static str, call: &SlotRec) {
        if let Some(r) = call.ret {
            self.require_px(rule, VarId(r));
        }
        for a in call.args.iter().flatten() {
            self.require_escape(rule, VarId(*a));
        }
    }
}

/// Checks that no rule of the base or extended inference system derives
/// anything the canonical solution does not already contain.
pub fn audit(m: &ConstraintModule, sol: &Solution) -> Vec<AuditViolation> {
    let mut c = Checker {
        m,
        sol,
        empty: PointsTo::default(),
        out: Vec::new(),
    };
    let e = sol.external_set().clone();

    let funcs: Vec<SlotRec> = m
        .constraints()
        .filter_map(|k| match k {
            Constraint::Function { func, ret, args } => Some(Checker::slots(*func, ret, args)),
            _ => None,
        })
        .collect();
    let funcs_of = |x: VarId| funcs.iter().filter(move |f| f.head == x.0);

    for (v, pt) in sol.iter() {
        if pt.external && !e.iter().all(|x| pt.contains(*x)) {
            let d = format!("{} has EXTERNAL but misses part of E", m.var(v).name);
            c.fail("canonical", d);
        }
    }

    for v in m.var_ids() {
        let f = m.flags(v);
        if f.contains(Flags::EXT_TARGET) && !e.contains(&v) {
            let d = format!("{} is not in E", m.var(v).name);
            c.fail("ext_target", d);
        }
        if f.contains(Flags::POINTS_EXTERNAL) {
            c.require_px("points_ext", v);
        }
        if f.contains(Flags::POINTEES_ESCAPE) {
            c.require_escape("pointees_escape", v);
        }
        let targets: Vec<VarId> = c.pts(v).targets().to_vec();
        if f.contains(Flags::STORE_SCALAR) {
            for &x in &targets {
                c.require_px("StoreScalar", x);
            }
        }
        if f.contains(Flags::LOAD_SCALAR) {
            for &x in &targets {
                c.require_escape("LoadScalar", x);
            }
        }
    }

    for &x in &e {
        c.require_px("InΩ", x);
        c.require_escape("InΩ", x);
        for f in funcs_of(x) {
            if let Some(r) = f.ret {
                c.require_escape("CalledByΩ", VarId(r));
            }
            for a in f.args.iter().flatten() {
                c.require_px("CalledByΩ", VarId(*a));
            }
        }
    }

    for k in m.constraints() {
        match k {
            Constraint::Base { ptr, target } => {
                if !c.pts(*ptr).contains(*target) {
                    let d = format!("{} misses {}", m.var(*ptr).name, m.var(*target).name);
                    c.fail("base", d);
                }
            }
            Constraint::Simple { dst, src } => c.require_subset("simple", *src, *dst),
            Constraint::Load { dst, addr } => {
                let pt = c.pts(*addr).clone();
                for &x in pt.targets() {
                    c.require_subset("load", x, *dst);
                }
                if pt.external {
                    c.require_px("LoadFromΩ", *dst);
                }
            }
            Constraint::Store { addr, src } => {
                let pt = c.pts(*addr).clone();
                for &x in pt.targets() {
                    c.require_subset("store", *src, x);
                }
                if pt.external {
                    c.require_escape("StoreToΩ", *src);
                }
            }
            Constraint::Function { .. } => {}
            Constraint::Call { callee, ret, args } => {
                let call = Checker::slots(*callee, ret, args);
                let pt = c.pts(*callee).clone();
                for &x in pt.targets() {
                    for f in funcs_of(x) {
                        c.apply_effects("call", &call, f);
                    }
                    if m.flags(x).contains(Flags::IMPORTED_FUNC) {
                        c.call_external("CallImp", &call);
                    }
                }
                if pt.external {
                    c.call_external("CallΩ", &call);
                }
            }
        }
    }
    c.out
}
