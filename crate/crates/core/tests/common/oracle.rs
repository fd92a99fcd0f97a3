// SPDX-License-Identifier: Apache-2.0

//! Reference solver: applies every inference rule directly to canonical
//! sets until nothing changes. Slow, but shares no code with the engines.

use std::collections::{BTreeMap, BTreeSet};

use andersen_core::model::{Constraint, ConstraintModule, Flags, VarId};
use andersen_core::{PointsTo, Solution};

struct State<'a> {
    m: &'a ConstraintModule,
    pts: Vec<BTreeSet<u32>>,
    ext: Vec<bool>,
    e: BTreeSet<u32>,
    changed: bool,
}

impl State<'_> {
    fn compat(&self, v: u32) -> bool {
        self.m.var(VarId(v)).pointer_compatible
    }

    /// Explicit members plus E when the variable points external.
    fn full(&self, v: u32) -> BTreeSet<u32> {
        let mut s = self.pts[v as usize].clone();
        if self.ext[v as usize] {
            s.extend(self.e.iter().copied());
        }
        s
    }

    fn add_pts(&mut self, v: u32, x: u32) {
        if self.pts[v as usize].insert(x) {
            self.changed = true;
        }
    }

    fn set_ext(&mut self, v: u32) {
        if self.compat(v) && !self.ext[v as usize] {
            self.ext[v as usize] = true;
            self.changed = true;
        }
    }

    fn add_e(&mut self, x: u32) {
        if self.e.insert(x) {
            self.changed = true;
        }
    }

    /// Everything v may point to becomes externally accessible.
    fn escape(&mut self, v: u32) {
        if !self.compat(v) {
            return;
        }
        for x in self.full(v) {
            self.add_e(x);
        }
    }

    /// `dst ⊇ src`, where an incompatible end acts as a cast.
    fn flow(&mut self, src: u32, dst: u32) {
        match (self.compat(src), self.compat(dst)) {
            (true, true) => {
                for x in self.full(src) {
                    self.add_pts(dst, x);
                }
                if self.ext[src as usize] {
                    self.set_ext(dst);
                }
            }
            (false, true) => self.set_ext(dst),
            (true, false) => self.escape(src),
            (false, false) => {}
        }
    }

    fn unknown_callee(&mut self, ret: Option<u32>, args: &[Option<u32>]) {
        if let Some(r) = ret {
            self.set_ext(r);
        }
        for a in args.iter().flatten() {
            self.escape(*a);
        }
    }
}

fn slot(v: &Option<VarId>) -> Option<u32> {
    v.map(|v| v.0)
}

pub fn oracle_solve(m: &ConstraintModule) -> Solution {
    let n = m.num_vars();
    let mut s = State {
        m,
        pts: vec![BTreeSet::new(); n],
        ext: vec![false; n],
        e: BTreeSet::new(),
        changed: true,
    };
    let funcs: Vec<(u32, Option<u32>, Vec<Option<u32>>)> = m
        .constraints()
        .filter_map(|c| match c {
            Constraint::Function { func, ret, args } => {
                Some((func.0, slot(ret), args.iter().map(slot).collect()))
            }
            _ => None,
        })
        .collect();

    while s.changed {
        s.changed = false;
        for v in 0..n as u32 {
            let f = m.flags(VarId(v));
            if f.contains(Flags::EXT_TARGET) {
                s.add_e(v);
            }
            if f.contains(Flags::POINTS_EXTERNAL) {
                s.set_ext(v);
            }
            if f.contains(Flags::POINTEES_ESCAPE) {
                s.escape(v);
            }
            if f.contains(Flags::STORE_SCALAR) {
                for x in s.full(v) {
                    s.set_ext(x);
                }
            }
            if f.contains(Flags::LOAD_SCALAR) {
                for x in s.full(v) {
                    s.escape(x);
                }
            }
        }
        for x in s.e.clone() {
            s.set_ext(x);
            s.escape(x);
            for (_, ret, args) in funcs.iter().filter(|f| f.0 == x) {
                if let Some(r) = ret {
                    s.escape(*r);
                }
                for a in args.iter().flatten() {
                    s.set_ext(*a);
                }
            }
        }
        for c in m.constraints() {
            match c {
                Constraint::Base { ptr, target } => s.add_pts(ptr.0, target.0),
                Constraint::Simple { dst, src } => s.flow(src.0, dst.0),
                Constraint::Load { dst, addr } => {
                    for x in s.full(addr.0) {
                        s.flow(x, dst.0);
                    }
                    if s.ext[addr.index()] {
                        s.set_ext(dst.0);
                    }
                }
                Constraint::Store { addr, src } => {
                    for x in s.full(addr.0) {
                        s.flow(src.0, x);
                    }
                    if s.ext[addr.index()] {
                        s.escape(src.0);
                    }
                }
                Constraint::Function { .. } => {}
                Constraint::Call { callee, ret, args } => {
                    let ret = slot(ret);
                    let args: Vec<Option<u32>> = args.iter().map(slot).collect();
                    for x in s.full(callee.0) {
                        for (_, fret, fargs) in funcs.iter().filter(|f| f.0 == x) {
                            match (ret, *fret) {
                                (Some(r), Some(fr)) => s.flow(fr, r),
                                (Some(r), None) => s.set_ext(r),
                                (None, Some(fr)) => s.escape(fr),
                                (None, None) => {}
                            }
                            // A formal with no actual at all reads an undefined value.
                            for (i, &a) in args.iter().enumerate() {
                                let fa = fargs.get(i).copied().flatten();
                                match (a, fa) {
                                    (Some(a), Some(fa)) => s.flow(a, fa),
                                    (Some(a), None) => s.escape(a),
                                    (None, Some(fa)) => s.set_ext(fa),
                                    (None, None) => {}
                                }
                            }
                        }
                        if m.flags(VarId(x)).contains(Flags::IMPORTED_FUNC) {
                            s.unknown_callee(ret, &args);
                        }
                    }
                    if s.ext[callee.index()] {
                        s.unknown_callee(ret, &args);
                    }
                }
            }
        }
    }

    let sets: BTreeMap<VarId, PointsTo> = (0..n as u32)
        .filter(|&v| s.compat(v))
        .map(|v| {
            let members = s.full(v).into_iter().map(VarId);
            (VarId(v), PointsTo::new(members, s.ext[v as usize]))
        })
        .collect();
    let e = s.e.iter().copied().map(VarId).collect();
    Solution::from_parts(m, sets, e)
}
