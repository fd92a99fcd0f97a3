// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use rustc_hash::FxHashSet;

use super::config::{Engine, SolverConfig};
use super::order::{self, Worklist};
use super::{cycles, hcd_offline, ovs_preprocess, SolveStats};
use crate::error::ConfigError;
use crate::graph::{ConstraintGraph, Representation, SlotRec};
use crate::model::Flags;

const PX: Flags = Flags::POINTS_EXTERNAL;
const PE: Flags = Flags::POINTEES_ESCAPE;

/// What resolving one call against one function requires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CallEffect {
    /// `dst ⊇ src`
    Edge {
        src: u32,
        dst: u32,
    },
    PointsExternal(u32),
    PointeesEscape(u32),
}

/// Matches the slots of a call site against a callee's definition.
///
/// A slot present on one side only is treated as a cast: a pointer
/// flowing into a non-pointer slot escapes, a non-pointer flowing into a
/// pointer slot yields an unknown-origin pointer. Actuals beyond the
/// callee's formals escape; formals without an actual get nothing from
/// this call.
pub(crate) fn call_effects(call: &SlotRec, func: &SlotRec, out: &mut Vec<CallEffect>) {
    match (call.ret, func.ret) {
        (Some(r), Some(rf)) => out.push(CallEffect::Edge { src: rf, dst: r }),
        (Some(r), None) => out.push(CallEffect::PointsExternal(r)),
        (None, Some(rf)) => out.push(CallEffect::PointeesEscape(rf)),
        (None, None) => {}
    }
    for (i, a) in call.args.iter().enumerate() {
        match (a, func.args.get(i)) {
            (Some(a), Some(Some(f))) => out.push(CallEffect::Edge { src: *a, dst: *f }),
            (Some(a), Some(None) | None) => out.push(CallEffect::PointeesEscape(*a)),
            (None, Some(Some(f))) => out.push(CallEffect::PointsExternal(*f)),
            (None, _) => {}
        }
    }
}

/// A solver run over one graph. [`Solver::step`] visits a single node so
/// callers can observe intermediate states; [`Solver::run`] goes to the
/// fixpoint.
pub struct Solver<'g> {
    g: &'g mut ConstraintGraph,
    cfg: SolverConfig,
    worklist: Option<Box<dyn Worklist>>,
    sweep_pos: usize,
    sweep_changed: bool,
    delta: Vec<FxHashSet<u32>>,
    pe_seen: Vec<bool>,
    sampled: FxHashSet<(u32, u32)>,
    hcd: Vec<Vec<u32>>,
    double_visits: Vec<u32>,
    stats: SolveStats,
    started: Instant,
    done: bool,
}

impl<'g> Solver<'g> {
    pub fn new(g: &'g mut ConstraintGraph, cfg: SolverConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        if cfg.representation != g.representation() {
            return Err(ConfigError::RepresentationMismatch {
                config: cfg.representation.keyword(),
                graph: g.representation().keyword(),
            });
        }
        let started = Instant::now();
        let n = g.num_nodes();
        let mut stats = SolveStats::default();
        if cfg.ovs {
            stats.unifications += ovs_preprocess(g).len() as u64;
        }
        let mut hcd = Vec::new();
        if cfg.cycle.hcd() {
            hcd = vec![Vec::new(); n];
            for (v, w) in hcd_offline(g) {
                let r = g.uf.find(v.0);
                hcd[r as usize].push(w.0);
            }
        }
        let delta = if cfg.dp { g.sol.to_vec() } else { Vec::new() };
        let worklist = match cfg.engine {
            Engine::Naive => None,
            Engine::Worklist(o) => Some(order::make(o, n)),
        };
        let mut s = Solver {
            g,
            cfg,
            worklist,
            sweep_pos: 0,
            sweep_changed: false,
            delta,
            pe_seen: vec![false; n],
            sampled: FxHashSet::default(),
            hcd,
            double_visits: vec![0; n],
            stats,
            started,
            done: false,
        };

        if cfg.cycle.ocd() {
            for comp in cycles::simple_edge_sccs(s.g) {
                s.unify_all(&comp);
            }
        }
        if cfg.representation == Representation::Ip {
            for x in 0..n as u32 {
                if s.g.lflags[x as usize].contains(Flags::EXT_TARGET) {
                    s.mark_ext_acc(x);
                }
            }
        }
        if let Some(wl) = s.worklist.as_mut() {
            for v in 0..n as u32 {
                if s.g.uf.is_root(v) {
                    wl.push(v);
                }
            }
        }
        Ok(s)
    }

    pub fn graph(&self) -> &ConstraintGraph {
        self.g
    }

    pub fn config(&self) -> SolverConfig {
        self.cfg
    }

    /// Processes one node. Returns false once the fixpoint is reached.
    pub fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        match self.worklist.as_mut() {
            Some(wl) => match wl.pop(self.g) {
                Some(x) => {
                    if self.g.uf.is_root(x) {
                        self.visit(x);
                    }
                    true
                }
                None => {
                    self.finish();
                    false
                }
            },
            None => {
                if self.sweep_pos >= self.g.num_nodes() {
                    if !self.sweep_changed {
                        self.finish();
                        return false;
                    }
                    self.sweep_changed = false;
                    self.sweep_pos = 0;
                }
                let x = self.sweep_pos as u32;
                self.sweep_pos += 1;
                if self.g.uf.is_root(x) {
                    self.visit(x);
                }
                true
            }
        }
    }

    /// Solves to the fixpoint and returns the statistics.
    pub fn run(mut self) -> SolveStats {
        while self.step() {}
        self.stats.clone()
    }

    fn finish(&mut self) {
        self.done = true;
        self.g.solved = true;
        self.stats.explicit_pointees = self.g.explicit_pointee_count() as u64;
        self.stats.max_double_flag_visits = self.double_visits.iter().copied().max().unwrap_or(0);
        self.stats.doubly_flagged_pointees = self
            .g
            .doubly_flagged()
            .iter()
            .map(|v| self.g.sol[v.index()].len() as u64)
            .sum();
        self.stats.solve_time = self.started.elapsed();
    }

    fn find(&mut self, v: u32) -> u32 {
        self.g.uf.find(v)
    }

    fn has(&self, rep: u32, f: Flags) -> bool {
        self.g.pflags[rep as usize].contains(f)
    }

    fn enqueue(&mut self, v: u32) {
        let r = self.g.uf.find(v);
        match self.worklist.as_mut() {
            Some(wl) => wl.push(r),
            None => self.sweep_changed = true,
        }
    }

    fn set_flag(&mut self, v: u32, f: Flags) {
        if !self.g.compatible(v) {
            return;
        }
        let r = self.find(v);
        if !self.has(r, f) {
            self.g.pflags[r as usize] |= f;
            self.enqueue(r);
        }
    }

    fn points_external(&mut self, v: u32) {
        match self.g.omega {
            None => self.set_flag(v, PX),
            Some(o) => self.add_edge(o, v),
        }
    }

    fn pointees_escape(&mut self, v: u32) {
        match self.g.omega {
            None => self.set_flag(v, PE),
            Some(o) => self.add_edge(v, o),
        }
    }

    fn mark_ext_acc(&mut self, x: u32) {
        if !self.g.lflags[x as usize].contains(Flags::EXT_TARGET) {
            self.g.lflags[x as usize] |= Flags::EXT_TARGET;
            if self.worklist.is_none() {
                self.sweep_changed = true;
            }
        }
        self.set_flag(x, PX);
        self.set_flag(x, PE);
        for fi in self.g.funcs[x as usize].clone() {
            let f = self.g.func_list[fi as usize].clone();
            if let Some(r) = f.ret {
                self.pointees_escape(r);
            }
            for a in f.args.iter().flatten() {
                self.points_external(*a);
            }
        }
    }

    fn call_to_imported(&mut self, ci: u32) {
        let c = self.g.call_list[ci as usize].clone();
        if let Some(r) = c.ret {
            self.points_external(r);
        }
        for a in c.args.iter().flatten() {
            self.pointees_escape(*a);
        }
    }

    /// Under PIP, classes marked both points-external and pointees-escape
    /// are never merged.
    fn frozen(&mut self, v: u32) -> bool {
        let r = self.find(v);
        self.cfg.pip && self.has(r, PX | PE)
    }

    fn unify(&mut self, a: u32, b: u32) -> u32 {
        if self.frozen(a) || self.frozen(b) {
            return self.find(a);
        }
        let Some((root, child)) = self.g.merge(a, b) else {
            return self.find(a);
        };
        self.stats.unifications += 1;
        if self.cfg.dp {
            self.delta[child as usize].clear();
            self.delta[root as usize] = self.g.sol[root as usize].clone();
        }
        if !self.hcd.is_empty() {
            let moved = std::mem::take(&mut self.hcd[child as usize]);
            self.hcd[root as usize].extend(moved);
        }
        self.pe_seen[root as usize] = false;
        self.enqueue(root);
        root
    }

    fn unify_all(&mut self, nodes: &[u32]) {
        let nodes: Vec<u32> = nodes.iter().copied().filter(|&v| !self.frozen(v)).collect();
        if let Some((&first, rest)) = nodes.split_first() {
            let mut r = first;
            for &v in rest {
                r = self.unify(r, v);
            }
        }
    }

    /// Adds `src` to `dst`'s explicit set and the points-external flag;
    /// enqueues `dst` on change.
    fn propagate(&mut self, src: u32, dst: u32, items: &[u32]) {
        let mut changed = false;
        let (s, d) = (src as usize, dst as usize);
        for &x in items {
            if self.g.sol[d].insert(x) {
                changed = true;
                if self.cfg.dp {
                    self.delta[d].insert(x);
                }
            }
        }
        if self.g.pflags[s].contains(PX) && !self.g.pflags[d].contains(PX) {
            self.g.pflags[d] |= PX;
            changed = true;
        }
        if changed {
            self.enqueue(dst);
        }
    }

    /// Solve-time insertion of the simple constraint `dst ⊇ src`.
    fn add_edge(&mut self, src: u32, dst: u32) {
        match (self.g.compatible(src), self.g.compatible(dst)) {
            (true, true) => {}
            (false, true) => return self.points_external(dst),
            (true, false) => return self.pointees_escape(src),
            (false, false) => return,
        }
        let s = self.find(src);
        let d = self.find(dst);
        if s == d {
            return;
        }
        if self.cfg.pip {
            if self.has(d, PE) && !self.has(s, PE) {
                self.g.pflags[s as usize] |= PE;
                self.enqueue(s);
            }
            if self.has(s, PE) && self.has(d, PX) {
                return;
            }
        }
        if !self.g.succ[s as usize].insert(d) {
            return;
        }
        self.stats.edges_added += 1;
        self.g.inferred.push((src, dst));
        let items: Vec<u32> = self.g.sol[s as usize].iter().copied().collect();
        self.propagate(s, d, &items);
        if self.cfg.cycle.ocd() {
            let path = cycles::nodes_on_paths(self.g, d, s);
            if !path.is_empty() {
                self.unify_all(&path);
            }
        }
    }

    fn normalized_succ(&mut self, n: u32) -> Vec<u32> {
        let raw: Vec<u32> = self.g.succ[n as usize].iter().copied().collect();
        let mut out: Vec<u32> = raw
            .iter()
            .map(|&q| self.g.uf.find(q))
            .filter(|&q| q != n)
            .collect();
        out.sort_unstable();
        out.dedup();
        if out.len() != raw.len() || out.iter().any(|q| !self.g.succ[n as usize].contains(q)) {
            self.g.succ[n as usize] = out.iter().copied().collect();
        }
        out
    }

    fn visit(&mut self, n: u32) {
        let nu = n as usize;
        self.stats.node_visits += 1;
        if self.g.pflags[nu].contains(PX | PE) {
            self.double_visits[nu] += 1;
        }
        let mut items: Vec<u32> = if self.cfg.dp {
            std::mem::take(&mut self.delta[nu]).into_iter().collect()
        } else {
            self.g.sol[nu].iter().copied().collect()
        };
        items.sort_unstable();

        if !self.hcd.is_empty() && !self.hcd[nu].is_empty() {
            let targets = self.hcd[nu].clone();
            for w in targets {
                for &x in &items {
                    if self.g.compatible(x) && self.find(x) != self.find(w) {
                        self.unify(x, w);
                    }
                }
            }
            if self.find(n) != n {
                return;
            }
        }

        let succ = self.normalized_succ(n);

        if self.cfg.pip
            && !succ.is_empty()
            && !self.has(n, PE)
            && succ.iter().any(|&q| self.has(q, PE))
        {
            self.g.pflags[nu] |= PE;
        }

        if self.has(n, PE) {
            let all: Vec<u32> = if self.cfg.dp && self.pe_seen[nu] {
                items.clone()
            } else {
                self.g.sol[nu].iter().copied().collect()
            };
            self.pe_seen[nu] = true;
            for x in all {
                if !self.g.lflags[x as usize].contains(Flags::EXT_TARGET) {
                    self.mark_ext_acc(x);
                }
            }
        }

        if self.cfg.pip && self.has(n, PX | PE) {
            self.g.sol[nu].clear();
            if self.cfg.dp {
                self.delta[nu].clear();
            }
            items.clear();
        }

        for q in succ {
            if self.find(n) != n {
                return;
            }
            let q = self.find(q);
            if q == n {
                continue;
            }
            if self.cfg.pip && self.has(q, PX) && self.has(n, PE) {
                self.g.succ[nu].remove(&q);
                self.stats.edges_removed += 1;
                continue;
            }
            if self.cfg.cycle.lcd()
                && !self.g.sol[nu].is_empty()
                && self.g.sol[nu] == self.g.sol[q as usize]
                && self.sampled.insert((n, q))
            {
                let path = cycles::nodes_on_paths(self.g, q, n);
                let before = self.stats.unifications;
                if !path.is_empty() {
                    self.unify_all(&path);
                }
                if self.stats.unifications != before {
                    return;
                }
            }
            self.propagate(n, q, &items);
        }

        let mut new_edges: Vec<(u32, u32)> = Vec::new();
        let px = self.has(n, PX);

        for q in self.g.stores[nu].clone() {
            new_edges.extend(items.iter().map(|&x| (q, x)));
            if px {
                self.pointees_escape(q);
            }
        }
        if self.has(n, Flags::STORE_SCALAR) {
            for &x in &items {
                self.points_external(x);
            }
        }
        for p in self.g.loads[nu].clone() {
            new_edges.extend(items.iter().map(|&x| (x, p)));
            if px {
                self.points_external(p);
            }
        }
        if self.has(n, Flags::LOAD_SCALAR) {
            for &x in &items {
                self.pointees_escape(x);
            }
        }

        let mut effects = Vec::new();
        for ci in self.g.calls[nu].clone() {
            for &x in &items {
                for &fi in &self.g.funcs[x as usize] {
                    call_effects(
                        &self.g.call_list[ci as usize],
                        &self.g.func_list[fi as usize],
                        &mut effects,
                    );
                }
                if self.g.lflags[x as usize].contains(Flags::IMPORTED_FUNC) {
                    self.call_to_imported(ci);
                }
            }
            if px {
                self.call_to_imported(ci);
            }
        }
        for e in effects {
            match e {
                CallEffect::Edge { src, dst } => new_edges.push((src, dst)),
                CallEffect::PointsExternal(v) => self.points_external(v),
                CallEffect::PointeesEscape(v) => self.pointees_escape(v),
            }
        }

        for (src, dst) in new_edges {
            self.add_edge(src, dst);
        }
    }
}
