// SPDX-License-Identifier: Apache-2.0

//! Solver state: indexed constraint edges over union-find representatives,
//! explicit solution sets, and the external-region flags.

mod solution;
mod union_find;

use std::fmt;
use std::sync::{Arc, LazyLock};

use rustc_hash::FxHashSet;

pub use solution::{PointsTo, Solution, SolutionDiff, EXTERNAL};
pub use union_find::UnionFind;

use crate::model::{Constraint, ConstraintModule, Flags, Linkage, VarId, VarInfo};

/// How the external region is represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    /// An explicit Ω variable with ordinary constraints.
    Ep,
    /// Per-variable flags; Ω is not a variable.
    Ip,
}

impl Representation {
    pub fn keyword(self) -> &'static str {
        match self {
            Representation::Ep => "EP",
            Representation::Ip => "IP",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Name of the explicit external variable in EP graphs.
pub const OMEGA_NAME: &str = "$omega";

static OMEGA_INFO: LazyLock<VarInfo> = LazyLock::new(|| VarInfo {
    name: OMEGA_NAME.to_string(),
    kind: crate::model::VarKind::Memory,
    pointer_compatible: true,
    linkage: Linkage::Internal,
    is_function: true,
});

/// A Function or Call constraint with its slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SlotRec {
    pub head: u32,
    pub ret: Option<u32>,
    pub args: Vec<Option<u32>>,
}

#[derive(Clone, Debug)]
pub struct ConstraintGraph {
    pub(crate) repr: Representation,
    /// Original variables; Ω, when present, is the node just past them.
    pub(crate) vars: Arc<Vec<VarInfo>>,
    pub(crate) num_original: usize,
    pub(crate) omega: Option<u32>,
    pub(crate) uf: UnionFind,
    /// Explicit pointees per representative. Members are original ids.
    pub(crate) sol: Vec<FxHashSet<u32>>,
    /// Pointer-role flags per representative.
    pub(crate) pflags: Vec<Flags>,
    /// Location-role flags per variable.
    pub(crate) lflags: Vec<Flags>,
    /// Simple edges `n -> q` (q ⊇ n); endpoints may be stale.
    pub(crate) succ: Vec<FxHashSet<u32>>,
    /// `p ⊇ *n`, indexed by n.
    pub(crate) loads: Vec<Vec<u32>>,
    /// `*n ⊇ q`, indexed by n.
    pub(crate) stores: Vec<Vec<u32>>,
    /// Call constraints by callee.
    pub(crate) calls: Vec<Vec<u32>>,
    /// Function constraints by function variable (never unified away).
    pub(crate) funcs: Vec<Vec<u32>>,
    pub(crate) call_list: Vec<SlotRec>,
    pub(crate) func_list: Vec<SlotRec>,
    /// Simple edges inserted while solving, as `(src, dst)` original ids.
    pub(crate) inferred: Vec<(u32, u32)>,
    pub(crate) solved: bool,
}

impl ConstraintGraph {
    fn empty(m: &ConstraintModule, repr: Representation) -> Self {
        let vars = m.shared_vars();
        let omega = (repr == Representation::Ep).then_some(vars.len() as u32);
        let n = vars.len() + usize::from(omega.is_some());
        ConstraintGraph {
            repr,
            vars,
            num_original: m.num_vars(),
            omega,
            uf: UnionFind::new(n),
            sol: vec![FxHashSet::default(); n],
            pflags: vec![Flags::empty(); n],
            lflags: vec![Flags::empty(); n],
            succ: vec![FxHashSet::default(); n],
            loads: vec![Vec::new(); n],
            stores: vec![Vec::new(); n],
            calls: vec![Vec::new(); n],
            funcs: vec![Vec::new(); n],
            call_list: Vec::new(),
            func_list: Vec::new(),
            inferred: Vec::new(),
            solved: false,
        }
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Number of graph nodes, including Ω in EP graphs.
    pub fn num_nodes(&self) -> usize {
        self.vars.len() + usize::from(self.omega.is_some())
    }

    pub fn num_original(&self) -> usize {
        self.num_original
    }

    pub fn omega(&self) -> Option<VarId> {
        self.omega.map(VarId)
    }

    pub fn var(&self, v: VarId) -> &VarInfo {
        self.vars.get(v.index()).unwrap_or(&OMEGA_INFO)
    }

    pub fn is_solved(&self) -> bool {
        self.solved
    }

    pub fn find(&mut self, v: VarId) -> VarId {
        VarId(self.uf.find(v.0))
    }

    pub fn is_rep(&self, v: VarId) -> bool {
        self.uf.is_root(v.0)
    }

    /// Explicit pointees of `v`'s representative.
    pub fn explicit_pointees(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.sol[self.uf.find_const(v.0) as usize]
            .iter()
            .map(|&x| VarId(x))
    }

    /// Pointer flags of `v`'s representative together with `v`'s own
    /// location flags.
    pub fn flags(&self, v: VarId) -> Flags {
        self.pflags[self.uf.find_const(v.0) as usize] | self.lflags[v.index()]
    }

    /// Sum of `|Sol_e|` over representatives.
    pub fn explicit_pointee_count(&self) -> usize {
        (0..self.num_nodes() as u32)
            .filter(|&v| self.uf.is_root(v))
            .map(|v| self.sol[v as usize].len())
            .sum()
    }

    /// Number of distinct simple edges between distinct representatives.
    pub fn edge_count(&self) -> usize {
        let mut seen = FxHashSet::default();
        for v in 0..self.num_nodes() as u32 {
            if !self.uf.is_root(v) {
                continue;
            }
            for &q in &self.succ[v as usize] {
                let q = self.uf.find_const(q);
                if q != v {
                    seen.insert((v, q));
                }
            }
        }
        seen.len()
    }

    /// Simple-edge successors of a representative, normalized.
    pub fn successors(&self, v: VarId) -> Vec<VarId> {
        let r = self.uf.find_const(v.0);
        let mut out: Vec<u32> = self.succ[r as usize]
            .iter()
            .map(|&q| self.uf.find_const(q))
            .filter(|&q| q != r)
            .collect();
        out.sort_unstable();
        out.dedup();
        out.into_iter().map(VarId).collect()
    }

    /// Inferred simple constraints `dst ⊇ src` over original ids.
    pub fn inferred_edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.inferred.iter().map(|&(s, d)| (VarId(d), VarId(s)))
    }

    /// Representatives marked both points-external and pointees-escape.
    pub fn doubly_flagged(&self) -> Vec<VarId> {
        let both = Flags::POINTS_EXTERNAL | Flags::POINTEES_ESCAPE;
        (0..self.num_nodes() as u32)
            .filter(|&v| self.uf.is_root(v) && self.pflags[v as usize].contains(both))
            .map(VarId)
            .collect()
    }

    pub(crate) fn compatible(&self, v: u32) -> bool {
        self.var(VarId(v)).pointer_compatible
    }

    /// Inserts `n -> q` between representatives. Returns true if new.
    pub(crate) fn insert_edge(&mut self, src: u32, dst: u32) -> bool {
        let s = self.uf.find(src);
        let d = self.uf.find(dst);
        s != d && self.succ[s as usize].insert(d)
    }

    /// Merges the classes of `a` and `b`. Returns `(root, absorbed)` or
    /// `None` if they already coincide.
    pub(crate) fn merge(&mut self, a: u32, b: u32) -> Option<(u32, u32)> {
        let (root, child) = self.uf.union(a, b)?;
        let (r, c) = (root as usize, child as usize);

        let mut child_sol = std::mem::take(&mut self.sol[c]);
        if child_sol.len() > self.sol[r].len() {
            std::mem::swap(&mut child_sol, &mut self.sol[r]);
        }
        self.sol[r].extend(child_sol);

        let pf = std::mem::take(&mut self.pflags[c]);
        self.pflags[r] |= pf;

        let child_succ = std::mem::take(&mut self.succ[c]);
        let mut merged = std::mem::take(&mut self.succ[r]);
        merged.extend(child_succ);
        self.succ[r] = merged
            .into_iter()
            .map(|q| self.uf.find(q))
            .filter(|&q| q != root)
            .collect();

        for list in [&mut self.loads, &mut self.stores, &mut self.calls] {
            let moved = std::mem::take(&mut list[c]);
            list[r].extend(moved);
        }
        for list in [&mut self.loads, &mut self.stores] {
            let mut items: Vec<u32> = list[r].iter().map(|&x| self.uf.find(x)).collect();
            items.sort_unstable();
            items.dedup();
            list[r] = items;
        }
        Some((root, child))
    }

    /// A canonical view of the current state. Only meaningful as the
    /// final answer once solving has finished; see [`Self::canonical_solution`].
    pub fn snapshot_solution(&self) -> Solution {
        Solution::from_graph(self)
    }

    /// The representation-independent solution of a solved graph.
    pub fn canonical_solution(&self) -> Result<Solution, NotSolved> {
        if self.solved {
            Ok(self.snapshot_solution())
        } else {
            Err(NotSolved)
        }
    }
}

/// Returned when a solution is requested before the fixpoint is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("graph has not been solved")]
pub struct NotSolved;

/// Builds the solver graph for `m` in the given representation.
pub fn build_graph(m: &ConstraintModule, repr: Representation) -> ConstraintGraph {
    let mut g = ConstraintGraph::empty(m, repr);
    let omega = g.omega;

    let add_edge = |g: &mut ConstraintGraph, src: u32, dst: u32| match (
        g.compatible(src),
        g.compatible(dst),
    ) {
        (true, true) => {
            g.insert_edge(src, dst);
        }
        (false, true) => mark_initial(g, dst, Flags::POINTS_EXTERNAL),
        (true, false) => mark_initial(g, src, Flags::POINTEES_ESCAPE),
        (false, false) => {}
    };

    for c in m.constraints() {
        match c {
            Constraint::Base { ptr, target } => {
                g.sol[ptr.index()].insert(target.0);
            }
            Constraint::Simple { dst, src } => add_edge(&mut g, src.0, dst.0),
            Constraint::Load { dst, addr } => g.loads[addr.index()].push(dst.0),
            Constraint::Store { addr, src } => g.stores[addr.index()].push(src.0),
            Constraint::Function { func, ret, args } => {
                push_slots(&mut g, true, func.0, *ret, args);
            }
            Constraint::Call { callee, ret, args } => {
                push_slots(&mut g, false, callee.0, *ret, args);
            }
        }
    }

    let arity = m.max_arity();
    for v in m.var_ids() {
        let f = m.flags(v);
        match omega {
            None => {
                g.lflags[v.index()] = f & Flags::LOCATION;
                g.pflags[v.index()] = f & Flags::POINTER;
            }
            Some(o) => {
                let v = v.0;
                if f.contains(Flags::EXT_TARGET) {
                    g.sol[o as usize].insert(v);
                }
                if f.contains(Flags::POINTS_EXTERNAL) {
                    add_edge(&mut g, o, v);
                }
                if f.contains(Flags::POINTEES_ESCAPE) {
                    add_edge(&mut g, v, o);
                }
                if f.contains(Flags::STORE_SCALAR) {
                    g.stores[v as usize].push(o);
                }
                if f.contains(Flags::LOAD_SCALAR) {
                    g.loads[v as usize].push(o);
                }
                if f.contains(Flags::IMPORTED_FUNC) {
                    let args: Vec<_> = (0..arity).map(|_| Some(VarId(o))).collect();
                    push_slots(&mut g, true, v, Some(VarId(o)), &args);
                }
            }
        }
    }

    if let Some(o) = omega {
        let ov = Some(VarId(o));
        let args: Vec<_> = (0..arity).map(|_| ov).collect();
        g.sol[o as usize].insert(o);
        g.loads[o as usize].push(o);
        g.stores[o as usize].push(o);
        push_slots(&mut g, false, o, ov, &args);
        push_slots(&mut g, true, o, ov, &args);
    }

    for list in [&mut g.loads, &mut g.stores] {
        for l in list.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
    }
    g
}

fn push_slots(
    g: &mut ConstraintGraph,
    is_func: bool,
    head: u32,
    ret: Option<VarId>,
    args: &[Option<VarId>],
) {
    let rec = SlotRec {
        head,
        ret: ret.map(|v| v.0),
        args: args.iter().map(|a| a.map(|v| v.0)).collect(),
    };
    if is_func {
        g.funcs[head as usize].push(g.func_list.len() as u32);
        g.func_list.push(rec);
    } else {
        g.calls[head as usize].push(g.call_list.len() as u32);
        g.call_list.push(rec);
    }
}

/// Cast effect of a build-time edge with one pointer-incompatible end.
fn mark_initial(g: &mut ConstraintGraph, v: u32, flag: Flags) {
    match g.omega {
        None => g.pflags[v as usize] |= flag,
        Some(o) if flag == Flags::POINTS_EXTERNAL => {
            g.insert_edge(o, v);
        }
        Some(o) => {
            g.insert_edge(v, o);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_constraint_module;

    #[test]
    fn empty_module_ep_has_only_omega() {
        let m = ConstraintModule::new("e");
        let g = build_graph(&m, Representation::Ep);
        assert_eq!(g.num_nodes(), 1);
        let o = g.omega.unwrap() as usize;
        assert!(g.sol[o].contains(&(o as u32)));
        assert_eq!(g.loads[o], vec![o as u32]);
        assert_eq!(g.stores[o], vec![o as u32]);
        assert_eq!(g.call_list.len(), 1);
        assert_eq!(g.func_list.len(), 1);
    }

    #[test]
    fn unify_merges_sets_and_drops_self_edges() {
        let m = parse_constraint_module(
            "module u\nvar a reg ptr\nvar b reg ptr\nvar x mem scalar\nvar y mem scalar\n\
             a <- &x\nb <- &y\na <- b\nb <- a\nflag a points_ext\n",
        )
        .unwrap();
        let mut g = build_graph(&m, Representation::Ip);
        assert!(g.merge(0, 0).is_none());
        let (root, _) = g.merge(0, 1).unwrap();
        assert_eq!(g.sol[root as usize].len(), 2);
        assert!(g.succ[root as usize].is_empty());
        assert!(g.pflags[root as usize].contains(Flags::POINTS_EXTERNAL));
        assert_eq!(g.find(VarId(0)), g.find(VarId(1)));
    }
}
