// SPDX-License-Identifier: Apache-2.0

use super::cycles;
use crate::graph::ConstraintGraph;
use crate::model::{Flags, VarId, VarKind};

/// Offline variable substitution. Collapses simple-edge cycles, then
/// merges every register whose only source of pointees is a single
/// incoming simple edge into that edge's source. Returns the pairs merged.
pub fn ovs_preprocess(g: &mut ConstraintGraph) -> Vec<(VarId, VarId)> {
    let mut out = Vec::new();
    for comp in cycles::simple_edge_sccs(g) {
        for &v in &comp[1..] {
            if g.merge(comp[0], v).is_some() {
                out.push((VarId(comp[0]), VarId(v)));
            }
        }
    }

    let n = g.num_nodes();
    let mut blocked = vec![false; n];
    let mut block = |g: &mut ConstraintGraph, v: u32| {
        let r = g.uf.find(v);
        blocked[r as usize] = true;
    };
    for v in 0..n as u32 {
        let info = g.var(VarId(v));
        if info.kind != VarKind::Register
            || !info.pointer_compatible
            || g.omega == Some(v)
            || !g.lflags[v as usize].is_empty()
        {
            block(g, v);
        }
        if g.uf.is_root(v) && g.pflags[v as usize].contains(Flags::POINTS_EXTERNAL) {
            block(g, v);
        }
        if g.uf.is_root(v) && !g.sol[v as usize].is_empty() {
            block(g, v);
        }
        for p in g.loads[v as usize].clone() {
            block(g, p);
        }
    }
    for c in g.call_list.clone() {
        if let Some(r) = c.ret {
            block(g, r);
        }
    }
    for f in g.func_list.clone() {
        for a in f.args.iter().flatten() {
            block(g, *a);
        }
    }

    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 0..n as u32 {
        if !g.uf.is_root(v) {
            continue;
        }
        for q in g.successors(VarId(v)) {
            preds[q.index()].push(v);
        }
    }
    for v in 0..n as u32 {
        if !g.uf.is_root(v) || blocked[v as usize] || preds[v as usize].len() != 1 {
            continue;
        }
        let u = preds[v as usize][0];
        if g.uf.find(u) != g.uf.find(v) && g.merge(u, v).is_some() {
            out.push((VarId(u), VarId(v)));
        }
    }
    out
}
