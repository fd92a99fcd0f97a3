// SPDX-License-Identifier: Apache-2.0

use rustc_hash::FxHashMap;

use super::cycles;
use crate::graph::ConstraintGraph;
use crate::model::VarId;

/// Offline part of hybrid cycle detection.
///
/// The offline graph has a node per variable and a dereference node `*v`
/// per variable; `q ⊇ p` gives `p -> q`, `q ⊇ *p` gives `*p -> q` and
/// `*p ⊇ q` gives `q -> *p`. For a dereference node `*v` and a variable
/// `w` that reach each other through variables only, every pointee of `v`
/// ends up in a cycle with `w`, so the pair `v ↦ w` is recorded.
pub fn hcd_offline(g: &ConstraintGraph) -> Vec<(VarId, VarId)> {
    let n = g.num_nodes();
    let rep = |v: u32| g.uf.find_const(v);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); 2 * n];
    for v in 0..n as u32 {
        if !g.uf.is_root(v) {
            continue;
        }
        for q in g.successors(VarId(v)) {
            adj[v as usize].push(q.0);
        }
        for &p in &g.loads[v as usize] {
            if g.compatible(p) {
                adj[n + v as usize].push(rep(p));
            }
        }
        for &q in &g.stores[v as usize] {
            if g.compatible(q) {
                adj[rep(q) as usize].push((n + v as usize) as u32);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }

    let mut table = Vec::new();
    for comp in cycles::nontrivial_sccs(2 * n, |v| adj[v as usize].as_slice()) {
        let local: FxHashMap<u32, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut fwd = vec![Vec::new(); comp.len()];
        let mut bwd = vec![Vec::new(); comp.len()];
        for (i, &v) in comp.iter().enumerate() {
            for w in &adj[v as usize] {
                if let Some(&j) = local.get(w) {
                    fwd[i].push(j);
                    bwd[j].push(i);
                }
            }
        }
        let concrete = |i: usize| (comp[i] as usize) < n;
        for (r, _) in comp.iter().enumerate().filter(|(i, _)| !concrete(*i)) {
            let forward = reach(r, &fwd, &concrete);
            let backward = reach(r, &bwd, &concrete);
            if let Some(w) = (0..comp.len())
                .filter(|&i| i != r && forward[i] && backward[i])
                .map(|i| comp[i])
                .min()
            {
                table.push((VarId(comp[r] - n as u32), VarId(w)));
            }
        }
    }
    table
}

/// Nodes reachable from `start` passing through concrete nodes only.
fn reach(start: usize, adj: &[Vec<usize>], concrete: &impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] && concrete(w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
