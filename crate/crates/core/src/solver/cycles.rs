// SPDX-License-Identifier: Apache-2.0

//! Graph searches shared by the cycle detectors, OVS and the TOPO order.

use crate::graph::ConstraintGraph;

/// Strongly connected components with more than one node (Tarjan,
/// iterative). `adj(v)` lists the successors of `v`.
pub(crate) fn nontrivial_sccs<A: AsRef<[u32]>>(n: usize, adj: impl Fn(u32) -> A) -> Vec<Vec<u32>> {
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0u32;
    let mut out = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        let mut call: Vec<(u32, A, usize)> = vec![(root, adj(root), 0)];
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some((v, succ, i)) = call.last_mut() {
            let v = *v;
            if let Some(&w) = succ.as_ref().get(*i) {
                *i += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, adj(w), 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some((parent, _, _)) = call.last() {
                let p = *parent as usize;
                low[p] = low[p].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                if comp.len() > 1 {
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Simple-edge SCCs among representatives.
pub(crate) fn simple_edge_sccs(g: &ConstraintGraph) -> Vec<Vec<u32>> {
    nontrivial_sccs(g.num_nodes(), |v| {
        if g.uf.is_root(v) {
            g.successors(crate::model::VarId(v))
                .into_iter()
                .map(|x| x.0)
                .collect()
        } else {
            Vec::new()
        }
    })
}

/// Every node, representatives in reverse postorder of a depth-first
/// search over simple edges (a topological order when acyclic), followed
/// by the non-representatives.
pub(crate) fn topological_order(g: &ConstraintGraph) -> Vec<u32> {
    let n = g.num_nodes();
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    for root in 0..n as u32 {
        if seen[root as usize] || !g.uf.is_root(root) {
            continue;
        }
        seen[root as usize] = true;
        let mut stack = vec![(root, g.successors(crate::model::VarId(root)), 0usize)];
        while let Some((v, succ, i)) = stack.last_mut() {
            if *i < succ.len() {
                let w = succ[*i].0;
                *i += 1;
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    let s = g.successors(crate::model::VarId(w));
                    stack.push((w, s, 0));
                }
            } else {
                post.push(*v);
                stack.pop();
            }
        }
    }
    post.reverse();
    post.extend((0..n as u32).filter(|&v| !g.uf.is_root(v)));
    post
}

/// Representatives lying on some simple-edge path from `from` to `to`
/// (both included when such a path exists; empty otherwise).
pub(crate) fn nodes_on_paths(g: &mut ConstraintGraph, from: u32, to: u32) -> Vec<u32> {
    let from = g.uf.find(from);
    let to = g.uf.find(to);
    if from == to {
        return Vec::new();
    }
    // 0 = unvisited, 1 = in progress / does not reach, 2 = reaches `to`
    let n = g.num_nodes();
    let mut state = vec![0u8; n];
    let mut visited = Vec::new();
    state[to as usize] = 2;
    let succ_of = |g: &mut ConstraintGraph, v: u32| -> Vec<u32> {
        let s: Vec<u32> = g.succ[v as usize].iter().copied().collect();
        s.into_iter()
            .map(|q| g.uf.find(q))
            .filter(|&q| q != v)
            .collect()
    };
    state[from as usize] = 1;
    visited.push(from);
    let first = succ_of(g, from);
    let mut stack = vec![(from, first, 0usize, false)];
    while let Some((v, succ, i, reaches)) = stack.last_mut() {
        if *i < succ.len() {
            let w = succ[*i];
            *i += 1;
            match state[w as usize] {
                2 => *reaches = true,
                0 => {
                    state[w as usize] = 1;
                    visited.push(w);
                    let s = succ_of(g, w);
                    stack.push((w, s, 0, false));
                }
                _ => {}
            }
        } else {
            let (v, r) = (*v, *reaches);
            stack.pop();
            if r {
                state[v as usize] = 2;
                if let Some(parent) = stack.last_mut() {
                    parent.3 = true;
                }
            }
        }
    }
    if state[from as usize] != 2 {
        return Vec::new();
    }
    let mut out: Vec<u32> = visited
        .into_iter()
        .filter(|&v| state[v as usize] == 2)
        .collect();
    out.push(to);
    out
}
