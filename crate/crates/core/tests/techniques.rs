// SPDX-License-Identifier: Apache-2.0

use andersen_core::model::parse_constraint_module;
use andersen_core::solver::{hcd_offline, ovs_preprocess, CycleDetection, Order, Solver};
use andersen_core::{build_graph, ConstraintGraph, ConstraintModule, Representation, SolverConfig};

fn module(body: &str) -> ConstraintModule {
    parse_constraint_module(body).expect("test module parses")
}

fn wl(cycle: CycleDetection) -> SolverConfig {
    SolverConfig {
        cycle,
        ..SolverConfig::worklist(Representation::Ip, Order::Fifo)
    }
}

fn solved(m: &ConstraintModule, cfg: SolverConfig) -> ConstraintGraph {
    let mut g = build_graph(m, cfg.representation);
    Solver::new(&mut g, cfg).unwrap().run();
    g
}

#[test]
fn hcd_table_for_store_load_cycle() {
    let m = module(
        "module t
var p reg ptr
var q reg ptr
var x mem ptr
p <- &x
*p <- q
q <- *p
",
    );
    let g = build_graph(&m, Representation::Ip);
    let (p, q) = (m.lookup("p").unwrap(), m.lookup("q").unwrap());
    assert_eq!(hcd_offline(&g), vec![(p, q)]);

    let g = solved(&m, wl(CycleDetection::Hcd));
    let x = m.lookup("x").unwrap();
    let mut g = g;
    assert_eq!(g.find(x), g.find(q));
}

#[test]
fn hcd_ignores_acyclic_dereference() {
    let m = module(
        "module t
var p reg ptr
var q reg ptr
var r reg ptr
*p <- q
r <- *p
",
    );
    assert!(hcd_offline(&build_graph(&m, Representation::Ip)).is_empty());
}

#[test]
fn ovs_merges_single_source_register() {
    let m = module(
        "module t
var p reg ptr
var q reg ptr
var r reg ptr
var x mem ptr
var y mem ptr
p <- &x
q <- p
r <- q
r <- &y
",
    );
    let mut g = build_graph(&m, Representation::Ip);
    let merged = ovs_preprocess(&mut g);
    let [p, q, r] = ["p", "q", "r"].map(|n| m.lookup(n).unwrap());
    assert_eq!(merged, vec![(p, q)]);
    assert_eq!(g.find(q), g.find(p));
    assert_ne!(g.find(r), g.find(p));
}

#[test]
fn ovs_collapses_simple_cycles() {
    let m = module(
        "module t
var a reg ptr
var b reg ptr
var c reg ptr
a <- b
b <- c
c <- a
",
    );
    let mut g = build_graph(&m, Representation::Ip);
    assert_eq!(ovs_preprocess(&mut g).len(), 2);
    let [a, b, c] = ["a", "b", "c"].map(|n| m.lookup(n).unwrap());
    assert!(g.find(a) == g.find(b) && g.find(b) == g.find(c));
}

/// The store adds `x ⊇ a`, closing the cycle `a -> x -> b -> a`.
const LATE_CYCLE: &str = "module t
var p reg ptr
var a reg ptr
var b reg ptr
var x mem ptr
var y mem ptr
p <- &x
a <- &y
*p <- a
b <- x
a <- b
";

#[test]
fn online_detection_unifies_late_cycle() {
    let m = module(LATE_CYCLE);
    let [a, b, x] = ["a", "b", "x"].map(|n| m.lookup(n).unwrap());
    for cycle in [CycleDetection::Ocd, CycleDetection::Lcd] {
        let mut g = solved(&m, wl(cycle));
        assert_eq!(g.find(a), g.find(x), "{cycle:?}");
        assert_eq!(g.find(b), g.find(x), "{cycle:?}");
    }
    let mut g = solved(&m, wl(CycleDetection::None));
    assert_ne!(g.find(a), g.find(x));
}

#[test]
fn cycle_detection_preserves_solution() {
    let m = module(LATE_CYCLE);
    let base = solved(&m, wl(CycleDetection::None))
        .canonical_solution()
        .unwrap();
    for cycle in CycleDetection::ALL {
        let s = solved(&m, wl(cycle)).canonical_solution().unwrap();
        assert_eq!(s, base, "{cycle:?}");
    }
}

#[test]
fn pip_clears_doubly_flagged_node() {
    let m = module(
        "module t
var p reg ptr
var x mem ptr
var y mem ptr
p <- &x
p <- &y
flag p points_ext
flag p pointees_escape
",
    );
    let p = m.lookup("p").unwrap();
    let pip = SolverConfig {
        pip: true,
        ..wl(CycleDetection::None)
    };
    let mut g = solved(&m, pip);
    let rp = g.find(p);
    assert!(g.doubly_flagged().contains(&rp));
    assert_eq!(g.explicit_pointees(rp).count(), 0);

    let mut plain = solved(&m, wl(CycleDetection::None));
    let rp = plain.find(p);
    assert_eq!(plain.explicit_pointees(rp).count(), 2);

    let a = g.canonical_solution().unwrap();
    assert_eq!(a, plain.canonical_solution().unwrap());
    let names = a.member_names(a.get(p).unwrap());
    assert_eq!(names, ["x", "y", "EXTERNAL"]);
}
