// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use andersen_core::model::parse_constraint_module;
use andersen_core::solver::audit;
use andersen_core::{build_graph, solve, SolverConfig};

const EXAMPLE1: &str = include_str!("../../../corpus/example1.cons");

fn names(sol: &andersen_core::Solution, var: &str) -> Vec<String> {
    sol.member_names(sol.get_by_name(var).unwrap())
}

#[test]
fn example1_every_config() {
    let m = parse_constraint_module(EXAMPLE1).unwrap();
    let configs = SolverConfig::enumerate();
    assert_eq!(configs.len(), 304);
    for cfg in configs {
        let mut g = build_graph(&m, cfg.representation);
        solve(&mut g, cfg).unwrap();
        let sol = g.canonical_solution().unwrap();
        for (v, want) in [("p", "x"), ("q", "x"), ("r", "y"), ("x", "y"), ("s", "y")] {
            assert_eq!(names(&sol, v), vec![want.to_string()], "{cfg} {v}");
        }
        assert!(sol.external_set().is_empty());
        let inferred: BTreeSet<(String, String)> = g
            .inferred_edges()
            .map(|(d, s)| (g.var(d).name.clone(), g.var(s).name.clone()))
            .collect();
        let want: BTreeSet<(String, String)> = [("x", "r"), ("s", "x")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(inferred, want, "{cfg}");
        assert!(audit(&m, &sol).is_empty(), "{cfg}");
    }
}
