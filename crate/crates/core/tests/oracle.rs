// SPDX-License-Identifier: Apache-2.0

mod common;

use andersen_core::frontend::{link, lower, parse_tiny_module};
use andersen_core::harness::{generate_program, FuzzParams};
use andersen_core::{solve_module, Representation, SolverConfig};

use common::exec::{execute, uncovered};
use common::oracle::oracle_solve;

fn fast_configs() -> Vec<SolverConfig> {
    [
        "EP+WL(FIFO)",
        "IP+WL(LRF)+PIP+LCD+DP",
        "IP+OVS+WL(TOPO)+HCD",
        "EP+Naive",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

#[test]
fn golden_corpus_matches_reference_solver() {
    for m in common::golden() {
        let want = oracle_solve(&m);
        for cfg in fast_configs() {
            let (got, _) = solve_module(&m, cfg).unwrap();
            assert_eq!(got.first_difference(&want), None, "{} {cfg}", m.name());
        }
    }
}

#[test]
fn fuzzed_modules_match_reference_solver() {
    for seed in 1..=40 {
        let prog = generate_program(&FuzzParams::with_seed(seed));
        for t in &prog {
            let m = lower(t).unwrap();
            let want = oracle_solve(&m);
            for cfg in fast_configs() {
                let (got, _) = solve_module(&m, cfg).unwrap();
                let diff = got.first_difference(&want);
                assert!(diff.is_none(), "seed {seed} {} {cfg}: {diff:?}", t.name);
            }
        }
    }
}

#[test]
fn executions_are_covered() {
    let mut observed = 0;
    for seed in 1..=150 {
        let prog = generate_program(&FuzzParams::with_seed(seed));
        let mut all = prog.clone();
        all.push(link(&prog).unwrap().module);
        for t in &all {
            let t = parse_tiny_module(&t.to_string()).unwrap();
            let m = lower(&t).unwrap();
            let (sol, _) = solve_module(&m, SolverConfig::naive(Representation::Ip)).unwrap();
            let trace = execute(&t);
            observed += trace.reg_values.len() + trace.cell_values.len();
            let missing = uncovered(&trace, &sol);
            assert!(
                missing.is_empty(),
                "seed {seed} {}: {missing:?}\n{t}",
                t.name
            );
        }
    }
    assert!(
        observed > 5_000,
        "executor saw only {observed} pointer facts"
    );
}
