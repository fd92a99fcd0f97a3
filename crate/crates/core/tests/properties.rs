// SPDX-License-Identifier: Apache-2.0

use andersen_core::alias::{alias, AliasResult};
use andersen_core::frontend::{lower, parse_tiny_module};
use andersen_core::harness::{generate_program, generate_random_module, FuzzParams};
use andersen_core::model::{parse_constraint_module, print_constraint_module};
use andersen_core::solver::{CycleDetection, Order, Solver};
use andersen_core::{build_graph, solve_module, ConstraintModule, Representation, SolverConfig};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = FuzzParams> {
    (
        any::<u64>(),
        5usize..40,
        5usize..60,
        0.0..0.3f64,
        0.0..0.4f64,
    )
        .prop_map(
            |(seed, vars, statements, cast_fraction, indirect_call_fraction)| FuzzParams {
                seed,
                vars,
                statements,
                cast_fraction,
                indirect_call_fraction,
                ..FuzzParams::default()
            },
        )
}

fn module(p: &FuzzParams) -> ConstraintModule {
    lower(&generate_random_module(p)).expect("generated modules lower")
}

fn ip(order: Order) -> SolverConfig {
    SolverConfig::worklist(Representation::Ip, order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_deterministic(p in params()) {
        prop_assert_eq!(generate_program(&p), generate_program(&p));
    }

    #[test]
    fn tinyir_print_parse_round_trip(p in params()) {
        let t = generate_random_module(&p);
        let back = parse_tiny_module(&t.to_string()).expect("printed module parses");
        prop_assert_eq!(back, t);
    }

    #[test]
    fn constraint_text_round_trip(p in params()) {
        let m = module(&p);
        let text = print_constraint_module(&m);
        let back = parse_constraint_module(&text).expect("printed module parses");
        prop_assert_eq!(print_constraint_module(&back), text);
    }

    #[test]
    fn config_display_parse_round_trip(i in 0usize..304) {
        let c = SolverConfig::enumerate()[i];
        prop_assert_eq!(c.to_string().parse::<SolverConfig>().unwrap(), c);
    }

    #[test]
    fn techniques_do_not_change_the_solution(p in params(), order in 0usize..5) {
        let m = module(&p);
        let base = ip(Order::ALL[order]);
        let (want, _) = solve_module(&m, base).unwrap();
        let variants = [
            SolverConfig { dp: true, ..base },
            SolverConfig { pip: true, ..base },
            SolverConfig { ovs: true, ..base },
            SolverConfig { cycle: CycleDetection::Hcd, ..base },
            SolverConfig { cycle: CycleDetection::Lcd, dp: true, ..base },
            SolverConfig { cycle: CycleDetection::Ocd, pip: true, ovs: true, ..base },
            SolverConfig { representation: Representation::Ep, ..base },
        ];
        for cfg in variants {
            let (got, _) = solve_module(&m, cfg).unwrap();
            prop_assert_eq!(got.first_difference(&want), None, "{}", cfg);
        }
    }

    #[test]
    fn pip_visits_doubly_flagged_nodes_once(p in params(), i in any::<prop::sample::Index>()) {
        let m = module(&p);
        let pips: Vec<SolverConfig> = SolverConfig::enumerate().into_iter().filter(|c| c.pip).collect();
        let c = *i.get(&pips);
        let (_, st) = solve_module(&m, c).unwrap();
        prop_assert!(st.max_double_flag_visits <= 1, "{}: {}", c, st.max_double_flag_visits);
        prop_assert_eq!(st.doubly_flagged_pointees, 0);
    }

    #[test]
    fn explicit_pointees_ordered_by_representation(p in params()) {
        let m = module(&p);
        let count = |cfg: SolverConfig| solve_module(&m, cfg).unwrap().1.explicit_pointees;
        let ep = count(SolverConfig::worklist(Representation::Ep, Order::Fifo));
        let ip_plain = count(ip(Order::Fifo));
        let ip_pip = count(SolverConfig { pip: true, ..ip(Order::Fifo) });
        prop_assert!(ip_pip <= ip_plain, "{} > {}", ip_pip, ip_plain);
        prop_assert!(ip_plain <= ep, "{} > {}", ip_plain, ep);
    }

    #[test]
    fn intermediate_states_grow_monotonically(p in params(), pip in any::<bool>()) {
        let m = module(&p);
        let cfg = SolverConfig { pip, ..ip(Order::Lifo) };
        let mut g = build_graph(&m, Representation::Ip);
        let mut s = Solver::new(&mut g, cfg).unwrap();
        let mut prev = s.graph().snapshot_solution();
        while s.step() {
            let next = s.graph().snapshot_solution();
            for (v, pt) in prev.iter() {
                let now = next.get(v).unwrap();
                prop_assert!(pt.is_subset(now), "{} shrank", prev.name(v));
            }
            prev = next;
        }
    }

    #[test]
    fn alias_is_symmetric(p in params(), pairs in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..50)) {
        let m = module(&p);
        let (sol, _) = solve_module(&m, ip(Order::Fifo)).unwrap();
        let vars: Vec<_> = sol.iter().map(|(v, _)| v).collect();
        prop_assume!(!vars.is_empty());
        for (i, j) in pairs {
            let (a, b) = (*i.get(&vars), *j.get(&vars));
            let ab = alias(&sol, a, b).unwrap();
            prop_assert_eq!(ab, alias(&sol, b, a).unwrap());
            if a == b {
                prop_assert_eq!(ab, AliasResult::MustAlias);
            }
        }
    }
}
