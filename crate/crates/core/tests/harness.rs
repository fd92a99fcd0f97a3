// SPDX-License-Identifier: Apache-2.0

mod common;

use andersen_core::frontend::lower;
use andersen_core::harness::{
    fuzz_soundness, generate_program, generate_stress_instance, validate_configs, FuzzParams,
};
use andersen_core::{solve_module, SolverConfig};

fn cfg(s: &str) -> SolverConfig {
    s.parse().unwrap()
}

#[test]
fn smallest_stress_instance() {
    let m = lower(&generate_stress_instance(1, 1)).unwrap();
    for c in ["EP+WL(FIFO)", "IP+WL(FIFO)", "IP+WL(FIFO)+PIP"] {
        let (sol, _) = solve_module(&m, cfg(c)).unwrap();
        let pt = sol.get_by_name("main::%r_0").unwrap();
        assert_eq!(sol.member_names(pt), ["g_0", "src_0", "EXTERNAL"], "{c}");
    }
}

#[test]
fn stress_explicit_counts_grow_with_product() {
    let count = |n, c: &str| {
        let m = lower(&generate_stress_instance(n, n)).unwrap();
        solve_module(&m, cfg(c)).unwrap().1.explicit_pointees
    };
    for n in [5, 10, 20] {
        assert!(count(n, "EP+WL(FIFO)") >= (n * n) as u64);
        assert!(count(n, "IP+WL(FIFO)+PIP") <= 4 * n as u64);
    }
}

#[test]
fn fuzz_params_are_checked() {
    let mut p = FuzzParams::default();
    assert!(p.validate().is_ok());
    p.export_fraction = 1.5;
    assert!(p.validate().is_err());
    p = FuzzParams {
        modules: 0,
        ..FuzzParams::default()
    };
    assert!(p.validate().is_err());
}

#[test]
fn programs_differ_across_seeds() {
    let a = generate_program(&FuzzParams::with_seed(1));
    let b = generate_program(&FuzzParams::with_seed(2));
    assert_eq!(a.len(), 3);
    assert_ne!(a, b);
}

#[test]
fn validation_reports_every_config() {
    for m in common::golden() {
        let configs = SolverConfig::enumerate();
        let r = validate_configs(&m, &configs);
        assert!(r.passed(), "{}: {:?} {:?}", m.name(), r.mismatch, r.audit);
        assert_eq!(r.stats.len(), configs.len());
    }
}

#[test]
fn small_fuzz_campaign_is_sound() {
    let r = fuzz_soundness(&FuzzParams::with_seed(900), 20, cfg("IP+WL(LIFO)+PIP+DP")).unwrap();
    assert!(
        r.passed(),
        "{:?}",
        r.failures.first().map(|f| &f.violations)
    );
    assert_eq!(r.programs, 20);
    assert!(r.checked_vars > 0);
}
