// SPDX-License-Identifier: Apache-2.0

//! Random programs, cross-configuration validation, the linking soundness
//! fuzzer, the stress instance and benchmarking.

mod bench;
mod fuzz;
mod generate;
mod stress;
mod validate;

pub use bench::{
    benchmark, median, percentiles, time_config, BenchReport, BenchRow, Percentiles, EP_ORACLE,
};
pub use fuzz::{
    check_program, fuzz_soundness, minimize, FuzzFailure, FuzzReport, SoundnessViolation,
};
pub use generate::{generate_program, generate_random_module, FuzzParams};
pub use stress::generate_stress_instance;
pub use validate::{
    run_config, validate_all_configs, validate_configs, ConfigMismatch, ConfigRun, ValidationReport,
};
