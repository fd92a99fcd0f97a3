// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{build_graph, Representation};
use crate::model::ConstraintModule;
use crate::solver::{solve, SolveStats, SolverConfig};

pub const EP_ORACLE: &str = "EP Oracle";

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub module: String,
    pub config: String,
    /// Median solve time over the repetitions.
    pub median_us: f64,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Percentiles {
    pub p10: f64,
    pub p25: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Per configuration, plus the per-module best EP configuration.
    pub summary: Vec<(String, Percentiles)>,
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Nearest-rank percentiles. Panics on an empty slice.
pub fn percentiles(values: &[f64]) -> Percentiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = |q: f64| {
        let k = ((q / 100.0) * v.len() as f64).ceil() as usize;
        v[k.clamp(1, v.len()) - 1]
    };
    Percentiles {
        p10: rank(10.0),
        p25: rank(25.0),
        p50: rank(50.0),
        p90: rank(90.0),
        p99: rank(99.0),
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
    }
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

/// Times one configuration on one module. The graph is rebuilt before every
/// repetition and only the solve is timed.
pub fn time_config(m: &ConstraintModule, cfg: SolverConfig, reps: usize) -> (f64, SolveStats) {
    assert!(reps >= 1);
    let mut times = Vec::with_capacity(reps);
    let mut last = SolveStats::default();
    for _ in 0..reps {
        let mut g = build_graph(m, cfg.representation);
        last = solve(&mut g, cfg).expect("valid configuration");
        times.push(micros(last.solve_time));
    }
    (median(&mut times), last)
}

/// Benchmarks every (module, config) pair. Pairs run in parallel when
/// `parallel` is set; timings are then noisier.
pub fn benchmark(
    modules: &[ConstraintModule],
    configs: &[SolverConfig],
    reps: usize,
    parallel: bool,
) -> BenchReport {
    let pairs: Vec<(usize, SolverConfig)> = (0..modules.len())
        .flat_map(|i| configs.iter().map(move |&c| (i, c)))
        .collect();
    let run = |&(i, c): &(usize, SolverConfig)| {
        let (median_us, stats) = time_config(&modules[i], c, reps);
        BenchRow {
            module: modules[i].name().to_string(),
            config: c.to_string(),
            median_us,
            stats,
        }
    };
    let rows: Vec<BenchRow> = if parallel {
        pairs.par_iter().map(run).collect()
    } else {
        pairs.iter().map(run).collect()
    };

    let mut summary = Vec::new();
    for c in configs {
        let name = c.to_string();
        let times: Vec<f64> = rows
            .iter()
            .filter(|r| r.config == name)
            .map(|r| r.median_us)
            .collect();
        summary.push((name, percentiles(&times)));
    }
    let ep: Vec<String> = configs
        .iter()
        .filter(|c| c.representation == Representation::Ep)
        .map(|c| c.to_string())
        .collect();
    if !ep.is_empty() {
        let mut best: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, r) in rows.iter().enumerate() {
            if ep.contains(&r.config) {
                let e = best.entry(k / configs.len()).or_insert(f64::INFINITY);
                *e = e.min(r.median_us);
            }
        }
        let times: Vec<f64> = best.into_values().collect();
        summary.push((EP_ORACLE.to_string(), percentiles(&times)));
    }
    BenchReport { rows, summary }
}

impl BenchReport {
    /// Solver runtime distribution in microseconds, one row per configuration.
    pub fn summary_table(&self) -> String {
        let width = self
            .summary
            .iter()
            .map(|s| s.0.len())
            .max()
            .unwrap_or(0)
            .max(13);
        let mut out = format!(
            "{:<width$} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "Configuration", "p10", "p25", "p50", "p90", "p99", "Max", "Mean"
        );
        for (name, p) in &self.summary {
            let _ = writeln!(
                out,
                "{name:<width$} {:>10.0} {:>10.0} {:>10.0} {:>10.0} {:>10.0} {:>10.0} {:>10.0}",
                p.p10, p.p25, p.p50, p.p90, p.p99, p.max, p.mean
            );
        }
        out
    }

    /// Per-module `(module, a_us, b_us, a/b)`. `a` or `b` may be [`EP_ORACLE`].
    pub fn ratio(&self, a: &str, b: &str) -> Vec<(String, f64, f64, f64)> {
        let time = |module: &str, cfg: &str| {
            let rows = self.rows.iter().filter(|r| r.module == module);
            if cfg == EP_ORACLE {
                rows.filter(|r| {
                    r.config
                        .parse::<SolverConfig>()
                        .is_ok_and(|c| c.representation == Representation::Ep)
                })
                .map(|r| r.median_us)
                .reduce(f64::min)
            } else {
                rows.clone().find(|r| r.config == cfg).map(|r| r.median_us)
            }
        };
        let mut modules: Vec<&str> = self.rows.iter().map(|r| r.module.as_str()).collect();
        modules.dedup();
        modules
            .into_iter()
            .filter_map(|m| {
                let (ta, tb) = (time(m, a)?, time(m, b)?);
                Some((m.to_string(), ta, tb, ta / tb.max(1e-3)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let p = percentiles(&v);
        assert_eq!((p.p10, p.p50, p.p99, p.max), (10.0, 50.0, 99.0, 100.0));
        assert_eq!(p.mean, 50.5);
        assert_eq!(percentiles(&[7.0]).p10, 7.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
