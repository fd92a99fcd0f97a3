// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use andersen_core::alias::conflict_rate;
use andersen_core::frontend::{lower, parse_tiny_module, TinyModule};
use andersen_core::harness::{
    benchmark, fuzz_soundness, validate_all_configs, FuzzParams, EP_ORACLE,
};
use andersen_core::model::{parse_constraint_module, ConstraintModule};
use andersen_core::{solve_module, SolverConfig};

#[derive(Parser)]
#[command(
    name = "andersen",
    version,
    about = "Andersen-style points-to analysis for incomplete programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one module and print its points-to sets.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value = "IP+WL(FIFO)+PIP")]
        config: SolverConfig,
        #[arg(long)]
        dump_solution: bool,
        /// Write solver statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Check that every configuration yields the same solution.
    Validate { path: PathBuf },
    /// Partial-versus-whole soundness fuzzing over linked programs.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of programs.
        #[arg(long, default_value_t = 100)]
        programs: usize,
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value = "IP+WL(FIFO)+PIP")]
        config: SolverConfig,
    },
    /// Time configurations over a directory of modules.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// `all` or a comma-separated list of configurations.
        #[arg(long, default_value = "all")]
        configs: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Per-function load/store conflict rate.
    Alias {
        file: PathBuf,
        #[arg(long, default_value = "IP+WL(FIFO)+PIP")]
        config: SolverConfig,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Per-module runtime of one configuration against another.
    Ratio {
        dir: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Shape {
    /// Modules per program.
    #[arg(long, default_value_t = 3)]
    modules: usize,
    #[arg(long, default_value_t = 60)]
    vars: usize,
    #[arg(long, default_value_t = 80)]
    statements: usize,
    #[arg(long, default_value_t = 0.3)]
    export_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    cast_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    indirect_call_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    import_fraction: f64,
}

fn read_tiny(path: &Path) -> Result<TinyModule> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tiny_module(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Loads `.tir` (TinyIR) or `.cons` (constraint text) input.
fn load(path: &Path) -> Result<ConstraintModule> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("cons") => {
            let text = fs::read_to_string(path)?;
            parse_constraint_module(&text).with_context(|| format!("parsing {}", path.display()))
        }
        _ => Ok(lower(&read_tiny(path)?)?),
    }
}

fn inputs(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    out.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("tir" | "cons")));
    out.sort();
    if out.is_empty() {
        bail!("no .tir or .cons files in {}", path.display());
    }
    Ok(out)
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_configs(list: &str) -> Result<Vec<SolverConfig>> {
    if list == "all" {
        return Ok(SolverConfig::enumerate());
    }
    list.split(',').map(|s| Ok(s.trim().parse()?)).collect()
}

#[derive(Serialize)]
struct BenchCsvRow<'a> {
    module: &'a str,
    config: &'a str,
    median_us: f64,
    node_visits: u64,
    explicit_pointees: u64,
    edges_added: u64,
    edges_removed: u64,
    unifications: u64,
}

#[derive(Serialize)]
struct AliasCsvRow<'a> {
    function: &'a str,
    may: u64,
    no: u64,
    must: u64,
    may_percent: f64,
}

#[derive(Serialize)]
struct RatioCsvRow<'a> {
    module: &'a str,
    a_us: f64,
    b_us: f64,
    ratio: f64,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze {
            file,
            config,
            dump_solution,
            stats,
        } => {
            let m = load(&file)?;
            let (sol, st) = solve_module(&m, config)?;
            if dump_solution {
                print!("{}", sol.dump());
            } else {
                println!(
                    "{}: {} variables, {} externally accessible, {} us",
                    m.name(),
                    sol.iter().count(),
                    sol.external_set().len(),
                    st.solve_time.as_micros()
                );
            }
            if let Some(p) = stats {
                fs::write(&p, serde_json::to_string_pretty(&st)?)?;
            }
            Ok(true)
        }
        Command::Validate { path } => {
            let mut ok = true;
            for f in inputs(&path)? {
                let r = validate_all_configs(&load(&f)?);
                if r.passed() {
                    println!("PASS {} ({} configurations)", f.display(), r.configs);
                    continue;
                }
                ok = false;
                println!("FAIL {}", f.display());
                if let Some(d) = &r.mismatch {
                    println!(
                        "  {} vs {}: {} = {} / {}",
                        d.baseline, d.config, d.var, d.baseline_set, d.config_set
                    );
                }
                for a in &r.audit {
                    println!("  audit: {a}");
                }
            }
            Ok(ok)
        }
        Command::Fuzz {
            seed,
            programs,
            shape,
            config,
        } => {
            let p = FuzzParams {
                seed,
                modules: shape.modules,
                vars: shape.vars,
                statements: shape.statements,
                export_fraction: shape.export_fraction,
                cast_fraction: shape.cast_fraction,
                indirect_call_fraction: shape.indirect_call_fraction,
                import_fraction: shape.import_fraction,
            };
            if let Err(e) = p.validate() {
                bail!("{e}");
            }
            let r = fuzz_soundness(&p, programs, config)?;
            println!(
                "{} programs, {} modules, {} variables checked, {} failing programs",
                r.programs,
                r.modules,
                r.checked_vars,
                r.failures.len()
            );
            for f in &r.failures {
                println!("seed {}: {} violations", f.seed, f.violations.len());
                for v in f.violations.iter().take(5) {
                    println!("  {}: {} misses {}", v.module, v.var, v.target);
                }
                println!("witness:\n{}", f.witness.join("\n"));
            }
            Ok(r.passed())
        }
        Command::Bench {
            dir,
            reps,
            configs,
            csv,
        } => {
            if reps == 0 {
                bail!("--reps must be at least 1");
            }
            let modules = inputs(&dir)?
                .iter()
                .map(|f| load(f))
                .collect::<Result<Vec<_>>>()?;
            let r = benchmark(&modules, &parse_configs(&configs)?, reps, false);
            print!("{}", r.summary_table());
            if let Some(p) = csv {
                write_csv(
                    &p,
                    r.rows.iter().map(|row| BenchCsvRow {
                        module: &row.module,
                        config: &row.config,
                        median_us: row.median_us,
                        node_visits: row.stats.node_visits,
                        explicit_pointees: row.stats.explicit_pointees,
                        edges_added: row.stats.edges_added,
                        edges_removed: row.stats.edges_removed,
                        unifications: row.stats.unifications,
                    }),
                )?;
            }
            Ok(true)
        }
        Command::Alias { file, config, csv } => {
            let t = read_tiny(&file)?;
            let (sol, _) = solve_module(&lower(&t)?, config)?;
            let r = conflict_rate(&sol, &t)?;
            println!(
                "{:<24} {:>6} {:>6} {:>6} {:>8}",
                "function", "may", "no", "must", "may%"
            );
            let rows: Vec<(&str, _)> = r
                .functions
                .iter()
                .map(|(f, c)| (f.as_str(), c))
                .chain([("TOTAL", &r.total)])
                .collect();
            for (f, c) in &rows {
                println!(
                    "{f:<24} {:>6} {:>6} {:>6} {:>7.1}%",
                    c.may,
                    c.no,
                    c.must,
                    c.may_percent()
                );
            }
            if let Some(p) = csv {
                write_csv(
                    &p,
                    rows.iter().map(|(f, c)| AliasCsvRow {
                        function: f,
                        may: c.may,
                        no: c.no,
                        must: c.must,
                        may_percent: c.may_percent(),
                    }),
                )?;
            }
            Ok(true)
        }
        Command::Ratio {
            dir,
            a,
            b,
            reps,
            csv,
        } => {
            let modules = inputs(&dir)?
                .iter()
                .map(|f| load(f))
                .collect::<Result<Vec<_>>>()?;
            let mut configs = Vec::new();
            let mut names = Vec::new();
            for c in [&a, &b] {
                if c == EP_ORACLE {
                    configs.extend(
                        SolverConfig::enumerate()
                            .into_iter()
                            .filter(|c| c.representation == andersen_core::Representation::Ep),
                    );
                    names.push(EP_ORACLE.to_string());
                } else {
                    let cfg: SolverConfig = c.parse()?;
                    configs.push(cfg);
                    names.push(cfg.to_string());
                }
            }
            configs.sort_by_key(|c| c.to_string());
            configs.dedup();
            let r = benchmark(&modules, &configs, reps, false);
            let rows = r.ratio(&names[0], &names[1]);
            println!(
                "{:<24} {:>12} {:>12} {:>8}",
                "module", "a_us", "b_us", "a/b"
            );
            for (m, ta, tb, q) in &rows {
                println!("{m:<24} {ta:>12.1} {tb:>12.1} {q:>8.2}");
            }
            if let Some(p) = csv {
                write_csv(
                    &p,
                    rows.iter().map(|(m, ta, tb, q)| RatioCsvRow {
                        module: m,
                        a_us: *ta,
                        b_us: *tb,
                        ratio: *q,
                    }),
                )?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
