use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use apc_core::bench::{self, BenchOptions, CSV_HEADER};
use apc_core::exact::{solve_exact, ExactConfig};
use apc_core::heuristic::{solve_heuristic, LSConfig};
use apc_core::instance::{generate_instance, parse_instance, write_instance, Instance};
use apc_core::model::{build_model, check_feasible, evaluate, export_lp};
use apc_core::oracle::brute_force;
use apc_core::solution::{format_assignment, parse_assignment, Solution, SolveStatus};

/// Assignment problem with conflicts: generate, solve, export, check, bench.
#[derive(Debug, Parser)]
#[command(name = "apc", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        conflicts: u64,
        #[arg(long, default_value_t = 1)]
        cost_lo: i64,
        #[arg(long, default_value_t = 100)]
        cost_hi: i64,
        #[arg(long)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print the result.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMethod::Exact)]
        method: SolveMethod,
        /// Seconds.
        #[arg(long, value_parser = parse_seconds, default_value = "3600")]
        time_limit: Duration,
        /// Start the exact search from a heuristic solution.
        #[arg(long)]
        seed_incumbent: bool,
        /// Heuristic restarts.
        #[arg(long, default_value_t = 10)]
        restarts: u32,
        /// Heuristic RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stop the exact search after this many nodes.
        #[arg(long)]
        node_limit: Option<u64>,
        /// Also write the assignment to this file.
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
    /// Export the binary program.
    Export {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Lp)]
        format: ExportFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a solution file against an instance.
    Check { instance: PathBuf, solution: PathBuf },
    /// Run a benchmark preset and print the results table.
    Bench {
        #[arg(long, default_value = "small")]
        preset: String,
        #[arg(long, default_value = "exact,heuristic")]
        methods: String,
        /// Seconds per method per instance.
        #[arg(long, value_parser = parse_seconds, default_value = "60")]
        time_limit: Duration,
        /// Per-instance CSV, written incrementally.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV of known optima (`group,seed,opt`) for heuristic gaps.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolveMethod {
    Exact,
    Heuristic,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Lp,
}

fn parse_seconds(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if secs.is_nan() || secs <= 0.0 || secs.is_infinite() {
        return Err("time limit must be positive".into());
    }
    Ok(Duration::from_secs_f64(secs))
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing stdout"),
        },
    }
}

fn print_solution(sol: &Solution, status: &str) -> Result<()> {
    let opt = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
    let assignment = sol.assignment.as_deref().map_or("-".to_string(), format_assignment);
    write_output(
        None,
        &format!(
            "status: {status}\nvalue: {}\nlower_bound: {}\nnodes: {}\nsec_best: {:.3}\nsec_total: {:.3}\nassignment: {assignment}\n",
            opt(sol.value),
            opt(sol.lower_bound),
            sol.nodes,
            sol.sec_best,
            sol.sec_total,
        ),
    )
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate {
            n,
            conflicts,
            cost_lo,
            cost_hi,
            seed,
            out,
        } => {
            let inst = generate_instance(n, conflicts, cost_lo, cost_hi, seed)?;
            write_output(out.as_deref(), &write_instance(&inst))?;
            Ok(0)
        }
        Command::Solve {
            instance,
            method,
            time_limit,
            seed_incumbent,
            restarts,
            seed,
            node_limit,
            solution_out,
        } => {
            let inst = read_instance(&instance)?;
            let ls = LSConfig {
                time_limit,
                restarts,
                rng_seed: seed,
                ..Default::default()
            };
            let sol = match method {
                SolveMethod::Oracle => brute_force(&inst)?,
                SolveMethod::Heuristic => match solve_heuristic(&inst, &ls) {
                    Some(s) => s,
                    None => {
                        log::warn!("heuristic found no conflict-free matching");
                        print_solution(&Solution::infeasible(0.0, 0), "NotFound")?;
                        return Ok(1);
                    }
                },
                SolveMethod::Exact => {
                    let initial_incumbent = if seed_incumbent {
                        solve_heuristic(&inst, &ls)
                    } else {
                        None
                    };
                    if let Some(s) = &initial_incumbent {
                        log::info!("heuristic incumbent {:?}", s.value);
                    }
                    solve_exact(
                        &inst,
                        &ExactConfig {
                            time_limit,
                            node_limit,
                            initial_incumbent,
                            ..Default::default()
                        },
                    )
                }
            };
            print_solution(&sol, sol.status.as_str())?;
            if let (Some(path), Some(a)) = (solution_out, sol.assignment.as_deref()) {
                fs::write(&path, format_assignment(a) + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(u8::from(sol.status == SolveStatus::Infeasible))
        }
        Command::Export { instance, format, out } => {
            let inst = read_instance(&instance)?;
            let text = match format {
                ExportFormat::Lp => export_lp(&build_model(&inst)),
            };
            write_output(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Check { instance, solution } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let assignment = parse_assignment(&text).map_err(anyhow::Error::msg)?;
            let report = check_feasible(&inst, &assignment);
            if report.is_feasible() {
                let perm: Vec<usize> = assignment.iter().map(|&j| j as usize).collect();
                write_output(None, &format!("feasible\nvalue: {}\n", evaluate(&inst, &perm)?))?;
                return Ok(0);
            }
            let mut out = String::from("infeasible\n");
            if assignment.len() != inst.n() {
                let _ = writeln!(out, "length: expected {} entries, found {}", inst.n(), assignment.len());
            }
            for r in &report.violated_rows {
                let _ = writeln!(out, "row {r}: no valid column");
            }
            for c in &report.violated_cols {
                let _ = writeln!(out, "column {c}: not covered exactly once");
            }
            for p in &report.violated_conflicts {
                let (e, f) = (p.first(), p.second());
                let _ = writeln!(out, "conflict: ({} {}) ({} {})", e.a, e.b, f.a, f.b);
            }
            write_output(None, &out)?;
            Ok(1)
        }
        Command::Bench {
            preset,
            methods,
            time_limit,
            out_csv,
            jobs,
            reference,
            restarts,
            seed,
        } => {
            let groups = bench::preset(&preset)?;
            let methods = bench::parse_methods(&methods)?;
            if methods.is_empty() {
                bail!("no methods given");
            }
            let reference = match reference {
                Some(p) => bench::parse_reference(
                    &fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                )?,
                None => Default::default(),
            };
            let opts = BenchOptions {
                time_limit,
                jobs,
                cache_dir: std::env::var_os("APC_BENCH_DIR").map(PathBuf::from),
                reference,
                heuristic: LSConfig {
                    restarts,
                    rng_seed: seed,
                    ..Default::default()
                },
                seed_incumbent: true,
            };
            let sink = match &out_csv {
                Some(p) => {
                    let mut f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                    writeln!(f, "{}", CSV_HEADER.join(","))?;
                    Some(Mutex::new(f))
                }
                None => None,
            };
            let records = bench::run_benchmark(&groups, &methods, &opts, |row| {
                if let Some(f) = &sink {
                    let mut f = f.lock().expect("csv sink");
                    if let Err(e) = f.write_all(row.to_csv_line().as_bytes()).and_then(|_| f.flush()) {
                        log::error!("writing csv row: {e}");
                    }
                }
            })?;
            let report = bench::emit_table(&records)?;
            write_output(None, &report.table)?;
            // Replace the completion-ordered stream with the deterministic ordering.
            if let Some(p) = out_csv {
                fs::write(&p, &report.csv).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
