//! Grouped benchmark runs. Replicate instances are grouped by `(n, |C|)`;
//! the report shows Gap % and Sec Best for heuristics, Sec Opt for exact
//! methods, and a final averages row.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{solve_exact, ExactConfig};
use crate::heuristic::{gap_percent, solve_heuristic, LSConfig};
use crate::instance::{generate_instance, parse_instance, write_instance, Instance, InstanceError, ParseError};
use crate::oracle::{brute_force, BRUTE_FORCE_MAX_N};
use crate::solution::{Solution, SolveStatus};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown method `{0}` (expected oracle, exact or heuristic)")]
    UnknownMethod(String),
    #[error("unknown preset `{0}` (expected table1 or small)")]
    UnknownPreset(String),
    #[error("no optimum available for group {group} seed {seed}: add an exact method or a reference file")]
    MissingReferenceOptimum { group: String, seed: u64 },
    #[error("oracle cannot handle group {group} (n = {n} > {BRUTE_FORCE_MAX_N})")]
    OracleTooLarge { group: String, n: usize },
    #[error("nothing to report")]
    EmptyReport,
    #[error("malformed benchmark CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("cached instance {path}: {source}")]
    Cache { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    Exact,
    Heuristic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Exact => "exact",
            Method::Heuristic => "heuristic",
        }
    }

    /// Exact methods prove optimality and report Sec Opt; heuristics report
    /// Gap % and Sec Best.
    pub fn is_exact(self) -> bool {
        !matches!(self, Method::Heuristic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "oracle" => Ok(Method::Oracle),
            "exact" => Ok(Method::Exact),
            "heuristic" => Ok(Method::Heuristic),
            other => Err(BenchError::UnknownMethod(other.to_string())),
        }
    }
}

/// Parses a comma-separated method list such as `exact,heuristic`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>, BenchError> {
    let mut out = Vec::new();
    for m in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = m.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

/// Replicate instances sharing `(n, |C|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchGroup {
    pub label: String,
    pub n: usize,
    pub conflict_count: u64,
    pub seeds: Vec<u64>,
    pub cost_lo: i64,
    pub cost_hi: i64,
}

pub const DEFAULT_COST_RANGE: (i64, i64) = (1, 100);
pub const DEFAULT_REPLICATES: u64 = 5;

impl BenchGroup {
    pub fn new(n: usize, conflict_count: u64, seeds: Vec<u64>) -> Self {
        Self {
            label: format!("{n}/{conflict_count}"),
            n,
            conflict_count,
            seeds,
            cost_lo: DEFAULT_COST_RANGE.0,
            cost_hi: DEFAULT_COST_RANGE.1,
        }
    }

    pub fn replicate_count(&self) -> usize {
        self.seeds.len()
    }

    fn instance(&self, seed: u64, cache_dir: Option<&PathBuf>) -> Result<Instance, BenchError> {
        let Some(dir) = cache_dir else {
            return Ok(generate_instance(
                self.n,
                self.conflict_count,
                self.cost_lo,
                self.cost_hi,
                seed,
            )?);
        };
        let path = dir.join(format!(
            "n{}_m{}_c{}-{}_s{seed}.apc",
            self.n, self.conflict_count, self.cost_lo, self.cost_hi
        ));
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            return parse_instance(&text).map_err(|source| BenchError::Cache { path, source });
        }
        let inst = generate_instance(self.n, self.conflict_count, self.cost_lo, self.cost_hi, seed)?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, write_instance(&inst))?;
        Ok(inst)
    }
}

/// `(n, |C|)` rows of the `table1` preset.
pub const TABLE1_ROWS: [(usize, u64); 26] = [
    (15, 5_000),
    (20, 10_000),
    (30, 20_000),
    (30, 30_000),
    (40, 40_000),
    (50, 50_000),
    (50, 60_000),
    (60, 80_000),
    (70, 100_000),
    (70, 150_000),
    (80, 200_000),
    (90, 250_000),
    (100, 100_000),
    (100, 250_000),
    (100, 350_000),
    (150, 200_000),
    (150, 350_000),
    (150, 500_000),
    (200, 200_000),
    (200, 400_000),
    (250, 500_000),
    (250, 700_000),
    (300, 100_000),
    (300, 300_000),
    (400, 200_000),
    (500, 200_000),
];

/// Desk-scale stand-in: `n` in {8, 10, 12}, `|C|` in {50, 200}.
pub const SMALL_ROWS: [(usize, u64); 6] = [(8, 50), (8, 200), (10, 50), (10, 200), (12, 50), (12, 200)];

pub fn preset(name: &str) -> Result<Vec<BenchGroup>, BenchError> {
    let rows: &[(usize, u64)] = match name {
        "table1" => &TABLE1_ROWS,
        "small" => &SMALL_ROWS,
        other => return Err(BenchError::UnknownPreset(other.to_string())),
    };
    Ok(rows
        .iter()
        .map(|&(n, m)| BenchGroup::new(n, m, (1..=DEFAULT_REPLICATES).collect()))
        .collect())
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub time_limit: Duration,
    pub jobs: usize,
    /// Directory for generated instances; reused across runs when present.
    pub cache_dir: Option<PathBuf>,
    /// Known optima keyed by `(group label, seed)`.
    pub reference: HashMap<(String, u64), i64>,
    pub heuristic: LSConfig,
    /// Seed the exact search with the heuristic solution when both run.
    pub seed_incumbent: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(3600),
            jobs: 1,
            cache_dir: None,
            reference: HashMap::new(),
            heuristic: LSConfig::default(),
            seed_incumbent: true,
        }
    }
}

/// One method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRun {
    pub seed: u64,
    pub value: Option<i64>,
    pub status: SolveStatus,
    /// Heuristics only.
    pub gap_percent: Option<f64>,
    pub sec_best: f64,
    /// Exact methods only.
    pub sec_total: Option<f64>,
}

/// One method on one group.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub label: String,
    pub n: usize,
    pub conflicts: u64,
    pub method: Method,
    pub runs: Vec<InstanceRun>,
    /// Mean optimum over the group, when every replicate has one.
    pub avg_opt: Option<f64>,
    pub avg_gap_percent: Option<f64>,
    pub avg_sec_best: f64,
    pub avg_sec_total: Option<f64>,
}

impl BenchRecord {
    pub fn statuses(&self) -> impl Iterator<Item = SolveStatus> + '_ {
        self.runs.iter().map(|r| r.status)
    }
}

/// A per-instance result row, the unit of the CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub group: String,
    pub n: usize,
    pub conflicts: u64,
    pub method: Method,
    pub run: InstanceRun,
}

pub const CSV_HEADER: [&str; 10] = [
    "group",
    "n",
    "conflicts",
    "method",
    "seed",
    "value",
    "status",
    "gap_percent",
    "sec_best",
    "sec_total",
];

impl CsvRow {
    pub fn fields(&self) -> [String; 10] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.group.clone(),
            self.n.to_string(),
            self.conflicts.to_string(),
            self.method.to_string(),
            self.run.seed.to_string(),
            opt(self.run.value.map(|v| v.to_string())),
            self.run.status.to_string(),
            opt(self.run.gap_percent.map(|g| format!("{g:.2}"))),
            format!("{:.1}", self.run.sec_best),
            opt(self.run.sec_total.map(|s| format!("{s:.1}"))),
        ]
    }

    /// CSV line for incremental output, with the trailing newline.
    pub fn to_csv_line(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.fields()).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn run_method(method: Method, inst: &Instance, opts: &BenchOptions, incumbent: Option<&Solution>) -> Solution {
    match method {
        Method::Oracle => brute_force(inst).expect("size checked up front"),
        Method::Exact => solve_exact(
            inst,
            &ExactConfig {
                time_limit: opts.time_limit,
                initial_incumbent: incumbent.cloned(),
                ..Default::default()
            },
        ),
        Method::Heuristic => {
            let cfg = LSConfig {
                time_limit: opts.time_limit,
                ..opts.heuristic.clone()
            };
            // Nothing found within the budget: report it as a time-out with no value.
            solve_heuristic(inst, &cfg).unwrap_or(Solution {
                assignment: None,
                value: None,
                status: SolveStatus::TimeLimit,
                lower_bound: None,
                sec_best: 0.0,
                sec_total: 0.0,
                nodes: 0,
            })
        }
    }
}

fn solve_one(
    group: &BenchGroup,
    seed: u64,
    methods: &[Method],
    opts: &BenchOptions,
) -> Result<Vec<CsvRow>, BenchError> {
    let inst = group.instance(seed, opts.cache_dir.as_ref())?;
    let mut results: Vec<(Method, Solution)> = Vec::with_capacity(methods.len());
    // Heuristics first so their solution can seed the exact search.
    let order = methods
        .iter()
        .filter(|m| !m.is_exact())
        .chain(methods.iter().filter(|m| m.is_exact()));
    for &m in order {
        let incumbent = if opts.seed_incumbent && m == Method::Exact {
            results.iter().find(|(hm, _)| !hm.is_exact()).map(|(_, s)| s)
        } else {
            None
        };
        let sol = run_method(m, &inst, opts, incumbent);
        results.push((m, sol));
    }
    let optimum = results
        .iter()
        .find(|(m, s)| m.is_exact() && s.status == SolveStatus::Optimal)
        .and_then(|(_, s)| s.value)
        .or_else(|| opts.reference.get(&(group.label.clone(), seed)).copied());

    let rows = methods
        .iter()
        .map(|&m| {
            let sol = &results.iter().find(|(rm, _)| *rm == m).unwrap().1;
            let gap = match (m.is_exact(), sol.value, optimum) {
                (false, Some(v), Some(opt)) => gap_percent(v, opt).ok(),
                _ => None,
            };
            CsvRow {
                group: group.label.clone(),
                n: group.n,
                conflicts: group.conflict_count,
                method: m,
                run: InstanceRun {
                    seed,
                    value: sol.value,
                    status: sol.status,
                    gap_percent: gap,
                    sec_best: sol.sec_best,
                    sec_total: m.is_exact().then_some(sol.sec_total),
                },
            }
        })
        .collect();
    Ok(rows)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Runs every method on every instance of every group.
///
/// `on_row` sees each per-instance row as soon as its instance finishes
/// (from worker threads, in completion order). The returned records are
/// ordered by group, then method, then seed regardless of `jobs`.
pub fn run_benchmark(
    groups: &[BenchGroup],
    methods: &[Method],
    opts: &BenchOptions,
    on_row: impl Fn(&CsvRow) + Sync,
) -> Result<Vec<BenchRecord>, BenchError> {
    for g in groups {
        if methods.contains(&Method::Oracle) && g.n > BRUTE_FORCE_MAX_N {
            return Err(BenchError::OracleTooLarge {
                group: g.label.clone(),
                n: g.n,
            });
        }
        if methods.contains(&Method::Heuristic) && !methods.iter().any(|m| m.is_exact()) {
            if let Some(&seed) = g
                .seeds
                .iter()
                .find(|&&s| !opts.reference.contains_key(&(g.label.clone(), s)))
            {
                return Err(BenchError::MissingReferenceOptimum {
                    group: g.label.clone(),
                    seed,
                });
            }
        }
    }

    let tasks: Vec<(usize, u64)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| g.seeds.iter().map(move |&s| (gi, s)))
        .collect();
    let run = || -> Result<Vec<Vec<CsvRow>>, BenchError> {
        tasks
            .par_iter()
            .map(|&(gi, seed)| {
                let rows = solve_one(&groups[gi], seed, methods, opts)?;
                log::info!("finished group {} seed {seed}", groups[gi].label);
                rows.iter().for_each(&on_row);
                Ok(rows)
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .expect("thread pool");
    let per_instance = pool.install(run)?;

    let mut by_group: Vec<Vec<CsvRow>> = vec![Vec::new(); groups.len()];
    for (rows, &(gi, _)) in per_instance.into_iter().zip(&tasks) {
        by_group[gi].extend(rows);
    }
    Ok(groups
        .iter()
        .zip(by_group)
        .flat_map(|(g, rows)| {
            methods
                .iter()
                .map(|&m| {
                    let runs: Vec<InstanceRun> = rows.iter().filter(|r| r.method == m).map(|r| r.run.clone()).collect();
                    record_from_runs(g, m, runs, &rows)
                })
                .collect::<Vec<_>>()
        })
        .collect())
}

fn record_from_runs(g: &BenchGroup, method: Method, runs: Vec<InstanceRun>, all: &[CsvRow]) -> BenchRecord {
    // Group optimum from whichever exact method proved it, per seed.
    let optima: Vec<Option<f64>> = g
        .seeds
        .iter()
        .map(|&s| {
            all.iter()
                .find(|r| r.run.seed == s && r.method.is_exact() && r.run.status == SolveStatus::Optimal)
                .and_then(|r| r.run.value)
                .map(|v| v as f64)
        })
        .collect();
    let avg_opt = if optima.iter().all(Option::is_some) {
        mean(optima.into_iter().flatten())
    } else {
        None
    };
    BenchRecord {
        label: g.label.clone(),
        n: g.n,
        conflicts: g.conflict_count,
        method,
        avg_gap_percent: if method.is_exact() {
            None
        } else {
            mean(runs.iter().filter_map(|r| r.gap_percent))
        },
        avg_sec_best: mean(runs.iter().map(|r| r.sec_best)).unwrap_or(0.0),
        avg_sec_total: if method.is_exact() {
            mean(runs.iter().filter_map(|r| r.sec_total))
        } else {
            None
        },
        avg_opt,
        runs,
    }
}

/// Rendered report: an aligned text table and the per-instance CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: String,
    pub csv: String,
}

/// Renders records as a results table (one row per group, columns per
/// method, an `Averages` footer) plus a per-instance CSV.
pub fn emit_table(records: &[BenchRecord]) -> Result<Report, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    let mut methods: Vec<Method> = Vec::new();
    let mut groups: Vec<(&str, usize, u64)> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        if !groups.iter().any(|g| g.0 == r.label) {
            groups.push((&r.label, r.n, r.conflicts));
        }
    }
    let find = |label: &str, m: Method| records.iter().find(|r| r.label == label && r.method == m);
    let cell = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$}"));

    let mut header1 = vec![String::new(), String::new(), String::new()];
    let mut header2 = vec!["|V_A|".to_string(), "|C|".to_string(), "Opt".to_string()];
    for m in &methods {
        if m.is_exact() {
            header1.push(m.name().to_string());
            header2.push("Sec Opt".into());
        } else {
            header1.push(m.name().to_string());
            header1.push(String::new());
            header2.push("Gap %".into());
            header2.push("Sec Best".into());
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let columns = header2.len() - 3;
    let mut sums: Vec<Vec<f64>> = vec![Vec::new(); columns];
    for &(label, n, conflicts) in &groups {
        let opt = methods.iter().find_map(|&m| find(label, m).and_then(|r| r.avg_opt));
        let mut row = vec![n.to_string(), conflicts.to_string(), cell(opt, 1)];
        let mut col = 0;
        for &m in &methods {
            let r = find(label, m);
            if m.is_exact() {
                let v = r.and_then(|r| r.avg_sec_total);
                row.push(cell(v, 1));
                sums[col].extend(v);
                col += 1;
            } else {
                let g = r.and_then(|r| r.avg_gap_percent);
                let s = r.map(|r| r.avg_sec_best);
                row.push(cell(g, 2));
                row.push(cell(s, 1));
                sums[col].extend(g);
                sums[col + 1].extend(s);
                col += 2;
            }
        }
        rows.push(row);
    }
    let mut footer = vec!["Averages".to_string(), String::new(), String::new()];
    let mut col = 0;
    for &m in &methods {
        if m.is_exact() {
            footer.push(cell(mean(sums[col].iter().copied()), 1));
            col += 1;
        } else {
            footer.push(cell(mean(sums[col].iter().copied()), 2));
            footer.push(cell(mean(sums[col + 1].iter().copied()), 1));
            col += 2;
        }
    }

    let all: Vec<&Vec<String>> = [&header1, &header2]
        .into_iter()
        .chain(rows.iter())
        .chain([&footer])
        .collect();
    let widths: Vec<usize> = (0..header2.len())
        .map(|c| all.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut table = String::new();
    for (k, r) in all.iter().enumerate() {
        if k == 2 || k + 1 == all.len() {
            let _ = writeln!(
                table,
                "{}",
                "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))
            );
        }
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, w))| {
                if c == 0 && k + 1 == all.len() {
                    format!("{v:<w$}")
                } else {
                    format!("{v:>w$}")
                }
            })
            .collect();
        let _ = writeln!(table, "{}", line.join("  ").trim_end());
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        for run in &r.runs {
            let row = CsvRow {
                group: r.label.clone(),
                n: r.n,
                conflicts: r.conflicts,
                method: r.method,
                run: run.clone(),
            };
            w.write_record(row.fields()).expect("in-memory write");
        }
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    Ok(Report { table, csv })
}

/// Reads the per-instance CSV written by [`emit_table`] or the incremental
/// writer. Numbers come back at their printed precision.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, BenchError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| BenchError::Csv(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Csv(format!("unexpected header {header:?}")));
    }
    let bad = |what: &str, v: &str| BenchError::Csv(format!("bad {what} `{v}`"));
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| BenchError::Csv(e.to_string()))?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let opt_f64 = |i: usize, what: &str| -> Result<Option<f64>, BenchError> {
            match f(i) {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(what, v)),
            }
        };
        out.push(CsvRow {
            group: f(0).to_string(),
            n: f(1).parse().map_err(|_| bad("n", f(1)))?,
            conflicts: f(2).parse().map_err(|_| bad("conflicts", f(2)))?,
            method: f(3).parse()?,
            run: InstanceRun {
                seed: f(4).parse().map_err(|_| bad("seed", f(4)))?,
                value: match f(5) {
                    "" => None,
                    v => Some(v.parse().map_err(|_| bad("value", v))?),
                },
                status: f(6).parse().map_err(|_| bad("status", f(6)))?,
                gap_percent: opt_f64(7, "gap_percent")?,
                sec_best: f(8).parse().map_err(|_| bad("sec_best", f(8)))?,
                sec_total: opt_f64(9, "sec_total")?,
            },
        });
    }
    Ok(out)
}

/// Reads a sidecar of known optima: CSV lines `group,seed,opt` with a header.
pub fn parse_reference(text: &str) -> Result<HashMap<(String, u64), i64>, BenchError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut out = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| BenchError::Csv(e.to_string()))?;
        let (Some(g), Some(s), Some(o)) = (rec.get(0), rec.get(1), rec.get(2)) else {
            return Err(BenchError::Csv(format!("reference row needs 3 fields: {rec:?}")));
        };
        let seed = s
            .trim()
            .parse()
            .map_err(|_| BenchError::Csv(format!("bad seed `{s}`")))?;
        let opt = o
            .trim()
            .parse()
            .map_err(|_| BenchError::Csv(format!("bad optimum `{o}`")))?;
        out.insert((g.trim().to_string(), seed), opt);
    }
    Ok(out)
}
