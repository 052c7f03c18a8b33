//! Fast feasible solutions: randomized greedy construction with a one-shot
//! repair, improved by steepest-descent 2-exchange local search.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{ConflictGraph, Edge, Instance};
use crate::model::{check_assignment, evaluate};
use crate::solution::{Solution, SolveStatus};

const UNASSIGNED: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("local search needs a conflict-feasible starting solution")]
    InfeasibleStart,
    #[error("optimum must be positive to compute a relative gap, got {0}")]
    NonpositiveOpt(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LSConfig {
    pub max_passes: u32,
    pub time_limit: Duration,
    pub restarts: u32,
    pub rng_seed: u64,
}

impl Default for LSConfig {
    fn default() -> Self {
        Self {
            max_passes: 10_000,
            time_limit: Duration::from_secs(60),
            restarts: 10,
            rng_seed: 0,
        }
    }
}

fn feasible_solution(assignment: Vec<usize>, value: i64, sec_best: f64, sec_total: f64) -> Solution {
    Solution {
        assignment: Some(assignment),
        value: Some(value),
        status: SolveStatus::Feasible,
        lower_bound: None,
        sec_best,
        sec_total,
        nodes: 0,
    }
}

/// Randomized greedy: rows in shuffled order, each takes its cheapest free
/// column that clashes with no selected edge. A row with no such column may
/// once evict the single earlier row blocking some column (see
/// `pick_eviction`); the evicted row goes back in the queue. Returns `None`
/// when that is not enough.
pub fn construct_greedy(inst: &Instance, rng_seed: u64) -> Option<Solution> {
    let start = Instant::now();
    let graph = ConflictGraph::new(inst);
    let assignment = greedy_assignment(inst, &graph, rng_seed)?;
    let value = evaluate(inst, &assignment).expect("greedy builds a permutation");
    let t = start.elapsed().as_secs_f64();
    Some(feasible_solution(assignment, value, t, t))
}

fn greedy_assignment(inst: &Instance, graph: &ConflictGraph, rng_seed: u64) -> Option<Vec<usize>> {
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut queue: VecDeque<usize> = order.into();

    let mut col_of = vec![UNASSIGNED; n];
    let mut row_of = vec![UNASSIGNED; n];
    let mut repaired = vec![false; n];
    let mut free: Vec<usize> = Vec::with_capacity(n);

    while let Some(r) = queue.pop_front() {
        free.clear();
        free.extend((0..n).filter(|&c| row_of[c] == UNASSIGNED));
        free.sort_by_key(|&c| (inst.cost(r, c), c));

        if let Some(&c) = free
            .iter()
            .find(|&&c| !graph.clashes_with(Edge::new(r, c), &col_of, &[]))
        {
            col_of[r] = c;
            row_of[c] = r;
            continue;
        }
        if std::mem::replace(&mut repaired[r], true) {
            return None;
        }
        let (c, victim) = pick_eviction(inst, graph, r, &col_of, &row_of)?;
        // A held column is only picked when its holder is the single blocker.
        row_of[col_of[victim]] = UNASSIGNED;
        col_of[victim] = UNASSIGNED;
        col_of[r] = c;
        row_of[c] = r;
        queue.push_back(victim);
    }
    Some(col_of)
}

/// Repair move for a stuck row `r`: a column `c` where exactly one assigned
/// row blocks `(r, c)`, either by holding `c` or through a conflict.
/// Prefers moves after which the evicted row has a clash-free free column;
/// among those, the cheapest `(r, c)`.
fn pick_eviction(
    inst: &Instance,
    graph: &ConflictGraph,
    r: usize,
    col_of: &[usize],
    row_of: &[usize],
) -> Option<(usize, usize)> {
    let n = inst.n();
    let mut columns: Vec<usize> = (0..n).collect();
    columns.sort_by_key(|&c| (inst.cost(r, c), c));
    let mut fallback = None;
    let mut trial = col_of.to_vec();
    for c in columns {
        let mut blockers = graph
            .partners(Edge::new(r, c))
            .iter()
            .filter(|p| col_of[p.a] == p.b)
            .map(|p| p.a)
            .chain((row_of[c] != UNASSIGNED).then_some(row_of[c]));
        let Some(victim) = blockers.next() else { continue };
        if !blockers.all(|b| b == victim) {
            continue;
        }
        // Simulate the move and look for a landing spot for the victim.
        let old = trial[victim];
        trial[victim] = UNASSIGNED;
        trial[r] = c;
        let lands = (0..n).any(|d| {
            d != c
                && (row_of[d] == UNASSIGNED || row_of[d] == victim)
                && !graph.clashes_with(Edge::new(victim, d), &trial, &[])
        });
        trial[victim] = old;
        trial[r] = UNASSIGNED;
        if lands {
            return Some((c, victim));
        }
        fallback.get_or_insert((c, victim));
    }
    fallback
}

/// Steepest descent over 2-exchanges: swap the columns of two rows when
/// that lowers the cost and keeps the solution conflict-feasible. Applies
/// the best such move each pass; stops at a local optimum, the pass limit
/// or the time limit.
pub fn local_search(inst: &Instance, start: &Solution, cfg: &LSConfig) -> Result<Solution, HeuristicError> {
    let clock = Instant::now();
    let graph = ConflictGraph::new(inst);
    let initial = start.assignment.as_ref().ok_or(HeuristicError::InfeasibleStart)?;
    if !check_assignment(inst, initial).is_feasible() {
        return Err(HeuristicError::InfeasibleStart);
    }
    let (assignment, value, improved_at) =
        descend(inst, &graph, initial.clone(), cfg.max_passes, clock, cfg.time_limit);
    let sec_total = clock.elapsed().as_secs_f64();
    Ok(feasible_solution(
        assignment,
        value,
        improved_at.unwrap_or(0.0),
        sec_total,
    ))
}

/// Returns the final assignment, its value and when it last improved.
fn descend(
    inst: &Instance,
    graph: &ConflictGraph,
    mut a: Vec<usize>,
    max_passes: u32,
    clock: Instant,
    time_limit: Duration,
) -> (Vec<usize>, i64, Option<f64>) {
    let n = inst.n();
    let mut value = evaluate(inst, &a).expect("start is a permutation");
    let mut improved_at = None;
    for _ in 0..max_passes {
        if clock.elapsed() >= time_limit {
            break;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..n {
            for k in i + 1..n {
                let delta = inst.cost(i, a[k]) + inst.cost(k, a[i]) - inst.cost(i, a[i]) - inst.cost(k, a[k]);
                if delta >= 0 || best.is_some_and(|(d, _, _)| delta >= d) {
                    continue;
                }
                let e1 = Edge::new(i, a[k]);
                let e2 = Edge::new(k, a[i]);
                let admissible = !graph.conflicting(e1, e2)
                    && !graph.clashes_with(e1, &a, &[i, k])
                    && !graph.clashes_with(e2, &a, &[i, k]);
                if admissible {
                    best = Some((delta, i, k));
                }
            }
        }
        let Some((delta, i, k)) = best else { break };
        a.swap(i, k);
        value += delta;
        improved_at = Some(clock.elapsed().as_secs_f64());
    }
    (a, value, improved_at)
}

/// Multi-start: greedy from a fresh seed, then local search; keeps the best.
///
/// Restart seeds come from one ChaCha8 stream seeded with `cfg.rng_seed`, so
/// `k` restarts always try a prefix of the seeds that `k + 1` restarts try.
pub fn solve_heuristic(inst: &Instance, cfg: &LSConfig) -> Option<Solution> {
    let clock = Instant::now();
    let graph = ConflictGraph::new(inst);
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut best: Option<(Vec<usize>, i64, f64)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let seed = seeds.next_u64();
        if best.is_some() && clock.elapsed() >= cfg.time_limit {
            break;
        }
        let Some(start) = greedy_assignment(inst, &graph, seed) else {
            continue;
        };
        let (a, v, _) = descend(inst, &graph, start, cfg.max_passes, clock, cfg.time_limit);
        if best.as_ref().is_none_or(|(_, bv, _)| v < *bv) {
            best = Some((a, v, clock.elapsed().as_secs_f64()));
        }
    }
    let sec_total = clock.elapsed().as_secs_f64();
    best.map(|(a, v, t)| feasible_solution(a, v, t, sec_total))
}

/// Relative excess over the optimum, in percent: `100 (val - opt) / opt`.
pub fn gap_percent(val: i64, opt: i64) -> Result<f64, HeuristicError> {
    if opt <= 0 {
        return Err(HeuristicError::NonpositiveOpt(opt));
    }
    Ok(100.0 * (val - opt) as f64 / opt as f64)
}
