//! Best-first branch-and-bound on the conflict-free relaxation.
//!
//! Each node carries sets of forbidden and forced edges. Its bound is the optimum of
//! the assignment problem without those edges, ignoring conflicts. If that
//! optimum happens to be conflict-free it solves the node; otherwise the
//! search picks a conflict pair the relaxation violates and splits on it.
//!
//! Two splitting rules are available (see [`BranchRule`]). Before each
//! relaxation the node mask is propagated: a forced edge bans its row, its
//! column and every edge it conflicts with, and a row or column left with a
//! single usable edge forces that edge.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use crate::hungarian::{solve_ap, Infeasible, MaskedCosts};
use crate::instance::{ConflictGraph, ConflictPair, Edge, Instance};
use crate::model::{check_assignment, ensure_permutation, evaluate, ModelError};
use crate::solution::{Solution, SolveStatus};

/// How a node is split on a violated pair `{e1, e2}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BranchRule {
    /// Children "forbid e1" and "force e1". Disjoint, so no subproblem is
    /// visited twice; forcing `e1` also bans `e2` through propagation.
    #[default]
    Partition,
    /// Children "forbid e1" and "forbid e2". They overlap on solutions that
    /// use neither edge; repeated masks are skipped.
    Dichotomy,
}

#[derive(Debug, Clone)]
pub struct ExactConfig {
    pub time_limit: Duration,
    pub node_limit: Option<u64>,
    /// Starting incumbent, e.g. from the heuristic. Ignored unless it is
    /// conflict-feasible.
    pub initial_incumbent: Option<Solution>,
    pub branch_rule: BranchRule,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(3600),
            node_limit: None,
            initial_incumbent: None,
            branch_rule: BranchRule::default(),
        }
    }
}

/// Branch-and-bound node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    /// Sorted.
    pub forbidden: Vec<Edge>,
    pub forced: Vec<Edge>,
    pub bound: i64,
    pub depth: u32,
    relaxation: Option<Vec<usize>>,
}

impl SearchNode {
    /// Root node: no mask, trivial bound 0 until relaxed.
    pub fn root() -> Self {
        Self {
            forbidden: Vec::new(),
            forced: Vec::new(),
            bound: 0,
            depth: 0,
            relaxation: None,
        }
    }

    /// Propagates the mask, solves the relaxation and raises `bound` to its
    /// value. `Err` means the node holds no perfect matching at all.
    pub fn relax(&mut self, inst: &Instance) -> Result<(), Infeasible> {
        self.relax_with(inst, &ConflictGraph::new(inst))
    }

    pub(crate) fn relax_with(&mut self, inst: &Instance, graph: &ConflictGraph) -> Result<(), Infeasible> {
        let (banned, fixed) = propagate(inst, graph, &self.forbidden, &self.forced)?;
        let ap = solve_ap(&MaskedCosts::from_bitmap(inst, banned, fixed))?;
        self.bound = self.bound.max(ap.value);
        self.relaxation = Some(ap.assignment);
        Ok(())
    }

    /// Relaxation optimum, once [`relax`](Self::relax) has run.
    pub fn relaxation(&self) -> Option<&[usize]> {
        self.relaxation.as_deref()
    }

    /// Splits on a violated conflict pair: the children forbid `pair.first()`
    /// and `pair.second()` respectively. Their feasible sets together keep
    /// every conflict-feasible solution of this node. Children inherit the
    /// parent bound until relaxed.
    ///
    /// Panics if either edge is already forbidden, or if the node has been
    /// relaxed and its relaxation does not use both edges.
    pub fn branch(&self, pair: ConflictPair) -> (SearchNode, SearchNode) {
        for e in pair.edges() {
            assert!(
                self.forbidden.binary_search(&e).is_err(),
                "branching edge {e} is already forbidden"
            );
        }
        if let Some(r) = &self.relaxation {
            assert!(pair.is_violated_by(r), "relaxation does not use both edges of {pair}");
        }
        let child = |e: Edge| {
            let mut forbidden = self.forbidden.clone();
            let at = forbidden.binary_search(&e).unwrap_err();
            forbidden.insert(at, e);
            SearchNode {
                forbidden,
                forced: self.forced.clone(),
                bound: self.bound,
                depth: self.depth + 1,
                relaxation: None,
            }
        };
        (child(pair.first()), child(pair.second()))
    }

    /// Disjoint split on a violated pair: the first child forbids
    /// `pair.first()`, the second forces it. Children inherit the parent
    /// bound until relaxed.
    ///
    /// Panics if `pair.first()` is already forbidden or forced.
    pub fn split(&self, pair: ConflictPair) -> (SearchNode, SearchNode) {
        let e = pair.first();
        assert!(
            self.forbidden.binary_search(&e).is_err(),
            "branching edge {e} is already forbidden"
        );
        assert!(!self.forced.contains(&e), "branching edge {e} is already forced");
        let mut without = self.forbidden.clone();
        without.insert(without.binary_search(&e).unwrap_err(), e);
        let mut with = self.forced.clone();
        with.push(e);
        let make = |forbidden: Vec<Edge>, forced: Vec<Edge>| SearchNode {
            forbidden,
            forced,
            bound: self.bound,
            depth: self.depth + 1,
            relaxation: None,
        };
        (make(without, self.forced.clone()), make(self.forbidden.clone(), with))
    }

    pub fn children(&self, pair: ConflictPair, rule: BranchRule) -> (SearchNode, SearchNode) {
        match rule {
            BranchRule::Partition => self.split(pair),
            BranchRule::Dichotomy => self.branch(pair),
        }
    }
}

/// Closes the mask under two rules: a forced edge bans every other edge in
/// its conflict partners; a row or column with one usable edge left forces
/// it. Returns the banned bitmap (row-major) and all forced edges, or `Infeasible` when some row or column runs dry
/// or two forced edges collide.
pub(crate) fn propagate(
    inst: &Instance,
    graph: &ConflictGraph,
    forbidden: &[Edge],
    forced: &[Edge],
) -> Result<(Vec<bool>, Vec<Edge>), Infeasible> {
    let n = inst.n();
    let mut banned = vec![false; n * n];
    for e in forbidden {
        banned[e.index(n)] = true;
    }
    let mut row_fix: Vec<Option<usize>> = vec![None; n];
    let mut col_fix = vec![false; n];
    let mut fixed = Vec::new();
    let mut pending: Vec<Edge> = forced.iter().rev().copied().collect();
    loop {
        while let Some(e) = pending.pop() {
            if row_fix[e.a] == Some(e.b) {
                continue;
            }
            if banned[e.index(n)] || row_fix[e.a].is_some() || col_fix[e.b] {
                return Err(Infeasible);
            }
            row_fix[e.a] = Some(e.b);
            col_fix[e.b] = true;
            fixed.push(e);
            for p in graph.partners(e) {
                if row_fix[p.a] == Some(p.b) {
                    return Err(Infeasible);
                }
                banned[p.index(n)] = true;
            }
        }
        for r in (0..n).filter(|&r| row_fix[r].is_none()) {
            let mut usable = (0..n).filter(|&c| !col_fix[c] && !banned[r * n + c]);
            match (usable.next(), usable.next()) {
                (None, _) => return Err(Infeasible),
                (Some(c), None) => pending.push(Edge::new(r, c)),
                _ => {}
            }
        }
        for c in (0..n).filter(|&c| !col_fix[c]) {
            let mut usable = (0..n).filter(|&r| row_fix[r].is_none() && !banned[r * n + c]);
            match (usable.next(), usable.next()) {
                (None, _) => return Err(Infeasible),
                (Some(r), None) => pending.push(Edge::new(r, c)),
                _ => {}
            }
        }
        if pending.is_empty() {
            break;
        }
    }
    Ok((banned, fixed))
}

/// Picks the violated pair (both edges selected) with the largest combined
/// cost; ties go to the canonically smallest pair.
pub fn find_violated_conflict(assignment: &[usize], inst: &Instance) -> Result<Option<ConflictPair>, ModelError> {
    ensure_permutation(assignment, inst.n())?;
    let mut best: Option<(i64, ConflictPair)> = None;
    // Conflicts are sorted, so the first maximum is the canonical tie-break.
    for pair in inst.conflicts().iter().filter(|p| p.is_violated_by(assignment)) {
        let w = pair_weight(inst, pair);
        if best.is_none_or(|(bw, _)| w > bw) {
            best = Some((w, *pair));
        }
    }
    Ok(best.map(|(_, p)| p))
}

fn pair_weight(inst: &Instance, pair: &ConflictPair) -> i64 {
    inst.edge_cost(pair.first()) + inst.edge_cost(pair.second())
}

/// Same rule as [`find_violated_conflict`], touching only the conflicts of
/// selected edges. `assignment` must be a permutation.
pub(crate) fn find_violated_indexed(
    assignment: &[usize],
    inst: &Instance,
    graph: &ConflictGraph,
) -> Option<ConflictPair> {
    let mut best: Option<(i64, ConflictPair)> = None;
    for (a, &b) in assignment.iter().enumerate() {
        let e = Edge::new(a, b);
        for &p in graph.partners(e) {
            if p > e && assignment[p.a] == p.b {
                let pair = ConflictPair::new_unchecked(e, p);
                let w = pair_weight(inst, &pair);
                let better = match best {
                    None => true,
                    Some((bw, bp)) => w > bw || (w == bw && pair < bp),
                };
                if better {
                    best = Some((w, pair));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Search statistics beyond what [`Solution`] carries.
#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    /// `(seconds, value)` each time the incumbent improved.
    pub incumbent_trace: Vec<(f64, i64)>,
    pub nodes_pruned: u64,
    pub duplicates_skipped: u64,
    pub max_open: usize,
}

struct Open(SearchNode, u64);

impl Open {
    fn key(&self) -> (Reverse<i64>, u32, Reverse<u64>) {
        (Reverse(self.0.bound), self.0.depth, Reverse(self.1))
    }
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Max-heap: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

enum Stop {
    Completed,
    Clock,
    Nodes,
}

pub fn solve_exact(inst: &Instance, cfg: &ExactConfig) -> Solution {
    solve_exact_with_stats(inst, cfg).0
}

pub fn solve_exact_with_stats(inst: &Instance, cfg: &ExactConfig) -> (Solution, SearchStats) {
    let start = Instant::now();
    let graph = ConflictGraph::new(inst);
    let mut stats = SearchStats::default();

    let mut incumbent: Option<(Vec<usize>, i64)> = None;
    let mut sec_best = 0.0;
    if let Some(seed) = cfg.initial_incumbent.as_ref().and_then(|s| s.assignment.as_ref()) {
        if check_assignment(inst, seed).is_feasible() {
            let value = evaluate(inst, seed).expect("feasible assignment is a permutation");
            stats.incumbent_trace.push((0.0, value));
            incumbent = Some((seed.clone(), value));
        } else {
            log::warn!("ignoring infeasible initial incumbent");
        }
    }

    let mut open = BinaryHeap::new();
    let mut seen: HashSet<Vec<Edge>> = HashSet::new();
    let mut seq = 0u64;
    let mut nodes = 0u64;

    let mut root = SearchNode::root();
    if root.relax_with(inst, &graph).is_ok() {
        seen.insert(Vec::new());
        open.push(Open(root, seq));
    }

    let mut frontier_bound = None;
    let stop = loop {
        let Some(Open(node, _)) = open.pop() else {
            break Stop::Completed;
        };
        if incumbent.as_ref().is_some_and(|(_, v)| node.bound >= *v) {
            // Best-first: every other open node is at least as bad.
            break Stop::Completed;
        }
        if start.elapsed() >= cfg.time_limit {
            frontier_bound = Some(node.bound);
            break Stop::Clock;
        }
        if cfg.node_limit.is_some_and(|limit| nodes >= limit) {
            frontier_bound = Some(node.bound);
            break Stop::Nodes;
        }
        nodes += 1;

        let relaxation = node.relaxation().expect("open nodes are relaxed");
        let Some(pair) = find_violated_indexed(relaxation, inst, &graph) else {
            // Conflict-free relaxation with the smallest open bound: optimal.
            if incumbent.as_ref().is_none_or(|(_, v)| node.bound < *v) {
                sec_best = start.elapsed().as_secs_f64();
                stats.incumbent_trace.push((sec_best, node.bound));
                incumbent = Some((relaxation.to_vec(), node.bound));
            }
            break Stop::Completed;
        };

        let (left, right) = node.children(pair, cfg.branch_rule);
        for mut child in [left, right] {
            if cfg.branch_rule == BranchRule::Dichotomy && !seen.insert(child.forbidden.clone()) {
                stats.duplicates_skipped += 1;
                continue;
            }
            if child.relax_with(inst, &graph).is_err() {
                stats.nodes_pruned += 1;
                continue;
            }
            if incumbent.as_ref().is_some_and(|(_, v)| child.bound >= *v) {
                stats.nodes_pruned += 1;
                continue;
            }
            let r = child.relaxation().unwrap();
            if find_violated_indexed(r, inst, &graph).is_none() {
                // Feasible leaf: becomes the incumbent, nothing left to split.
                sec_best = start.elapsed().as_secs_f64();
                stats.incumbent_trace.push((sec_best, child.bound));
                incumbent = Some((r.to_vec(), child.bound));
                continue;
            }
            seq += 1;
            open.push(Open(child, seq));
        }
        stats.max_open = stats.max_open.max(open.len());
    };

    let sec_total = start.elapsed().as_secs_f64();
    let (assignment, value) = match incumbent {
        Some((a, v)) => (Some(a), Some(v)),
        None => (None, None),
    };
    let (status, lower_bound) = match stop {
        Stop::Completed => match value {
            Some(v) => (SolveStatus::Optimal, Some(v)),
            None => (SolveStatus::Infeasible, None),
        },
        Stop::Clock | Stop::Nodes => {
            let open_min = open.iter().map(|o| o.0.bound).min();
            let mut lb = frontier_bound.into_iter().chain(open_min).min();
            if let (Some(b), Some(v)) = (lb, value) {
                lb = Some(b.min(v));
            }
            let status = match (stop, value) {
                (Stop::Nodes, Some(_)) => SolveStatus::Feasible,
                _ => SolveStatus::TimeLimit,
            };
            (status, lb)
        }
    };

    let solution = Solution {
        assignment,
        value,
        status,
        lower_bound,
        sec_best: sec_best.min(sec_total),
        sec_total,
        nodes,
    };
    (solution, stats)
}
