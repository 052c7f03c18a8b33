//! Conflict-free assignment problem, solved exactly with the Hungarian method.
//!
//! This is the relaxation used by branch-and-bound: dropping every conflict
//! pair leaves a plain assignment problem whose optimum is a lower bound on
//! the APC optimum of the same node.

use thiserror::Error;

use crate::instance::{Edge, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("edge {0} is out of range")]
    OutOfRange(Edge),
    #[error("edge {0} is both forced and forbidden")]
    ForcedAndForbidden(Edge),
    #[error("forced edge {0} shares a row or column with another forced edge")]
    ForcedClash(Edge),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no perfect matching avoids the forbidden edges while using the forced ones")]
pub struct Infeasible;

/// Cost matrix of an instance with some edges removed and some pinned.
#[derive(Debug, Clone)]
pub struct MaskedCosts<'a> {
    base: &'a Instance,
    forbidden: Vec<bool>,
    forced: Vec<Edge>,
    row_forced: Vec<Option<usize>>,
    col_forced: Vec<bool>,
}

impl<'a> MaskedCosts<'a> {
    pub fn new(base: &'a Instance) -> Self {
        let n = base.n();
        Self {
            base,
            forbidden: vec![false; n * n],
            forced: Vec::new(),
            row_forced: vec![None; n],
            col_forced: vec![false; n],
        }
    }

    pub fn with_mask(base: &'a Instance, forbidden: &[Edge], forced: &[Edge]) -> Result<Self, MaskError> {
        let mut mc = Self::new(base);
        for &e in forbidden {
            mc.forbid(e)?;
        }
        for &e in forced {
            mc.force(e)?;
        }
        Ok(mc)
    }

    fn check_range(&self, e: Edge) -> Result<(), MaskError> {
        let n = self.base.n();
        if e.a >= n || e.b >= n {
            Err(MaskError::OutOfRange(e))
        } else {
            Ok(())
        }
    }

    /// Mask from a row-major forbidden bitmap plus pinned edges. The caller
    /// guarantees the pinned edges are disjoint and not forbidden.
    pub(crate) fn from_bitmap(base: &'a Instance, forbidden: Vec<bool>, forced: Vec<Edge>) -> Self {
        let n = base.n();
        let mut row_forced = vec![None; n];
        let mut col_forced = vec![false; n];
        for e in &forced {
            debug_assert!(!forbidden[e.index(n)] && row_forced[e.a].is_none() && !col_forced[e.b]);
            row_forced[e.a] = Some(e.b);
            col_forced[e.b] = true;
        }
        Self {
            base,
            forbidden,
            forced,
            row_forced,
            col_forced,
        }
    }

    pub fn forbid(&mut self, e: Edge) -> Result<(), MaskError> {
        self.check_range(e)?;
        if self.row_forced[e.a] == Some(e.b) {
            return Err(MaskError::ForcedAndForbidden(e));
        }
        self.forbidden[e.index(self.base.n())] = true;
        Ok(())
    }

    pub fn force(&mut self, e: Edge) -> Result<(), MaskError> {
        self.check_range(e)?;
        if self.is_forbidden(e) {
            return Err(MaskError::ForcedAndForbidden(e));
        }
        match self.row_forced[e.a] {
            Some(b) if b == e.b => return Ok(()),
            Some(_) => return Err(MaskError::ForcedClash(e)),
            None if self.col_forced[e.b] => return Err(MaskError::ForcedClash(e)),
            None => {}
        }
        self.row_forced[e.a] = Some(e.b);
        self.col_forced[e.b] = true;
        self.forced.push(e);
        Ok(())
    }

    #[inline]
    pub fn is_forbidden(&self, e: Edge) -> bool {
        self.forbidden[e.index(self.base.n())]
    }

    pub fn forced(&self) -> &[Edge] {
        &self.forced
    }

    pub fn base(&self) -> &Instance {
        self.base
    }
}

/// Optimal conflict-free assignment: `assignment[row] = column`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApSolution {
    pub assignment: Vec<usize>,
    pub value: i64,
}

/// Minimum-cost perfect matching over the allowed edges, O(n^3).
///
/// Forced rows and columns are contracted away first. Forbidden edges are
/// left out of the augmenting-path search altogether; no big-M costs.
pub fn solve_ap(mc: &MaskedCosts<'_>) -> Result<ApSolution, Infeasible> {
    let inst = mc.base;
    let n = inst.n();
    let rows: Vec<usize> = (0..n).filter(|&i| mc.row_forced[i].is_none()).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| !mc.col_forced[j]).collect();
    debug_assert_eq!(rows.len(), cols.len());

    let sub = assign_min_cost(rows.len(), |r, c| {
        let e = Edge::new(rows[r], cols[c]);
        (!mc.is_forbidden(e)).then(|| inst.edge_cost(e))
    })
    .ok_or(Infeasible)?;

    let mut assignment = vec![usize::MAX; n];
    for &e in &mc.forced {
        assignment[e.a] = e.b;
    }
    for (r, c) in sub.into_iter().enumerate() {
        assignment[rows[r]] = cols[c];
    }
    let value = assignment.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum();
    Ok(ApSolution { assignment, value })
}

/// Lower bound on every conflict-feasible completion of the masked node.
///
/// Conflict-feasible matchings are a subset of all matchings, so the plain
/// assignment optimum can never exceed the APC optimum.
pub fn ap_lower_bound(mc: &MaskedCosts<'_>) -> Result<i64, Infeasible> {
    solve_ap(mc).map(|s| s.value)
}

/// Shortest augmenting path Hungarian method on a `k x k` matrix where
/// `cost(r, c) == None` marks a missing edge. Rows are inserted in index
/// order. Returns `row -> column`, or `None` if no perfect matching exists.
fn assign_min_cost(k: usize, cost: impl Fn(usize, usize) -> Option<i64>) -> Option<Vec<usize>> {
    const INF: i64 = i64::MAX;
    // 1-based with a virtual column 0, as in the classic potential formulation.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    let mut minv = vec![INF; k + 1];
    let mut used = vec![false; k + 1];

    for row in 1..=k {
        owner[0] = row;
        let mut j0 = 0;
        minv.fill(INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0 - 1, j - 1) {
                    let reduced = c - u[i0] - v[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta == INF {
                // Row cannot be matched: the current matching is maximum.
                return None;
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else if minv[j] != INF {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![0usize; k];
    for j in 1..=k {
        out[owner[j] - 1] = j - 1;
    }
    Some(out)
}
