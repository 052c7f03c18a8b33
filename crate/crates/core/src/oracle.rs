//! Exhaustive enumeration over all permutations. Slow and obviously correct;
//! the reference every other solver is tested against.

use std::time::Instant;

use thiserror::Error;

use crate::instance::Instance;
use crate::solution::{Solution, SolveStatus};

pub const BRUTE_FORCE_MAX_N: usize = 10;
pub const ENUMERATE_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("instance size {n} exceeds the enumeration limit {limit}")]
pub struct InstanceTooLarge {
    pub n: usize,
    pub limit: usize,
}

/// Steps `p` to the next permutation in lexicographic order. Returns false
/// after the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn conflict_free(inst: &Instance, p: &[usize]) -> bool {
    inst.conflicts()
        .iter()
        .all(|c| !(p[c.first().a] == c.first().b && p[c.second().a] == c.second().b))
}

fn cost(inst: &Instance, p: &[usize]) -> i64 {
    p.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum()
}

fn for_each_feasible(inst: &Instance, mut f: impl FnMut(&[usize], i64)) {
    let mut p: Vec<usize> = (0..inst.n()).collect();
    loop {
        if conflict_free(inst, &p) {
            f(&p, cost(inst, &p));
        }
        if !next_permutation(&mut p) {
            break;
        }
    }
}

/// Optimal APC solution by enumeration; ties go to the lexicographically
/// first permutation.
pub fn brute_force(inst: &Instance) -> Result<Solution, InstanceTooLarge> {
    if inst.n() > BRUTE_FORCE_MAX_N {
        return Err(InstanceTooLarge {
            n: inst.n(),
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let start = Instant::now();
    let mut best: Option<(Vec<usize>, i64)> = None;
    let mut sec_best = 0.0;
    let mut count = 0u64;
    for_each_feasible(inst, |p, v| {
        count += 1;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((p.to_vec(), v));
            sec_best = start.elapsed().as_secs_f64();
        }
    });
    let sec_total = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((assignment, value)) => Solution {
            assignment: Some(assignment),
            value: Some(value),
            status: SolveStatus::Optimal,
            lower_bound: Some(value),
            sec_best,
            sec_total,
            nodes: count,
        },
        None => Solution::infeasible(sec_total, 0),
    })
}

/// Every conflict-feasible permutation with its cost, in lexicographic order.
pub fn enumerate_feasible(inst: &Instance) -> Result<Vec<(Vec<usize>, i64)>, InstanceTooLarge> {
    if inst.n() > ENUMERATE_MAX_N {
        return Err(InstanceTooLarge {
            n: inst.n(),
            limit: ENUMERATE_MAX_N,
        });
    }
    let mut out = Vec::new();
    for_each_feasible(inst, |p, v| out.push((p.to_vec(), v)));
    Ok(out)
}
