//! The binary program behind the APC, as solver-neutral data.
//!
//! One binary variable per edge, an objective over all edges, one equality
//! per left node, one per right node and one `<= 1` row per conflict pair.
//! [`export_lp`] renders it in CPLEX LP syntax for external MILP/CP solvers.

use std::fmt::Write;

use thiserror::Error;

use crate::instance::{ConflictPair, Edge, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("assignment is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
}

/// Checks that `assignment` is a permutation of `0..n`.
pub fn ensure_permutation(assignment: &[usize], n: usize) -> Result<(), ModelError> {
    if assignment.len() != n {
        return Err(ModelError::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &b in assignment {
        if b >= n || std::mem::replace(&mut seen[b], true) {
            return Err(ModelError::NotAPermutation { n });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Le => "<=",
        }
    }
}

/// A row `sum(vars) <sense> rhs`; every coefficient is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub vars: Vec<usize>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn is_satisfied(&self, values: &[u8]) -> bool {
        let lhs: i64 = self.vars.iter().map(|&v| values[v] as i64).sum();
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
        }
    }
}

/// Solver-neutral binary linear program.
///
/// Variable `i * n + j` stands for edge `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelIR {
    pub name: String,
    pub n: usize,
    pub objective: Vec<(usize, i64)>,
    pub row_constraints: Vec<Constraint>,
    pub col_constraints: Vec<Constraint>,
    pub conflict_constraints: Vec<Constraint>,
}

impl ModelIR {
    #[inline]
    pub fn num_vars(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn var_of(&self, e: Edge) -> usize {
        e.index(self.n)
    }

    #[inline]
    pub fn edge_of(&self, var: usize) -> Edge {
        Edge::from_index(var, self.n)
    }

    pub fn var_name(&self, var: usize) -> String {
        let e = self.edge_of(var);
        format!("x_{}_{}", e.a, e.b)
    }

    /// Constraints in export order: rows, columns, conflicts.
    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.row_constraints
            .iter()
            .chain(&self.col_constraints)
            .chain(&self.conflict_constraints)
    }

    /// 0/1 vector with `x[i][assignment[i]] = 1`.
    pub fn values_from_assignment(&self, assignment: &[usize]) -> Vec<u8> {
        let mut x = vec![0u8; self.num_vars()];
        for (i, &j) in assignment.iter().enumerate() {
            x[self.var_of(Edge::new(i, j))] = 1;
        }
        x
    }

    pub fn objective_value(&self, values: &[u8]) -> i64 {
        self.objective.iter().map(|&(v, c)| c * values[v] as i64).sum()
    }

    pub fn is_satisfied(&self, values: &[u8]) -> bool {
        self.constraints().all(|c| c.is_satisfied(values))
    }
}

pub fn build_model(inst: &Instance) -> ModelIR {
    let n = inst.n();
    let objective = (0..n * n).map(|v| (v, inst.costs()[v])).collect();
    let row_constraints = (0..n)
        .map(|i| Constraint {
            name: format!("row_{i}"),
            vars: (0..n).map(|j| i * n + j).collect(),
            sense: Sense::Eq,
            rhs: 1,
        })
        .collect();
    let col_constraints = (0..n)
        .map(|j| Constraint {
            name: format!("col_{j}"),
            vars: (0..n).map(|i| i * n + j).collect(),
            sense: Sense::Eq,
            rhs: 1,
        })
        .collect();
    let conflict_constraints = inst
        .conflicts()
        .iter()
        .enumerate()
        .map(|(k, p)| Constraint {
            name: format!("conflict_{k}"),
            vars: vec![p.first().index(n), p.second().index(n)],
            sense: Sense::Le,
            rhs: 1,
        })
        .collect();
    ModelIR {
        name: inst.name().to_string(),
        n,
        objective,
        row_constraints,
        col_constraints,
        conflict_constraints,
    }
}

const TERMS_PER_LINE: usize = 8;

/// Renders the model as a CPLEX LP file.
///
/// Order is fixed: objective terms by variable index, then `row_*`,
/// `col_*` and `conflict_*` constraints in index order, then the binary
/// section. Long expressions wrap every few terms.
pub fn export_lp(ir: &ModelIR) -> String {
    let mut out = String::new();
    if !ir.name.is_empty() {
        let _ = writeln!(out, "\\ {}", ir.name.replace(['\n', '\r'], " "));
    }
    let _ = writeln!(
        out,
        "\\ {} variables, {} constraints",
        ir.num_vars(),
        ir.constraints().count()
    );
    out.push_str("Minimize\n obj:");
    for (k, &(v, c)) in ir.objective.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n     ");
        }
        let sep = if k == 0 { " " } else { " + " };
        let _ = write!(out, "{sep}{c} {}", ir.var_name(v));
    }
    out.push_str("\nSubject To\n");
    for c in ir.constraints() {
        let _ = write!(out, " {}:", c.name);
        for (k, &v) in c.vars.iter().enumerate() {
            if k > 0 && k % TERMS_PER_LINE == 0 {
                out.push_str("\n    ");
            }
            let sep = if k == 0 { " " } else { " + " };
            let _ = write!(out, "{sep}{}", ir.var_name(v));
        }
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("Binary\n");
    for v in 0..ir.num_vars() {
        out.push(' ');
        out.push_str(&ir.var_name(v));
        if v % TERMS_PER_LINE == TERMS_PER_LINE - 1 || v + 1 == ir.num_vars() {
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

/// Total cost of a permutation.
pub fn evaluate(inst: &Instance, assignment: &[usize]) -> Result<i64, ModelError> {
    ensure_permutation(assignment, inst.n())?;
    Ok(assignment.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum())
}

/// Outcome of checking an arbitrary integer vector against the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub is_perfect_matching: bool,
    /// Left nodes without a valid partner (entry out of `0..n`, or missing).
    pub violated_rows: Vec<usize>,
    /// Right nodes covered zero times or more than once.
    pub violated_cols: Vec<usize>,
    pub violated_conflicts: Vec<ConflictPair>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.is_perfect_matching
            && self.violated_rows.is_empty()
            && self.violated_cols.is_empty()
            && self.violated_conflicts.is_empty()
    }
}

/// Diagnoses a candidate. Accepts non-permutations and reports what is broken.
pub fn check_feasible(inst: &Instance, assignment: &[i64]) -> FeasibilityReport {
    let n = inst.n();
    let mut violated_rows = Vec::new();
    let mut cover = vec![0usize; n];
    let mut selected: Vec<Option<usize>> = vec![None; n];
    for (i, sel) in selected.iter_mut().enumerate() {
        match assignment.get(i).copied() {
            Some(j) if j >= 0 && (j as u64) < n as u64 => {
                cover[j as usize] += 1;
                *sel = Some(j as usize);
            }
            _ => violated_rows.push(i),
        }
    }
    let violated_cols: Vec<usize> = (0..n).filter(|&j| cover[j] != 1).collect();
    let violated_conflicts = inst
        .conflicts()
        .iter()
        .filter(|p| p.edges().iter().all(|e| selected[e.a] == Some(e.b)))
        .copied()
        .collect();
    FeasibilityReport {
        is_perfect_matching: assignment.len() == n && violated_rows.is_empty() && violated_cols.is_empty(),
        violated_rows,
        violated_cols,
        violated_conflicts,
    }
}

/// [`check_feasible`] for a `usize` assignment.
pub fn check_assignment(inst: &Instance, assignment: &[usize]) -> FeasibilityReport {
    let as_i64: Vec<i64> = assignment.iter().map(|&j| j as i64).collect();
    check_feasible(inst, &as_i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_instance;

    fn two_by_two(conflicts: Vec<ConflictPair>) -> Instance {
        Instance::new("", 2, vec![vec![1, 2], vec![3, 4]], conflicts).unwrap()
    }

    fn diag_pair() -> ConflictPair {
        ConflictPair::new(Edge::new(0, 0), Edge::new(1, 1)).unwrap()
    }

    #[test]
    fn model_counts() {
        let one = Instance::new("", 1, vec![vec![7]], vec![]).unwrap();
        let ir = build_model(&one);
        assert_eq!(ir.num_vars(), 1);
        assert_eq!(ir.objective, vec![(0, 7)]);
        assert_eq!(ir.row_constraints.len() + ir.col_constraints.len(), 2);
        assert!(ir.conflict_constraints.is_empty());

        let ir = build_model(&two_by_two(vec![diag_pair()]));
        assert_eq!(
            (ir.num_vars(), ir.row_constraints.len() + ir.col_constraints.len()),
            (4, 4)
        );
        assert_eq!(ir.conflict_constraints.len(), 1);
    }

    #[test]
    fn generated_model_counts_match_independent_tally() {
        let inst = generate_instance(15, 5000, 1, 100, 2).unwrap();
        let ir = build_model(&inst);
        // Tally from the text rather than the IR vectors.
        let lp = export_lp(&ir);
        let body = lp
            .split("Subject To\n")
            .nth(1)
            .unwrap()
            .split("Binary\n")
            .next()
            .unwrap();
        let eqs = body
            .lines()
            .filter(|l| l.trim_end().ends_with("= 1") && !l.contains("<="))
            .count();
        let les = body.lines().filter(|l| l.trim_end().ends_with("<= 1")).count();
        assert_eq!((ir.num_vars(), eqs, les), (225, 30, 5000));
    }

    #[test]
    fn every_variable_in_one_row_and_one_column() {
        let inst = generate_instance(5, 20, 1, 9, 4).unwrap();
        let ir = build_model(&inst);
        let mut rows = vec![0; ir.num_vars()];
        let mut cols = vec![0; ir.num_vars()];
        ir.row_constraints
            .iter()
            .flat_map(|c| &c.vars)
            .for_each(|&v| rows[v] += 1);
        ir.col_constraints
            .iter()
            .flat_map(|c| &c.vars)
            .for_each(|&v| cols[v] += 1);
        assert!(rows.iter().chain(&cols).all(|&k| k == 1));
        for v in 0..ir.num_vars() {
            assert_eq!(ir.var_of(ir.edge_of(v)), v);
        }
    }

    #[test]
    fn lp_for_single_variable() {
        let one = Instance::new("", 1, vec![vec![7]], vec![]).unwrap();
        let lp = export_lp(&build_model(&one));
        assert!(lp.contains("obj: 7 x_0_0\n"));
        assert!(lp.contains(" row_0: x_0_0 = 1\n"));
        assert!(lp.contains(" col_0: x_0_0 = 1\n"));
        assert!(lp.contains("Binary\n x_0_0\nEnd\n"));
    }

    #[test]
    fn lp_conflict_row_and_determinism() {
        let ir = build_model(&two_by_two(vec![diag_pair()]));
        let lp = export_lp(&ir);
        assert!(lp.contains(" conflict_0: x_0_0 + x_1_1 <= 1\n"));
        assert_eq!(lp, export_lp(&ir));
        let lines: Vec<&str> = lp.lines().collect();
        let minimize = lines.iter().position(|l| *l == "Minimize").unwrap();
        let subject = lines.iter().position(|l| *l == "Subject To").unwrap();
        let binary = lines.iter().position(|l| *l == "Binary").unwrap();
        assert!(minimize < subject && subject < binary && lines.last() == Some(&"End"));
    }

    #[test]
    fn evaluate_examples() {
        let inst = two_by_two(vec![]);
        assert_eq!(evaluate(&inst, &[0, 1]), Ok(5));
        assert_eq!(evaluate(&inst, &[1, 0]), Ok(5));
        assert_eq!(evaluate(&inst, &[0, 0]), Err(ModelError::NotAPermutation { n: 2 }));
        assert_eq!(evaluate(&inst, &[0]), Err(ModelError::NotAPermutation { n: 2 }));
        assert_eq!(evaluate(&inst, &[0, 2]), Err(ModelError::NotAPermutation { n: 2 }));
        let zero = Instance::new("", 3, vec![vec![0; 3]; 3], vec![]).unwrap();
        assert_eq!(evaluate(&zero, &[2, 0, 1]), Ok(0));
    }

    #[test]
    fn feasibility_examples() {
        let inst = two_by_two(vec![diag_pair()]);
        let r = check_feasible(&inst, &[0, 1]);
        assert!(r.is_perfect_matching);
        assert_eq!(r.violated_conflicts, vec![diag_pair()]);
        assert!(!r.is_feasible());

        assert!(check_feasible(&inst, &[1, 0]).is_feasible());

        let r = check_feasible(&inst, &[0, 0]);
        assert!(!r.is_perfect_matching);
        assert_eq!(r.violated_cols, vec![0, 1]);
        assert!(r.violated_rows.is_empty());

        let r = check_feasible(&inst, &[-3, 7]);
        assert_eq!(r.violated_rows, vec![0, 1]);
        assert!(!r.is_feasible());

        let r = check_feasible(&inst, &[1]);
        assert_eq!(r.violated_rows, vec![1]);
        assert!(!r.is_perfect_matching);
    }
}
