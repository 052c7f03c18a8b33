use std::fmt;
use std::str::FromStr;

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// Proven minimum.
    Optimal,
    /// Conflict-feasible, optimality not proven.
    Feasible,
    /// Proven that no conflict-feasible matching exists.
    Infeasible,
    /// Stopped by the clock; the incumbent (if any) is the best found.
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::TimeLimit => "TimeLimit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Optimal" => Ok(SolveStatus::Optimal),
            "Feasible" => Ok(SolveStatus::Feasible),
            "Infeasible" => Ok(SolveStatus::Infeasible),
            "TimeLimit" => Ok(SolveStatus::TimeLimit),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// Result of any solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// `assignment[row] = column`; absent when nothing feasible was found.
    pub assignment: Option<Vec<usize>>,
    pub value: Option<i64>,
    pub status: SolveStatus,
    /// Best proven lower bound on the optimum, when the method produces one.
    pub lower_bound: Option<i64>,
    pub sec_best: f64,
    pub sec_total: f64,
    pub nodes: u64,
}

impl Solution {
    pub fn infeasible(sec_total: f64, nodes: u64) -> Self {
        Self {
            assignment: None,
            value: None,
            status: SolveStatus::Infeasible,
            lower_bound: None,
            sec_best: 0.0,
            sec_total,
            nodes,
        }
    }

    pub fn has_assignment(&self) -> bool {
        self.assignment.is_some()
    }
}

/// The whitespace-separated solution file format: `assignment[i]` at position `i`.
pub fn format_assignment(assignment: &[usize]) -> String {
    assignment.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Reads a solution file. Entries may be any integers; range checks are
/// left to the feasibility checker.
pub fn parse_assignment(text: &str) -> Result<Vec<i64>, String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| format!("invalid integer `{t}` in solution"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_text_round_trip() {
        assert_eq!(format_assignment(&[2, 0, 1]), "2 0 1");
        assert_eq!(parse_assignment("# sol\n2 0\n 1\n"), Ok(vec![2, 0, 1]));
        assert_eq!(parse_assignment("-1 4"), Ok(vec![-1, 4]));
        assert!(parse_assignment("1 x").is_err());
    }

    #[test]
    fn status_names_round_trip() {
        for s in [
            SolveStatus::Optimal,
            SolveStatus::Feasible,
            SolveStatus::Infeasible,
            SolveStatus::TimeLimit,
        ] {
            assert_eq!(s.as_str().parse::<SolveStatus>(), Ok(s));
        }
    }
}
