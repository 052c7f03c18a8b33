//! APC instances: edges, conflict pairs, the text format and the random generator.
//!
//! An instance is a complete bipartite graph with `n` nodes per side, an
//! `n x n` matrix of non-negative integer costs and a set of conflict pairs.
//! Edge `(a, b)` joins left node `a` to right node `b`.

use std::collections::HashSet;
use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// One candidate assignment: left node `a` to right node `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    #[inline]
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Row-major index in an `n x n` matrix. Preserves lexicographic order.
    #[inline]
    pub const fn index(self, n: usize) -> usize {
        self.a * n + self.b
    }

    #[inline]
    pub const fn from_index(index: usize, n: usize) -> Self {
        Self {
            a: index / n,
            b: index % n,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// An unordered pair of distinct edges that may not both be selected.
///
/// The edges are kept in lexicographic order, so `{e1, e2}` and `{e2, e1}`
/// build the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictPair {
    e1: Edge,
    e2: Edge,
}

impl ConflictPair {
    pub fn new(e1: Edge, e2: Edge) -> Result<Self, DegenerateConflict> {
        if e1 == e2 {
            return Err(DegenerateConflict(e1));
        }
        Ok(Self::new_unchecked(e1, e2))
    }

    /// Canonicalizes but accepts `e1 == e2`. Only useful for building
    /// candidates that are later passed through [`validate`].
    pub fn new_unchecked(e1: Edge, e2: Edge) -> Self {
        if e2 < e1 {
            Self { e1: e2, e2: e1 }
        } else {
            Self { e1, e2 }
        }
    }

    #[inline]
    pub fn first(&self) -> Edge {
        self.e1
    }

    #[inline]
    pub fn second(&self) -> Edge {
        self.e2
    }

    #[inline]
    pub fn edges(&self) -> [Edge; 2] {
        [self.e1, self.e2]
    }

    /// True when the assignment selects both edges.
    #[inline]
    pub fn is_violated_by(&self, assignment: &[usize]) -> bool {
        assignment.get(self.e1.a) == Some(&self.e1.b) && assignment.get(self.e2.a) == Some(&self.e2.b)
    }
}

impl fmt::Display for ConflictPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.e1, self.e2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("conflict pair joins edge {0} with itself")]
pub struct DegenerateConflict(pub Edge);

/// A single broken instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroSize,
    InvalidName,
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NegativeCost {
        row: usize,
        col: usize,
    },
    /// `n * max_cost` leaves too little headroom for exact 64-bit arithmetic.
    CostOverflow {
        max_cost: i64,
    },
    IndexOutOfRange {
        conflict: usize,
        edge: Edge,
    },
    DegenerateConflict {
        conflict: usize,
    },
    DuplicateConflict {
        conflict: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroSize => write!(f, "instance size must be positive"),
            Violation::InvalidName => write!(f, "instance name must be a single line without surrounding whitespace"),
            Violation::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} cost entries, found {found}")
            }
            Violation::NegativeCost { row, col } => write!(f, "negative cost at ({row},{col})"),
            Violation::CostOverflow { max_cost } => {
                write!(f, "maximum cost {max_cost} overflows 64-bit sums")
            }
            Violation::IndexOutOfRange { conflict, edge } => {
                write!(f, "conflict #{conflict} references out-of-range edge {edge}")
            }
            Violation::DegenerateConflict { conflict } => {
                write!(f, "conflict #{conflict} pairs an edge with itself")
            }
            Violation::DuplicateConflict { conflict } => write!(f, "conflict #{conflict} is a duplicate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{requested} conflicts requested but only {available} distinct pairs exist")]
    TooManyConflicts { requested: u64, available: u64 },
    #[error("cost range [{lo}, {hi}] is empty or negative")]
    InvalidCostRange { lo: i64, hi: i64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Problem data. Immutable once built.
///
/// Costs are stored row-major. Conflicts are kept sorted in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    n: usize,
    costs: Vec<i64>,
    conflicts: Vec<ConflictPair>,
}

impl Instance {
    /// Builds and validates an instance. Conflicts are sorted; duplicates
    /// are rejected, not merged.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        costs: Vec<Vec<i64>>,
        conflicts: Vec<ConflictPair>,
    ) -> Result<Self, InstanceError> {
        let inst = Self::new_unchecked(name, n, costs, conflicts);
        let violations = validate(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(InstanceError::Invalid(violations))
        }
    }

    /// Builds an instance without checking invariants. Conflicts are still
    /// sorted so that [`validate`] can spot duplicates.
    pub fn new_unchecked(
        name: impl Into<String>,
        n: usize,
        costs: Vec<Vec<i64>>,
        mut conflicts: Vec<ConflictPair>,
    ) -> Self {
        conflicts.sort_unstable();
        Self {
            name: name.into(),
            n,
            costs: costs.into_iter().flatten().collect(),
            conflicts,
        }
    }

    fn from_flat(name: String, n: usize, costs: Vec<i64>, conflicts: Vec<ConflictPair>) -> Self {
        debug_assert!(conflicts.windows(2).all(|w| w[0] < w[1]));
        Self {
            name,
            n,
            costs,
            conflicts,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Replaces the name. Line breaks become spaces and surrounding
    /// whitespace is trimmed, so the name always survives the text format.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into().replace(['\n', '\r'], " ").trim().to_string();
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cost(&self, a: usize, b: usize) -> i64 {
        self.costs[a * self.n + b]
    }

    #[inline]
    pub fn edge_cost(&self, e: Edge) -> i64 {
        self.cost(e.a, e.b)
    }

    pub fn row(&self, a: usize) -> &[i64] {
        &self.costs[a * self.n..(a + 1) * self.n]
    }

    /// Row-major cost matrix.
    pub fn costs(&self) -> &[i64] {
        &self.costs
    }

    pub fn cost_rows(&self) -> impl Iterator<Item = &[i64]> {
        self.costs.chunks(self.n.max(1))
    }

    pub fn conflicts(&self) -> &[ConflictPair] {
        &self.conflicts
    }

    pub fn max_cost(&self) -> i64 {
        self.costs.iter().copied().max().unwrap_or(0)
    }
}

/// Largest allowed `n * max_cost`. The quarter-range leaves room for dual
/// potentials in the assignment solver.
pub const COST_SUM_LIMIT: i64 = i64::MAX / 4;

/// Checks every instance invariant and reports each violation.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.n;
    if n == 0 {
        out.push(Violation::ZeroSize);
    }
    if inst.name.contains(['\n', '\r']) || inst.name.trim() != inst.name {
        out.push(Violation::InvalidName);
    }
    let expected = n.saturating_mul(n);
    if inst.costs.len() != expected {
        out.push(Violation::DimensionMismatch {
            expected,
            found: inst.costs.len(),
        });
    } else {
        for (idx, &c) in inst.costs.iter().enumerate() {
            if c < 0 {
                out.push(Violation::NegativeCost {
                    row: idx / n,
                    col: idx % n,
                });
            }
        }
        let max_cost = inst.max_cost();
        if max_cost > 0 && (max_cost as i128) * (n as i128) > COST_SUM_LIMIT as i128 {
            out.push(Violation::CostOverflow { max_cost });
        }
    }
    let mut seen = HashSet::with_capacity(inst.conflicts.len());
    for (idx, pair) in inst.conflicts.iter().enumerate() {
        for e in pair.edges() {
            if e.a >= n || e.b >= n {
                out.push(Violation::IndexOutOfRange { conflict: idx, edge: e });
                break;
            }
        }
        if pair.e1 == pair.e2 {
            out.push(Violation::DegenerateConflict { conflict: idx });
        }
        if !seen.insert(*pair) {
            out.push(Violation::DuplicateConflict { conflict: idx });
        }
    }
    out
}

/// Adjacency view of the conflict set: for each edge, the edges it conflicts with.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    n: usize,
    offsets: Vec<usize>,
    partners: Vec<Edge>,
}

impl ConflictGraph {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.n();
        let edges = n * n;
        let mut degree = vec![0usize; edges + 1];
        for pair in inst.conflicts() {
            degree[pair.e1.index(n)] += 1;
            degree[pair.e2.index(n)] += 1;
        }
        let mut offsets = Vec::with_capacity(edges + 1);
        let mut acc = 0;
        for d in &degree[..edges] {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut fill = offsets.clone();
        let mut partners = vec![Edge::new(0, 0); acc];
        // Conflicts are sorted, so each partner list comes out sorted too.
        for pair in inst.conflicts() {
            let (i, j) = (pair.e1.index(n), pair.e2.index(n));
            partners[fill[i]] = pair.e2;
            fill[i] += 1;
            partners[fill[j]] = pair.e1;
            fill[j] += 1;
        }
        for e in 0..edges {
            partners[offsets[e]..offsets[e + 1]].sort_unstable();
        }
        Self { n, offsets, partners }
    }

    #[inline]
    pub fn partners(&self, e: Edge) -> &[Edge] {
        let i = e.index(self.n);
        &self.partners[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn conflicting(&self, e: Edge, f: Edge) -> bool {
        self.partners(e).binary_search(&f).is_ok()
    }

    /// True when `e` conflicts with an edge currently selected by `assignment`.
    /// Rows listed in `skip_rows` are ignored.
    pub fn clashes_with(&self, e: Edge, assignment: &[usize], skip_rows: &[usize]) -> bool {
        self.partners(e)
            .iter()
            .any(|p| !skip_rows.contains(&p.a) && assignment[p.a] == p.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: invalid integer `{token}`")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: expected {expected} cost entries, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: negative cost at ({row},{col})")]
    NegativeCost { line: usize, row: usize, col: usize },
    #[error("line {line}: edge {edge} is out of range")]
    IndexOutOfRange { line: usize, edge: Edge },
    #[error("line {line}: conflict pairs edge {edge} with itself")]
    DegenerateConflict { line: usize, edge: Edge },
    #[error("line {line}: duplicate conflict {pair}")]
    DuplicateConflict { line: usize, pair: ConflictPair },
    #[error("expected {expected} conflict lines, found {found}")]
    ConflictCountMismatch { expected: usize, found: usize },
    #[error("line {line}: unexpected content after the conflict list")]
    TrailingContent { line: usize },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

const MAGIC: &str = "APC";
const VERSION: &str = "1";
const NAME_TAG: &str = "# name:";

/// Parses the line-oriented APC text format.
///
/// A comment of the form `# name: <id>` carries the instance name; every
/// other comment is ignored.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut name = String::new();
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix(NAME_TAG) {
            if name.is_empty() {
                name = rest.trim().to_string();
            }
            return None;
        }
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    });

    let (ln, magic) = header(&mut lines, "APC 1")?;
    let toks: Vec<&str> = magic.split_whitespace().collect();
    if toks != [MAGIC, VERSION] {
        return Err(ParseError::MalformedHeader {
            line: ln,
            reason: format!("expected `{MAGIC} {VERSION}`, got `{magic}`"),
        });
    }

    let (ln, size) = header(&mut lines, "n")?;
    let n = keyword_value(ln, size, "n")?;
    if n == 0 {
        return Err(ParseError::MalformedHeader {
            line: ln,
            reason: "n must be positive".into(),
        });
    }

    let (ln, costs_kw) = header(&mut lines, "costs")?;
    if costs_kw != "costs" {
        return Err(ParseError::MalformedHeader {
            line: ln,
            reason: format!("expected `costs`, got `{costs_kw}`"),
        });
    }

    let mut costs = Vec::with_capacity(n * n);
    let mut rows_read = 0;
    let conflicts_line = loop {
        let Some((ln, line)) = lines.next() else {
            return Err(ParseError::DimensionMismatch {
                line: 0,
                expected: n * n,
                found: costs.len(),
            });
        };
        if line.starts_with("conflicts") {
            if rows_read != n {
                return Err(ParseError::DimensionMismatch {
                    line: ln,
                    expected: n * n,
                    found: costs.len(),
                });
            }
            break (ln, line);
        }
        if rows_read == n {
            return Err(ParseError::DimensionMismatch {
                line: ln,
                expected: n * n,
                found: costs.len() + line.split_whitespace().count(),
            });
        }
        let before = costs.len();
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| ParseError::InvalidNumber {
                line: ln,
                token: tok.to_string(),
            })?;
            let col = costs.len() - before;
            if v < 0 {
                return Err(ParseError::NegativeCost {
                    line: ln,
                    row: rows_read,
                    col,
                });
            }
            costs.push(v);
        }
        if costs.len() - before != n {
            return Err(ParseError::DimensionMismatch {
                line: ln,
                expected: n,
                found: costs.len() - before,
            });
        }
        rows_read += 1;
    };

    let (ln, line) = conflicts_line;
    let m = keyword_value(ln, line, "conflicts")?;
    let mut conflicts = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    for read in 0..m {
        let Some((ln, line)) = lines.next() else {
            return Err(ParseError::ConflictCountMismatch {
                expected: m,
                found: read,
            });
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(ParseError::MalformedHeader {
                line: ln,
                reason: format!("conflict lines need 4 indices, got {}", toks.len()),
            });
        }
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks) {
            *slot = tok.parse().map_err(|_| ParseError::InvalidNumber {
                line: ln,
                token: tok.to_string(),
            })?;
        }
        let e1 = Edge::new(idx[0], idx[1]);
        let e2 = Edge::new(idx[2], idx[3]);
        for e in [e1, e2] {
            if e.a >= n || e.b >= n {
                return Err(ParseError::IndexOutOfRange { line: ln, edge: e });
            }
        }
        let pair = ConflictPair::new(e1, e2).map_err(|d| ParseError::DegenerateConflict { line: ln, edge: d.0 })?;
        if !seen.insert(pair) {
            return Err(ParseError::DuplicateConflict { line: ln, pair });
        }
        conflicts.push(pair);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(ParseError::TrailingContent { line: ln });
    }
    drop(lines);

    conflicts.sort_unstable();
    let inst = Instance::from_flat(name, n, costs, conflicts);
    let violations = validate(&inst);
    if !violations.is_empty() {
        return Err(InstanceError::Invalid(violations).into());
    }
    Ok(inst)
}

fn header<'t>(lines: &mut impl Iterator<Item = (usize, &'t str)>, what: &str) -> Result<(usize, &'t str), ParseError> {
    lines.next().ok_or_else(|| ParseError::MalformedHeader {
        line: 0,
        reason: format!("missing `{what}` line"),
    })
}

fn keyword_value(ln: usize, line: &str, keyword: &str) -> Result<usize, ParseError> {
    let mut toks = line.split_whitespace();
    match (toks.next(), toks.next(), toks.next()) {
        (Some(k), Some(v), None) if k == keyword => v.parse().map_err(|_| ParseError::InvalidNumber {
            line: ln,
            token: v.to_string(),
        }),
        _ => Err(ParseError::MalformedHeader {
            line: ln,
            reason: format!("expected `{keyword} <count>`, got `{line}`"),
        }),
    }
}

/// Writes the canonical text form. The output parses back to an equal instance.
pub fn write_instance(inst: &Instance) -> String {
    use std::fmt::Write;

    let n = inst.n();
    let mut out = String::with_capacity(n * n * 4 + inst.conflicts().len() * 12 + 64);
    out.push_str("APC 1\n");
    if !inst.name().is_empty() {
        let _ = writeln!(out, "{NAME_TAG} {}", inst.name());
    }
    let _ = writeln!(out, "n {n}");
    out.push_str("costs\n");
    for row in inst.cost_rows() {
        let mut first = true;
        for c in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{c}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "conflicts {}", inst.conflicts().len());
    for p in inst.conflicts() {
        let _ = writeln!(out, "{} {} {} {}", p.e1.a, p.e1.b, p.e2.a, p.e2.b);
    }
    out
}

/// Number of unordered pairs of distinct edges in an `n x n` instance.
pub fn max_conflicts(n: usize) -> u64 {
    let edges = (n as u64) * (n as u64);
    edges * edges.saturating_sub(1) / 2
}

/// Maps a rank in `0..max_conflicts(n)` to a canonical pair.
///
/// Pairs `(p, q)` of edge indices with `p < q` are ranked in colex order:
/// `rank = q (q - 1) / 2 + p`.
fn unrank_pair(rank: u64, n: usize) -> ConflictPair {
    // Float estimate, then fix up with exact integer checks.
    let mut q = ((1.0 + (1.0 + 8.0 * rank as f64).sqrt()) / 2.0) as u64;
    while q * (q - 1) / 2 > rank {
        q -= 1;
    }
    while (q + 1) * q / 2 <= rank {
        q += 1;
    }
    let p = rank - q * (q - 1) / 2;
    ConflictPair {
        e1: Edge::from_index(p as usize, n),
        e2: Edge::from_index(q as usize, n),
    }
}

/// Random instance: uniform integer costs in `[cost_lo, cost_hi]` and `m`
/// distinct conflict pairs drawn uniformly without replacement.
///
/// Uses ChaCha8 seeded from `seed`, so the output is identical on every
/// platform.
pub fn generate_instance(n: usize, m: u64, cost_lo: i64, cost_hi: i64, seed: u64) -> Result<Instance, InstanceError> {
    if n == 0 {
        return Err(InstanceError::Invalid(vec![Violation::ZeroSize]));
    }
    if cost_lo < 0 || cost_hi < cost_lo {
        return Err(InstanceError::InvalidCostRange {
            lo: cost_lo,
            hi: cost_hi,
        });
    }
    let available = max_conflicts(n);
    if m > available {
        return Err(InstanceError::TooManyConflicts {
            requested: m,
            available,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<i64> = (0..n * n).map(|_| rng.random_range(cost_lo..=cost_hi)).collect();

    // Floyd's sampling: exactly m draws, uniform over m-subsets.
    let mut chosen: HashSet<u64> = HashSet::with_capacity(m as usize);
    let mut ranks = Vec::with_capacity(m as usize);
    for j in (available - m)..available {
        let t = rng.random_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        ranks.push(pick);
    }
    let mut conflicts: Vec<ConflictPair> = ranks.into_iter().map(|r| unrank_pair(r, n)).collect();
    conflicts.sort_unstable();

    let inst = Instance::from_flat(format!("apc_n{n}_m{m}_s{seed}"), n, costs, conflicts);
    let violations = validate(&inst);
    if !violations.is_empty() {
        return Err(InstanceError::Invalid(violations));
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_BY_ONE: &str = "APC 1\nn 1\ncosts\n7\nconflicts 0\n";

    fn pair(a1: usize, b1: usize, a2: usize, b2: usize) -> ConflictPair {
        ConflictPair::new(Edge::new(a1, b1), Edge::new(a2, b2)).unwrap()
    }

    #[test]
    fn parses_smallest_instance() {
        let inst = parse_instance(ONE_BY_ONE).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.costs(), &[7]);
        assert!(inst.conflicts().is_empty());
    }

    #[test]
    fn writes_smallest_instance_byte_identical() {
        let inst = Instance::new("", 1, vec![vec![7]], vec![]).unwrap();
        assert_eq!(write_instance(&inst), ONE_BY_ONE);
    }

    #[test]
    fn parses_single_conflict() {
        let text = "APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 1\n0 0 1 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.conflicts(), &[pair(0, 0, 1, 1)]);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# leading\nAPC 1\n\nn 2\n# mid\ncosts\n1 2\n\n3 4\nconflicts 1\n# x\n1 1 0 0\n\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.conflicts(), &[pair(0, 0, 1, 1)]);
        assert_eq!(inst.cost(1, 0), 3);
    }

    #[test]
    fn name_comment_round_trips() {
        let inst = Instance::new("group 15/5000 #3", 1, vec![vec![7]], vec![]).unwrap();
        let text = write_instance(&inst);
        assert!(text.contains("# name: group 15/5000 #3"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn names_are_single_trimmed_lines() {
        let inst = Instance::new("", 1, vec![vec![7]], vec![])
            .unwrap()
            .with_name("  two\nlines ");
        assert_eq!(inst.name(), "two lines");
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
        let err = Instance::new(" padded", 1, vec![vec![7]], vec![]).unwrap_err();
        assert!(matches!(err, InstanceError::Invalid(v) if v == vec![Violation::InvalidName]));
    }

    #[test]
    fn rejects_degenerate_conflict() {
        let text = "APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 1\n0 0 0 0\n";
        assert!(matches!(
            parse_instance(text),
            Err(ParseError::DegenerateConflict { line: 7, .. })
        ));
    }

    #[test]
    fn rejects_duplicate_conflict_even_if_reordered() {
        let text = "APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 2\n0 0 1 1\n1 1 0 0\n";
        assert!(matches!(
            parse_instance(text),
            Err(ParseError::DuplicateConflict { line: 8, .. })
        ));
    }

    #[test]
    fn parse_error_paths() {
        type Expect = fn(&ParseError) -> bool;
        let cases: &[(&str, Expect)] = &[
            ("APC 2\nn 1\ncosts\n7\nconflicts 0\n", |e| {
                matches!(e, ParseError::MalformedHeader { .. })
            }),
            ("", |e| matches!(e, ParseError::MalformedHeader { .. })),
            ("APC 1\nn 0\ncosts\nconflicts 0\n", |e| {
                matches!(e, ParseError::MalformedHeader { .. })
            }),
            ("APC 1\nsize 1\ncosts\n7\nconflicts 0\n", |e| {
                matches!(e, ParseError::MalformedHeader { .. })
            }),
            ("APC 1\nn 2\ncosts\n1 2\nconflicts 0\n", |e| {
                matches!(e, ParseError::DimensionMismatch { .. })
            }),
            ("APC 1\nn 2\ncosts\n1 2 3\n4\nconflicts 0\n", |e| {
                matches!(e, ParseError::DimensionMismatch { .. })
            }),
            ("APC 1\nn 1\ncosts\n7\n8\nconflicts 0\n", |e| {
                matches!(e, ParseError::DimensionMismatch { .. })
            }),
            ("APC 1\nn 1\ncosts\n7\n", |e| {
                matches!(e, ParseError::DimensionMismatch { .. })
            }),
            ("APC 1\nn 1\ncosts\n-7\nconflicts 0\n", |e| {
                matches!(e, ParseError::NegativeCost { row: 0, col: 0, .. })
            }),
            ("APC 1\nn 1\ncosts\nx\nconflicts 0\n", |e| {
                matches!(e, ParseError::InvalidNumber { .. })
            }),
            ("APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 1\n0 0 2 1\n", |e| {
                matches!(e, ParseError::IndexOutOfRange { .. })
            }),
            ("APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 2\n0 0 1 1\n", |e| {
                matches!(e, ParseError::ConflictCountMismatch { expected: 2, found: 1 })
            }),
            ("APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 1\n0 0 1\n", |e| {
                matches!(e, ParseError::MalformedHeader { .. })
            }),
            ("APC 1\nn 2\ncosts\n1 2\n3 4\nconflicts 0\n0 0 1 1\n", |e| {
                matches!(e, ParseError::TrailingContent { .. })
            }),
        ];
        for (text, check) in cases {
            let err = parse_instance(text).expect_err(text);
            assert!(check(&err), "{text:?} gave {err:?}");
        }
    }

    #[test]
    fn writer_emits_canonical_edge_order() {
        let c = ConflictPair::new(Edge::new(1, 1), Edge::new(0, 0)).unwrap();
        let inst = Instance::new("", 2, vec![vec![0, 0], vec![0, 0]], vec![c]).unwrap();
        assert!(write_instance(&inst).ends_with("conflicts 1\n0 0 1 1\n"));
    }

    #[test]
    fn canonicalization_is_symmetric() {
        let (e, f) = (Edge::new(2, 0), Edge::new(0, 3));
        assert_eq!(ConflictPair::new(e, f), ConflictPair::new(f, e));
        assert_eq!(ConflictPair::new(e, f).unwrap().first(), f);
    }

    #[test]
    fn validate_reports_each_violation() {
        let ok = generate_instance(4, 10, 1, 9, 3).unwrap();
        assert!(validate(&ok).is_empty());

        let neg = Instance::new_unchecked("", 2, vec![vec![-1, 0], vec![0, 0]], vec![]);
        assert_eq!(validate(&neg), vec![Violation::NegativeCost { row: 0, col: 0 }]);

        let oob = Instance::new_unchecked("", 3, vec![vec![0; 3]; 3], vec![pair(5, 0, 0, 0)]);
        assert!(matches!(
            validate(&oob)[..],
            [Violation::IndexOutOfRange { conflict: 0, .. }]
        ));

        let degenerate = ConflictPair::new_unchecked(Edge::new(0, 0), Edge::new(0, 0));
        let dup = Instance::new_unchecked(
            "",
            2,
            vec![vec![0; 2]; 2],
            vec![pair(0, 0, 1, 1), pair(1, 1, 0, 0), degenerate],
        );
        let v = validate(&dup);
        assert!(v.contains(&Violation::DegenerateConflict { conflict: 0 }));
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateConflict { .. })));

        let ragged = Instance::new_unchecked("", 2, vec![vec![0, 0], vec![0]], vec![]);
        assert_eq!(
            validate(&ragged),
            vec![Violation::DimensionMismatch { expected: 4, found: 3 }]
        );

        let huge = Instance::new_unchecked("", 2, vec![vec![i64::MAX / 4, 0], vec![0, 0]], vec![]);
        assert!(matches!(validate(&huge)[..], [Violation::CostOverflow { .. }]));
    }

    #[test]
    fn generator_degenerate_ranges() {
        for seed in [0, 1, u64::MAX] {
            let g = generate_instance(2, 0, 0, 0, seed).unwrap();
            assert_eq!(g.costs(), &[0, 0, 0, 0]);
            assert!(g.conflicts().is_empty());
        }
    }

    #[test]
    fn generator_full_conflict_set() {
        // Enumerate all unordered pairs of the 9 edges independently.
        let mut all = Vec::new();
        for p in 0..9 {
            for q in p + 1..9 {
                all.push(pair(p / 3, p % 3, q / 3, q % 3));
            }
        }
        assert_eq!(all.len(), 36);
        let g = generate_instance(3, 36, 1, 9, 11).unwrap();
        assert_eq!(g.conflicts(), &all[..]);
        assert!(matches!(
            generate_instance(3, 37, 1, 9, 11),
            Err(InstanceError::TooManyConflicts {
                requested: 37,
                available: 36
            })
        ));
    }

    #[test]
    fn generator_table1_first_group() {
        let g = generate_instance(15, 5000, 1, 100, 1).unwrap();
        assert_eq!(g.n(), 15);
        assert_eq!(g.conflicts().len(), 5000);
        assert!(g.costs().iter().all(|&c| (1..=100).contains(&c)));
    }

    #[test]
    fn generator_rejects_bad_ranges() {
        assert!(generate_instance(3, 0, 5, 4, 0).is_err());
        assert!(generate_instance(3, 0, -1, 4, 0).is_err());
        assert!(generate_instance(0, 0, 1, 4, 0).is_err());
    }

    #[test]
    fn unrank_covers_all_pairs_once() {
        let n = 3;
        let total = max_conflicts(n);
        let pairs: HashSet<_> = (0..total).map(|r| unrank_pair(r, n)).collect();
        assert_eq!(pairs.len() as u64, total);
        // Large ranks near the top of the range for n = 500.
        let top = max_conflicts(500) - 1;
        let p = unrank_pair(top, 500);
        assert_eq!(p.first(), Edge::new(499, 498));
        assert_eq!(p.second(), Edge::new(499, 499));
    }

    #[test]
    fn conflict_graph_lists_partners() {
        let inst = Instance::new(
            "",
            2,
            vec![vec![0; 2]; 2],
            vec![pair(0, 0, 1, 1), pair(0, 0, 0, 1), pair(1, 0, 1, 1)],
        )
        .unwrap();
        let g = ConflictGraph::new(&inst);
        assert_eq!(g.partners(Edge::new(0, 0)), &[Edge::new(0, 1), Edge::new(1, 1)]);
        assert_eq!(g.partners(Edge::new(1, 1)), &[Edge::new(0, 0), Edge::new(1, 0)]);
        assert!(g.conflicting(Edge::new(1, 0), Edge::new(1, 1)));
        assert!(!g.conflicting(Edge::new(1, 0), Edge::new(0, 1)));
        assert!(g.clashes_with(Edge::new(0, 0), &[0, 1], &[]));
        assert!(!g.clashes_with(Edge::new(0, 0), &[0, 1], &[1]));
    }
}
