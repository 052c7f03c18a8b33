//! C ABI over `apc-core`.
//!
//! Instances and solutions are opaque heap handles owned by the caller and
//! released with the matching `*_free`. Fallible calls return an
//! [`ApcErrorCode`]; on failure, [`apc_last_error_message`] describes the
//! error for the calling thread. Strings returned through `char **` are
//! released with [`apc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use apc_core::exact::{solve_exact, ExactConfig};
use apc_core::heuristic::{gap_percent, solve_heuristic, LSConfig};
use apc_core::instance::{generate_instance, parse_instance, write_instance, ConflictPair, Edge};
use apc_core::model::{build_model, check_feasible, evaluate, export_lp};
use apc_core::oracle::brute_force;
use apc_core::solution::{Solution, SolveStatus};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApcErrorCode {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    TooLarge = 5,
    NotAPermutation = 6,
    NotFound = 7,
    Panic = 8,
}

/// Outcome of a solve, mirroring the library status.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApcSolveStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
    TimeLimit = 3,
}

impl From<SolveStatus> for ApcSolveStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => ApcSolveStatus::Optimal,
            SolveStatus::Feasible => ApcSolveStatus::Feasible,
            SolveStatus::Infeasible => ApcSolveStatus::Infeasible,
            SolveStatus::TimeLimit => ApcSolveStatus::TimeLimit,
        }
    }
}

/// Opaque instance handle.
pub struct ApcInstance(apc_core::Instance);

/// Opaque solution handle.
pub struct ApcSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (ApcErrorCode, String);

fn fail<T>(code: ApcErrorCode, msg: impl ToString) -> Result<T, Failure> {
    Err((code, msg.to_string()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ApcErrorCode {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ApcErrorCode::Ok
        }
        Ok(Err((code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            ApcErrorCode::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass pointers obtained from this library or valid C objects.
    unsafe { p.as_ref() }.ok_or_else(|| (ApcErrorCode::NullPointer, format!("{what} is null")))
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(ApcErrorCode::NullPointer, "output pointer is null");
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return fail(ApcErrorCode::NullPointer, "output pointer is null");
    }
    let c = CString::new(s).map_err(|e| (ApcErrorCode::InvalidArgument, e.to_string()))?;
    // SAFETY: checked non-null.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(ApcErrorCode::NullPointer, format!("{what} is null"));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn duration(seconds: f64) -> Result<Duration, Failure> {
    if seconds.is_nan() || seconds <= 0.0 || seconds.is_infinite() {
        return fail(ApcErrorCode::InvalidArgument, "time limit must be positive and finite");
    }
    Ok(Duration::from_secs_f64(seconds))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn apc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn apc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_parse(text: *const c_char, out: *mut *mut ApcInstance) -> ApcErrorCode {
    guard(|| {
        if text.is_null() {
            return fail(ApcErrorCode::NullPointer, "text is null");
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (ApcErrorCode::InvalidUtf8, e.to_string()))?;
        let inst = parse_instance(text).map_err(|e| (ApcErrorCode::Parse, e.to_string()))?;
        put(out, ApcInstance(inst))
    })
}

/// Generates a random instance with costs uniform in `[cost_lo, cost_hi]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_generate(
    n: usize,
    conflicts: u64,
    cost_lo: i64,
    cost_hi: i64,
    seed: u64,
    out: *mut *mut ApcInstance,
) -> ApcErrorCode {
    guard(|| {
        let inst = generate_instance(n, conflicts, cost_lo, cost_hi, seed)
            .map_err(|e| (ApcErrorCode::InvalidArgument, e.to_string()))?;
        put(out, ApcInstance(inst))
    })
}

/// Builds an instance from a row-major `n * n` cost array and
/// `conflict_count` pairs stored as `a1 b1 a2 b2` quadruples.
///
/// # Safety
/// `costs` must hold `n * n` values and `conflicts` `4 * conflict_count`.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_new(
    n: usize,
    costs: *const i64,
    conflicts: *const usize,
    conflict_count: usize,
    out: *mut *mut ApcInstance,
) -> ApcErrorCode {
    guard(|| {
        let cells = n
            .checked_mul(n)
            .ok_or_else(|| (ApcErrorCode::InvalidArgument, "n * n overflows".to_string()))?;
        let quads = conflict_count
            .checked_mul(4)
            .ok_or_else(|| (ApcErrorCode::InvalidArgument, "conflict count overflows".to_string()))?;
        let costs = slice(costs, cells, "costs")?;
        let flat = slice(conflicts, quads, "conflicts")?;
        let rows = if n == 0 {
            Vec::new()
        } else {
            costs.chunks(n).map(<[i64]>::to_vec).collect()
        };
        let pairs = flat
            .chunks(4)
            .enumerate()
            .map(|(k, q)| {
                ConflictPair::new(Edge::new(q[0], q[1]), Edge::new(q[2], q[3]))
                    .map_err(|_| (ApcErrorCode::InvalidArgument, format!("conflict {k} repeats an edge")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inst =
            apc_core::Instance::new("", n, rows, pairs).map_err(|e| (ApcErrorCode::InvalidArgument, e.to_string()))?;
        put(out, ApcInstance(inst))
    })
}

/// # Safety
/// `inst` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_free(inst: *mut ApcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Side size `n`, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_n(inst: *const ApcInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// Number of conflict pairs, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_conflict_count(inst: *const ApcInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.conflicts().len())
}

/// Serializes to the instance text format.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_write(inst: *const ApcInstance, out: *mut *mut c_char) -> ApcErrorCode {
    guard(|| put_string(out, write_instance(&non_null(inst, "instance")?.0)))
}

/// Renders the binary program as an LP file.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_instance_export_lp(inst: *const ApcInstance, out: *mut *mut c_char) -> ApcErrorCode {
    guard(|| put_string(out, export_lp(&build_model(&non_null(inst, "instance")?.0))))
}

/// Cost of a permutation (`assignment[row] = column`), ignoring conflicts.
///
/// # Safety
/// `assignment` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_evaluate(
    inst: *const ApcInstance,
    assignment: *const usize,
    len: usize,
    out: *mut i64,
) -> ApcErrorCode {
    guard(|| {
        let inst = &non_null(inst, "instance")?.0;
        let a = slice(assignment, len, "assignment")?;
        let v = evaluate(inst, a).map_err(|e| (ApcErrorCode::NotAPermutation, e.to_string()))?;
        if out.is_null() {
            return fail(ApcErrorCode::NullPointer, "output pointer is null");
        }
        *out = v;
        Ok(())
    })
}

/// Checks an arbitrary integer vector. Writes whether it is a conflict-free
/// perfect matching and how many conflict pairs it violates.
///
/// # Safety
/// `assignment` must hold `len` values; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_check_feasible(
    inst: *const ApcInstance,
    assignment: *const i64,
    len: usize,
    feasible: *mut bool,
    violated_conflicts: *mut usize,
) -> ApcErrorCode {
    guard(|| {
        let inst = &non_null(inst, "instance")?.0;
        let report = check_feasible(inst, slice(assignment, len, "assignment")?);
        if feasible.is_null() || violated_conflicts.is_null() {
            return fail(ApcErrorCode::NullPointer, "output pointer is null");
        }
        *feasible = report.is_feasible();
        *violated_conflicts = report.violated_conflicts.len();
        Ok(())
    })
}

/// Branch-and-bound. `node_limit` 0 means unlimited; `incumbent` may be null.
///
/// # Safety
/// Handles must be live or null where allowed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solve_exact(
    inst: *const ApcInstance,
    time_limit_sec: f64,
    node_limit: u64,
    incumbent: *const ApcSolution,
    out: *mut *mut ApcSolution,
) -> ApcErrorCode {
    guard(|| {
        let inst = &non_null(inst, "instance")?.0;
        let cfg = ExactConfig {
            time_limit: duration(time_limit_sec)?,
            node_limit: (node_limit > 0).then_some(node_limit),
            initial_incumbent: incumbent.as_ref().map(|s| s.0.clone()),
            ..Default::default()
        };
        put(out, ApcSolution(solve_exact(inst, &cfg)))
    })
}

/// Multi-start greedy plus local search. Returns `NotFound` when no
/// conflict-free matching was found.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solve_heuristic(
    inst: *const ApcInstance,
    restarts: u32,
    time_limit_sec: f64,
    seed: u64,
    out: *mut *mut ApcSolution,
) -> ApcErrorCode {
    guard(|| {
        let inst = &non_null(inst, "instance")?.0;
        let cfg = LSConfig {
            restarts,
            time_limit: duration(time_limit_sec)?,
            rng_seed: seed,
            ..Default::default()
        };
        match solve_heuristic(inst, &cfg) {
            Some(s) => put(out, ApcSolution(s)),
            None => fail(ApcErrorCode::NotFound, "no conflict-free matching found"),
        }
    })
}

/// Exhaustive enumeration; `n` at most 10.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solve_oracle(inst: *const ApcInstance, out: *mut *mut ApcSolution) -> ApcErrorCode {
    guard(|| {
        let inst = &non_null(inst, "instance")?.0;
        let sol = brute_force(inst).map_err(|e| (ApcErrorCode::TooLarge, e.to_string()))?;
        put(out, ApcSolution(sol))
    })
}

/// # Safety
/// `sol` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_free(sol: *mut ApcSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_status(sol: *const ApcSolution) -> ApcSolveStatus {
    (*sol).0.status.into()
}

/// Writes the objective value and returns true, or returns false when the
/// solution has none.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_value(sol: *const ApcSolution, out: *mut i64) -> bool {
    match (sol.as_ref().and_then(|s| s.0.value), out.is_null()) {
        (Some(v), false) => {
            *out = v;
            true
        }
        _ => false,
    }
}

/// Like [`apc_solution_value`] for the proven lower bound.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_lower_bound(sol: *const ApcSolution, out: *mut i64) -> bool {
    match (sol.as_ref().and_then(|s| s.0.lower_bound), out.is_null()) {
        (Some(v), false) => {
            *out = v;
            true
        }
        _ => false,
    }
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_nodes(sol: *const ApcSolution) -> u64 {
    (*sol).0.nodes
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_sec_best(sol: *const ApcSolution) -> f64 {
    (*sol).0.sec_best
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_sec_total(sol: *const ApcSolution) -> f64 {
    (*sol).0.sec_total
}

/// Copies up to `cap` entries of the assignment into `buf` and returns the
/// full length (0 when there is no assignment). Pass `buf = NULL, cap = 0`
/// to query the length.
///
/// # Safety
/// `sol` must be a live handle; `buf` must hold `cap` writable entries.
#[no_mangle]
pub unsafe extern "C" fn apc_solution_assignment(sol: *const ApcSolution, buf: *mut usize, cap: usize) -> usize {
    let Some(a) = sol.as_ref().and_then(|s| s.0.assignment.as_deref()) else {
        return 0;
    };
    if !buf.is_null() {
        ptr::copy_nonoverlapping(a.as_ptr(), buf, a.len().min(cap));
    }
    a.len()
}

/// `100 * (val - opt) / opt`; `opt` must be positive.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_gap_percent(val: i64, opt: i64, out: *mut f64) -> ApcErrorCode {
    guard(|| {
        let g = gap_percent(val, opt).map_err(|e| (ApcErrorCode::InvalidArgument, e.to_string()))?;
        if out.is_null() {
            return fail(ApcErrorCode::NullPointer, "output pointer is null");
        }
        *out = g;
        Ok(())
    })
}
