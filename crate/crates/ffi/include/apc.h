#ifndef APC_H
#define APC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum ApcErrorCode {
  APC_ERROR_CODE_OK = 0,
  APC_ERROR_CODE_NULL_POINTER = 1,
  APC_ERROR_CODE_INVALID_UTF8 = 2,
  APC_ERROR_CODE_PARSE = 3,
  APC_ERROR_CODE_INVALID_ARGUMENT = 4,
  APC_ERROR_CODE_TOO_LARGE = 5,
  APC_ERROR_CODE_NOT_A_PERMUTATION = 6,
  APC_ERROR_CODE_NOT_FOUND = 7,
  APC_ERROR_CODE_PANIC = 8,
} ApcErrorCode;

// Outcome of a solve, mirroring the library status.
typedef enum ApcSolveStatus {
  APC_SOLVE_STATUS_OPTIMAL = 0,
  APC_SOLVE_STATUS_FEASIBLE = 1,
  APC_SOLVE_STATUS_INFEASIBLE = 2,
  APC_SOLVE_STATUS_TIME_LIMIT = 3,
} ApcSolveStatus;

// Opaque instance handle.
typedef struct ApcInstance ApcInstance;

// Opaque solution handle.
typedef struct ApcSolution ApcSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *apc_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void apc_string_free(char *s);

// Parses an instance from its text format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum ApcErrorCode apc_instance_parse(const char *text, struct ApcInstance **out);

// Generates a random instance with costs uniform in `[cost_lo, cost_hi]`.
//
// # Safety
// `out` must be writable.
enum ApcErrorCode apc_instance_generate(size_t n,
                                        uint64_t conflicts,
                                        int64_t cost_lo,
                                        int64_t cost_hi,
                                        uint64_t seed,
                                        struct ApcInstance **out);

// Builds an instance from a row-major `n * n` cost array and
// `conflict_count` pairs stored as `a1 b1 a2 b2` quadruples.
//
// # Safety
// `costs` must hold `n * n` values and `conflicts` `4 * conflict_count`.
enum ApcErrorCode apc_instance_new(size_t n,
                                   const int64_t *costs,
                                   const size_t *conflicts,
                                   size_t conflict_count,
                                   struct ApcInstance **out);

// # Safety
// `inst` must come from this library and not have been freed. Null is ignored.
void apc_instance_free(struct ApcInstance *inst);

// Side size `n`, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t apc_instance_n(const struct ApcInstance *inst);

// Number of conflict pairs, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t apc_instance_conflict_count(const struct ApcInstance *inst);

// Serializes to the instance text format.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum ApcErrorCode apc_instance_write(const struct ApcInstance *inst, char **out);

// Renders the binary program as an LP file.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum ApcErrorCode apc_instance_export_lp(const struct ApcInstance *inst, char **out);

// Cost of a permutation (`assignment[row] = column`), ignoring conflicts.
//
// # Safety
// `assignment` must hold `len` values; `out` must be writable.
enum ApcErrorCode apc_evaluate(const struct ApcInstance *inst,
                               const size_t *assignment,
                               size_t len,
                               int64_t *out);

// Checks an arbitrary integer vector. Writes whether it is a conflict-free
// perfect matching and how many conflict pairs it violates.
//
// # Safety
// `assignment` must hold `len` values; both outputs must be writable.
enum ApcErrorCode apc_check_feasible(const struct ApcInstance *inst,
                                     const int64_t *assignment,
                                     size_t len,
                                     bool *feasible,
                                     size_t *violated_conflicts);

// Branch-and-bound. `node_limit` 0 means unlimited; `incumbent` may be null.
//
// # Safety
// Handles must be live or null where allowed; `out` must be writable.
enum ApcErrorCode apc_solve_exact(const struct ApcInstance *inst,
                                  double time_limit_sec,
                                  uint64_t node_limit,
                                  const struct ApcSolution *incumbent,
                                  struct ApcSolution **out);

// Multi-start greedy plus local search. Returns `NotFound` when no
// conflict-free matching was found.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum ApcErrorCode apc_solve_heuristic(const struct ApcInstance *inst,
                                      uint32_t restarts,
                                      double time_limit_sec,
                                      uint64_t seed,
                                      struct ApcSolution **out);

// Exhaustive enumeration; `n` at most 10.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum ApcErrorCode apc_solve_oracle(const struct ApcInstance *inst, struct ApcSolution **out);

// # Safety
// `sol` must come from this library and not have been freed. Null is ignored.
void apc_solution_free(struct ApcSolution *sol);

// # Safety
// `sol` must be a live handle.
enum ApcSolveStatus apc_solution_status(const struct ApcSolution *sol);

// Writes the objective value and returns true, or returns false when the
// solution has none.
//
// # Safety
// `sol` must be a live handle; `out` must be writable.
bool apc_solution_value(const struct ApcSolution *sol, int64_t *out);

// Like [`apc_solution_value`] for the proven lower bound.
//
// # Safety
// `sol` must be a live handle; `out` must be writable.
bool apc_solution_lower_bound(const struct ApcSolution *sol, int64_t *out);

// # Safety
// `sol` must be a live handle.
uint64_t apc_solution_nodes(const struct ApcSolution *sol);

// # Safety
// `sol` must be a live handle.
double apc_solution_sec_best(const struct ApcSolution *sol);

// # Safety
// `sol` must be a live handle.
double apc_solution_sec_total(const struct ApcSolution *sol);

// Copies up to `cap` entries of the assignment into `buf` and returns the
// full length (0 when there is no assignment). Pass `buf = NULL, cap = 0`
// to query the length.
//
// # Safety
// `sol` must be a live handle; `buf` must hold `cap` writable entries.
size_t apc_solution_assignment(const struct ApcSolution *sol, size_t *buf, size_t cap);

// `100 * (val - opt) / opt`; `opt` must be positive.
//
// # Safety
// `out` must be writable.
enum ApcErrorCode apc_gap_percent(int64_t val, int64_t opt, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APC_H */
