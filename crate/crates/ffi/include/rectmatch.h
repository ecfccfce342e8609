#ifndef RECTMATCH_H
#define RECTMATCH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes. `RM_STATUS_OK` is zero; everything else is a failure,
// except that `RM_STATUS_BUDGET_EXCEEDED` from [`rm_solve`] still returns
// the best matching found.
typedef enum RmStatus {
  RM_STATUS_OK = 0,
  RM_STATUS_NULL_POINTER = 1,
  RM_STATUS_INVALID_ARGUMENT = 2,
  RM_STATUS_GENERAL_POSITION = 3,
  RM_STATUS_INDEX_OUT_OF_RANGE = 4,
  RM_STATUS_INSTANCE_TOO_LARGE = 5,
  RM_STATUS_BUDGET_EXCEEDED = 6,
  RM_STATUS_CHAIN_INVALID = 7,
  RM_STATUS_PARSE = 8,
  RM_STATUS_IO = 9,
  RM_STATUS_PANIC = 10,
} RmStatus;

typedef enum RmModel {
  RM_MODEL_UNIFORM_SQUARE = 0,
  RM_MODEL_GRID_X = 1,
} RmModel;

typedef enum RmSolver {
  RM_SOLVER_EXACT = 0,
  RM_SOLVER_BRUTEFORCE = 1,
  RM_SOLVER_GREEDY = 2,
} RmSolver;

// Finite-state chain with rewards and an initial distribution.
typedef struct RmChain RmChain;

// Point set in general position, sorted by x.
typedef struct RmInstance RmInstance;

// Result of a solve.
typedef struct RmMatching RmMatching;

// Red is 0, blue is 1.
typedef uint8_t RmColor;

// Expectation bounds for a reward sum over `n` steps.
typedef struct RmExpectationBounds {
  double alpha;
  double m;
  // Zero when every reward is zero.
  double delta;
  size_t n0;
  double lower;
  double upper;
  double exact;
  bool degenerate;
  bool zero_reward;
} RmExpectationBounds;

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *rm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *rm_version(void);

// Random instance of `n` points.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum RmStatus rm_instance_generate(size_t n,
                                   uint64_t seed,
                                   enum RmModel model,
                                   struct RmInstance **out);

// Instance from coordinate and color arrays of length `n`. Points are
// re-sorted by x, so indices of the result follow x order.
//
// # Safety
// `xs`, `ys` and `colors` must point to `n` readable elements; `out` must be writable.
enum RmStatus rm_instance_from_points(const double *xs,
                                      const double *ys,
                                      const RmColor *colors,
                                      size_t n,
                                      struct RmInstance **out);

// Reads an instance CSV (`x,y,color` with colors `R`/`B`).
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
enum RmStatus rm_instance_from_csv(const char *path, struct RmInstance **out);

// Number of points, or 0 for NULL.
//
// # Safety
// `inst` must be NULL or a live handle.
size_t rm_instance_len(const struct RmInstance *inst);

// Point `i` in x order.
//
// # Safety
// `inst` must be a live handle; the out-pointers must be writable.
enum RmStatus rm_instance_point(const struct RmInstance *inst,
                                size_t i,
                                double *x,
                                double *y,
                                RmColor *color);

// # Safety
// `inst` must be NULL or a handle not yet freed.
void rm_instance_free(struct RmInstance *inst);

// Solves `inst`. `max_nodes` and `time_budget_seconds` bound the exact
// search. On `RM_STATUS_BUDGET_EXCEEDED` the best matching found is still
// written to `out` and marked not optimal.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum RmStatus rm_solve(const struct RmInstance *inst,
                       enum RmSolver solver,
                       uint64_t max_nodes,
                       double time_budget_seconds,
                       struct RmMatching **out);

// Number of pairs, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t rm_matching_pair_count(const struct RmMatching *m);

// Points covered (twice the pair count).
//
// # Safety
// `m` must be NULL or a live handle.
size_t rm_matching_matched_count(const struct RmMatching *m);

// # Safety
// `m` must be NULL or a live handle.
bool rm_matching_is_optimal(const struct RmMatching *m);

// # Safety
// `m` must be NULL or a live handle.
uint64_t rm_matching_nodes_explored(const struct RmMatching *m);

// Pair `k` in sorted order, as point indices `i < j`.
//
// # Safety
// `m` must be a live handle; `i` and `j` must be writable.
enum RmStatus rm_matching_pair(const struct RmMatching *m, size_t k, size_t *i, size_t *j);

// # Safety
// `m` must be NULL or a handle not yet freed.
void rm_matching_free(struct RmMatching *m);

// Parses a chain spec: `{"states": [...], "P": [[...]], "f": [...], "p1": [...]}`
// with `P` column-stochastic.
//
// # Safety
// `json` must be a NUL-terminated UTF-8 string; `out` must be writable.
enum RmStatus rm_chain_from_json(const char *json, struct RmChain **out);

// Number of states, or 0 for NULL.
//
// # Safety
// `c` must be NULL or a live handle.
size_t rm_chain_len(const struct RmChain *c);

// Writes the stationary distribution into `out[0..len]`; `len` must equal the state count.
//
// # Safety
// `c` must be a live handle; `out` must point to `len` writable doubles.
enum RmStatus rm_chain_stationary(const struct RmChain *c, double tol, double *out, size_t len);

// Stationary reward rate `f · s`.
//
// # Safety
// `c` must be a live handle; `out` must be writable.
enum RmStatus rm_chain_alpha(const struct RmChain *c, double *out);

// Smallest `t ≤ cap` with every entry of `Qᵗ` within `delta` of its limit.
//
// # Safety
// `c` must be a live handle; `out` must be writable.
enum RmStatus rm_chain_convergence_index(const struct RmChain *c,
                                         double delta,
                                         size_t cap,
                                         size_t *out);

// Lower and upper bounds on the expected reward sum over `n` steps, with the exact value.
//
// # Safety
// `c` must be a live handle; `out` must be writable.
enum RmStatus rm_chain_expectation_bounds(const struct RmChain *c,
                                          double epsilon,
                                          size_t n,
                                          size_t cap,
                                          struct RmExpectationBounds *out);

// # Safety
// `c` must be NULL or a handle not yet freed.
void rm_chain_free(struct RmChain *c);

// McDiarmid bound for the constants `d[0..len]`.
//
// # Safety
// `d` must point to `len` readable doubles (may be NULL when `len` is 0); `out` must be writable.
enum RmStatus rm_mcdiarmid_bound(const double *d,
                                 size_t len,
                                 double epsilon,
                                 bool two_sided,
                                 double *out);

// McDiarmid bound for the matched-fraction profile of size `n` (`4/n` and `2/n`).
//
// # Safety
// `out` must be writable.
enum RmStatus rm_mcdiarmid_profile_bound(size_t n, double epsilon, bool two_sided, double *out);

// `(n0 - 1) + 2 r^n0 / (1 - r)` with `r = exp(-ε²/40)`.
//
// # Safety
// `out` must be writable.
enum RmStatus rm_borel_cantelli_tail(double epsilon, uint64_t n0, double *out);

// `1 / (t! 2^(t-2))` rounded to double (`t ≥ 2`); underflows to 0 for large `t`.
//
// # Safety
// `out` must be writable.
enum RmStatus rm_alt_chain_probability(uint32_t t, double *out);

// `1 / (2t)` (`t ≥ 3`).
//
// # Safety
// `out` must be writable.
enum RmStatus rm_conditional_extension_probability(uint32_t t, double *out);

#endif  /* RECTMATCH_H */
