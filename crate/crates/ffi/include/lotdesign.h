#ifndef LOTDESIGN_H
#define LOTDESIGN_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LdMethod {
  LD_METHOD_EXACT = 0,
  LD_METHOD_NORMAL = 1,
} LdMethod;

typedef enum LdSolveStatus {
  LD_SOLVE_STATUS_OPTIMAL = 0,
  LD_SOLVE_STATUS_FEASIBLE = 1,
  LD_SOLVE_STATUS_INFEASIBLE = 2,
} LdSolveStatus;

typedef enum LdSolverKind {
  LD_SOLVER_KIND_EXACT = 0,
  LD_SOLVER_KIND_GREEDY = 1,
  LD_SOLVER_KIND_BRUTE_FORCE = 2,
} LdSolverKind;

typedef enum LdStatus {
  LD_STATUS_OK = 0,
  LD_STATUS_STRUCTURAL = 1,
  LD_STATUS_VALIDATION = 2,
  LD_STATUS_CAPACITY = 3,
  LD_STATUS_UNDEFINED = 4,
  LD_STATUS_IO = 5,
  LD_STATUS_CONFIG = 6,
  LD_STATUS_NULL_ARGUMENT = 7,
  LD_STATUS_INVALID_UTF8 = 8,
  LD_STATUS_OUT_OF_RANGE = 9,
  LD_STATUS_PANIC = 10,
} LdStatus;

/**
 * An instance with its scenario set and ladder, built from a config document.
 */
typedef struct LdModel LdModel;

typedef struct LdSolution LdSolution;

typedef struct LdWilcoxon {
  double rank_sum_a;
  /**
   * Probability of a rank sum at most the observed one.
   */
  double p_value;
  double two_sided_p;
  /**
   * NaN for the exact method.
   */
  double z;
  enum LdMethod method;
  bool significant;
  size_t tie_group_count;
} LdWilcoxon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *ld_last_error(void);

/**
 * Sample standard deviation of `n` normalized sales rates.
 *
 * # Safety
 * `rates` must point to `n` doubles; `out` must be writable.
 */
enum LdStatus ld_nsrd(const double *rates, size_t n, double *out_value);

/**
 * Share of each size's supply that was sold. Sizes with zero supply get NaN.
 *
 * # Safety
 * `supply` and `sold` must point to `n` values; `rates` to `n` writable doubles.
 */
enum LdStatus ld_nsr(const uint64_t *supply, const uint64_t *sold, size_t n, double *rates);

/**
 * Number of lot-types within component and total bounds.
 *
 * # Safety
 * `count` must be writable.
 */
enum LdStatus ld_lot_type_count(size_t size_count,
                                uint32_t comp_min,
                                uint32_t comp_max,
                                uint64_t total_min,
                                uint64_t total_max,
                                uint64_t *count);

/**
 * Left-tail rank-sum test of A against B.
 *
 * # Safety
 * `a` and `b` must point to `n_a` and `n_b` doubles; `result` must be writable.
 */
enum LdStatus ld_wilcoxon_left_tail(const double *a,
                                    size_t n_a,
                                    const double *b,
                                    size_t n_b,
                                    double level,
                                    struct LdWilcoxon *result);

/**
 * Parses a TOML configuration and draws its scenarios.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `model` must be writable.
 */
enum LdStatus ld_model_from_toml(const char *toml, struct LdModel **model);

/**
 * # Safety
 * `model` must come from [`ld_model_from_toml`] and not be used afterwards.
 */
void ld_model_free(struct LdModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t ld_model_branch_count(const struct LdModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t ld_model_size_count(const struct LdModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t ld_model_lot_type_count(const struct LdModel *model);

/**
 * Solves the model. The score table is computed on first use and reused.
 *
 * # Safety
 * `model` must be a live handle; `solution` must be writable.
 */
enum LdStatus ld_model_solve(struct LdModel *model,
                             enum LdSolverKind kind,
                             struct LdSolution **solution);

/**
 * # Safety
 * `solution` must come from [`ld_model_solve`] and not be used afterwards.
 */
void ld_solution_free(struct LdSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle.
 */
enum LdSolveStatus ld_solution_status(const struct LdSolution *solution);

/**
 * Objective in 1/10000 units; fails when no plan was found.
 *
 * # Safety
 * `solution` must be a live handle; `units` must be writable.
 */
enum LdStatus ld_solution_objective(const struct LdSolution *solution, int64_t *units);

/**
 * Best proven upper bound in 1/10000 units.
 *
 * # Safety
 * `solution` must be a live handle; `units` must be writable.
 */
enum LdStatus ld_solution_bound(const struct LdSolution *solution, int64_t *units);

/**
 * # Safety
 * `solution` must be a live handle.
 */
uint64_t ld_solution_nodes(const struct LdSolution *solution);

/**
 * Lot-type and multiplicity delivered to `branch`. `components` receives
 * up to `len` entries; pass the model's size count.
 *
 * # Safety
 * `solution` must be a live handle; `components` must hold `len` values;
 * `multiplicity` must be writable.
 */
enum LdStatus ld_solution_branch(const struct LdSolution *solution,
                                 size_t branch,
                                 uint32_t *components,
                                 size_t len,
                                 uint32_t *multiplicity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOTDESIGN_H */
