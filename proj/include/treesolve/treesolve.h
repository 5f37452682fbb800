/* treesolve C API
 *
 * Shared-library interface over the tree-parallel banded solver. All
 * functions return a ts_status; on failure ts_last_error() yields a
 * human-readable detail message for the current thread. Objects are
 * opaque handles released with their matching _free function.
 */
#ifndef TREESOLVE_H
#define TREESOLVE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
  TS_OK = 0,
  TS_ERR_USAGE = 1,    /* invalid arguments, shapes or preconditions */
  TS_ERR_NUMERIC = 2,  /* singular matrix or residual over tolerance */
  TS_ERR_DEADLOCK = 3, /* simulated network reached quiescence */
  TS_ERR_IO = 4,       /* file, format or schema problems */
  TS_ERR_MISMATCH = 5, /* inputs that do not belong together */
} ts_status;

typedef struct ts_problem ts_problem;
typedef struct ts_solution ts_solution;

typedef struct ts_cost_model {
  double latency;     /* fixed time per message */
  double per_element; /* time per scalar transferred */
  double flop;        /* time per arithmetic operation */
} ts_cost_model;

const char* ts_status_name(ts_status status);
/* Detail message of the most recent failing call on this thread. */
const char* ts_last_error(void);
void ts_string_free(char* s);

/* -- problems ----------------------------------------------------- */

/* generator: "identity", "tridiag-dd" or "spd-banded". leaves must be a
 * power of two; bandwidth must not exceed block_size. */
ts_status ts_problem_generate(const char* generator, uint64_t leaves,
                              uint64_t block_size, uint64_t rhs_cols,
                              uint64_t bandwidth, uint64_t seed,
                              ts_problem** out);
ts_status ts_problem_read(const char* path, ts_problem** out);
ts_status ts_problem_write(const ts_problem* p, const char* path);
/* Lossless text rendering; free with ts_string_free. */
ts_status ts_problem_dump_text(const ts_problem* p, char** text);
void ts_problem_free(ts_problem* p);

uint64_t ts_problem_leaves(const ts_problem* p);
uint64_t ts_problem_block_size(const ts_problem* p);
uint64_t ts_problem_rhs_cols(const ts_problem* p);
uint64_t ts_problem_bandwidth(const ts_problem* p);
uint64_t ts_problem_seed(const ts_problem* p);
const char* ts_problem_generator(const ts_problem* p);

/* -- solving ------------------------------------------------------ */

/* Runs the simulated distributed solve. cost may be NULL for the
 * defaults (latency 0, unit per-element and flop costs). The returned
 * solution carries the simulation report. */
ts_status ts_solve(const ts_problem* p, const ts_cost_model* cost,
                   ts_solution** out);
/* Sequential reference elimination; no simulation report attached. */
ts_status ts_oracle_solve(const ts_problem* p, ts_solution** out);

ts_status ts_solution_read(const char* path, ts_solution** out);
ts_status ts_solution_write(const ts_solution* s, const char* path);
void ts_solution_free(ts_solution* s);

/* Row-major view of the (leaves*block_size) x rhs_cols values; valid
 * until the solution is freed. */
ts_status ts_solution_values(const ts_solution* s, const double** data,
                             uint64_t* rows, uint64_t* cols);
/* Simulation report JSON; TS_ERR_USAGE when none is attached. Free with
 * ts_string_free. */
ts_status ts_solution_report_json(const ts_solution* s, char** json);

/* Max-norm relative residual |A*X - Y| / |Y|. */
ts_status ts_residual(const ts_problem* p, const ts_solution* s,
                      double* residual);
/* Residual plus max relative difference against the sequential
 * reference. Returns TS_ERR_NUMERIC when residual > tolerance. */
ts_status ts_verify(const ts_problem* p, const ts_solution* s,
                    double tolerance, double* residual, double* oracle_diff);

/* -- analysis ----------------------------------------------------- */

/* Predicted makespan in cost-model units; leaves must be a power of two
 * >= 2. Returns a negative value on invalid input. */
double ts_predicted_time(uint64_t leaves, uint64_t block_size,
                         uint64_t rhs_cols, const ts_cost_model* cost);
/* leaves^(1/dimension) for dimension in {1,2,3}. */
ts_status ts_latency_lower_bound(uint64_t leaves, int dimension, double* out);
/* Optimal node-count exponent p and time exponent w as exact rationals
 * for a machine in `dimension`-dimensional space. */
ts_status ts_optimal_node_exponent(int dimension, int64_t* p_num,
                                   int64_t* p_den, int64_t* w_num,
                                   int64_t* w_den);
/* Builds the scaling CSV (columns N,makespan,model,ratio) from solve
 * report JSON strings. All reports must share block size, rhs column
 * count and cost model; TS_ERR_MISMATCH otherwise. Free with
 * ts_string_free. */
ts_status ts_scaling_csv(const char* const* report_jsons, size_t count,
                         char** csv);

#ifdef __cplusplus
}
#endif

#endif /* TREESOLVE_H */
