#ifndef DIRLAP_H
#define DIRLAP_H

/* C interface to the directed-Laplacian toolkit. Handles are opaque; every
 * operation returns a status code (0 = ok) and stashes a human-readable
 * message retrievable with dirlap_last_error() on failure. Buffers the
 * library allocates (reports, read vectors) are released with dirlap_free.
 *
 * Scalar knobs beyond the common ones travel in an optional JSON options
 * string per call (pass NULL for defaults); reports come back as JSON with a
 * stable versioned field set. This keeps the ABI at "handles + arrays +
 * strings" while still exposing the full parameter ledger.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; mirrors the library's internal error taxonomy. */
#define DIRLAP_OK 0
#define DIRLAP_NEGATIVE_WEIGHT 1
#define DIRLAP_NON_FINITE 2
#define DIRLAP_EMPTY_MATRIX 3
#define DIRLAP_ZERO_DEGREE_VERTEX 4
#define DIRLAP_ZERO_KERNEL_VECTOR 5
#define DIRLAP_SELF_LOOP 6
#define DIRLAP_DIMENSION_MISMATCH 7
#define DIRLAP_DEFICIT_MISMATCH 8
#define DIRLAP_OVERSAMPLE_EXHAUSTED 9
#define DIRLAP_EMPTY_SET 10
#define DIRLAP_FULL_SET 11
#define DIRLAP_NONTERMINATING_DECOMPOSITION 12
#define DIRLAP_NOT_EULERIAN 13
#define DIRLAP_NOT_STRONGLY_CONNECTED 14
#define DIRLAP_NORM_MISMATCH 15
#define DIRLAP_ROW_COL_MISMATCH 16
#define DIRLAP_CHAIN_KERNEL_DRIFT 17
#define DIRLAP_RECURSION_BUDGET_EXCEEDED 18
#define DIRLAP_LAMBDA_ESTIMATE_FAILED 19
#define DIRLAP_INNER_SOLVER_FAILURE 20
#define DIRLAP_DIMENSION_CAP 21
#define DIRLAP_KERNEL_MISMATCH 22
#define DIRLAP_NOT_PSD_SYMMETRIZATION 23
#define DIRLAP_IO_ERROR 24
#define DIRLAP_USAGE_ERROR 25
#define DIRLAP_INVALID_ARGUMENT 26

typedef struct dirlap_graph dirlap_graph;

const char* dirlap_version(void);
const char* dirlap_status_name(int status);

/* Message for the most recent failing call on this thread; empty string if the
 * last call succeeded. The pointer stays valid until the thread's next call. */
const char* dirlap_last_error(void);

/* Frees any buffer or string returned through an out-parameter. NULL is ok. */
void dirlap_free(void* p);

/* ---- graphs ------------------------------------------------------------- */

/* Builds a graph from triplets (row, col, weight), 0-indexed, duplicates
 * summed. Weights must be positive and finite; loops only if allow_loops. */
int dirlap_graph_from_triplets(int n, size_t nnz, const int* rows, const int* cols,
                               const double* weights, int allow_loops, dirlap_graph** out);

/* Matrix Market coordinate format ("i j w" lines, 1-indexed, '%' comments). */
int dirlap_graph_read(const char* path, int allow_loops, dirlap_graph** out);
int dirlap_graph_write(const dirlap_graph* g, const char* path);

/* Deterministic test families. spec_json selects one, e.g.
 *   {"family":"er-eulerian","n":1024,"m":6144,"wmin":0.5,"wmax":2.0}
 * Families: "complete" (n, w), "cycle" (n, w), "er-eulerian" (n, m, wmin,
 * wmax), "er-strong" (n, p, wmin, wmax), "two-scale" (n, ratio), "barbell"
 * (k, w), "star" (leaves, w). */
int dirlap_graph_generate(const char* spec_json, uint64_t seed, dirlap_graph** out);

void dirlap_graph_free(dirlap_graph* g);

int dirlap_graph_n(const dirlap_graph* g);
size_t dirlap_graph_nnz(const dirlap_graph* g);

/* Copies all entries into caller buffers of length dirlap_graph_nnz(g). Any of
 * the three pointers may be NULL to skip that column. */
int dirlap_graph_entries(const dirlap_graph* g, int* rows, int* cols, double* weights);

/* Out-degrees (row sums) / in-degrees (column sums) into a length-n buffer. */
int dirlap_graph_out_degrees(const dirlap_graph* g, double* deg);
int dirlap_graph_in_degrees(const dirlap_graph* g, double* deg);

/* 1 or 0 through *flag. Eulerian means in-degree == out-degree everywhere
 * (within the constructor's relative tolerance). */
int dirlap_graph_is_eulerian(const dirlap_graph* g, int* flag);
int dirlap_graph_is_strongly_connected(const dirlap_graph* g, int* flag);

/* ---- vectors ------------------------------------------------------------ */

/* One value per line, '%' comments. expect_n >= 0 demands that many values;
 * pass -1 to accept any length. The buffer is dirlap_free'd by the caller. */
int dirlap_vector_read(const char* path, int expect_n, double** out, int* out_n);
int dirlap_vector_write(const char* path, const double* v, int n);

/* ---- operations ----------------------------------------------------------
 * Each takes an optional JSON options string (NULL = defaults) and returns an
 * optional JSON report through report_json (pass NULL to skip). Reports carry
 * "report_version" plus the parameters in effect and per-operation results.
 */

/* Degree-preserving sparsification of a strongly connected Eulerian graph.
 * Options: {"p": failure probability (default 0.01), "c_sample", "phi_target"}. */
int dirlap_sparsify(const dirlap_graph* g, double eps, uint64_t seed,
                    const char* options_json, dirlap_graph** out, char** report_json);

/* Sparsifies the implicit square walk of a weight matrix w (equal row and
 * column sums; loops allowed): returns wt with diag(wt 1) - wt approximating
 * D - w D^{-1} w without ever forming the square. Options as dirlap_sparsify. */
int dirlap_sparsify_square(const dirlap_graph* w, double eps, uint64_t seed,
                           const char* options_json, dirlap_graph** out, char** report_json);

/* Expander decomposition; the result is returned as a JSON manifest (pieces
 * with conductance certificates, alpha/beta, weight buckets). Options:
 * {"phi_target": 0 = default schedule, "include_edges": false}. */
int dirlap_decompose(const dirlap_graph* g, uint64_t seed, const char* options_json,
                     char** manifest_json);

/* Solves L x = b for the Eulerian Laplacian L = D - A^T of g, b orthogonal to
 * ones (projected otherwise, flagged in the report). x has length n.
 * Options: {"paper_mode": false, "c_out", "c_budget", "stop_lambda", "d_cap"}. */
int dirlap_solve_eulerian(const dirlap_graph* g, const double* b, double eps, uint64_t seed,
                          const char* options_json, double* x, char** report_json);

/* Solves L x = b for any strongly connected g (Eulerian scaling route).
 * Options: {"alpha", "c_pert", "eps_inner", "max_rounds"} plus solve-eulerian's. */
int dirlap_solve(const dirlap_graph* g, const double* b, double eps, uint64_t seed,
                 const char* options_json, double* x, char** report_json);

/* Stationary distribution of the random walk on g (strongly connected); pi has
 * length n, nonnegative, sums to 1. Options: {"rounds", "c_stat", "q_exp"}. */
int dirlap_stationary(const dirlap_graph* g, double alpha, uint64_t seed,
                      const char* options_json, double* pi, char** report_json);

/* Personalized PageRank with restart beta in (0, 1]; personalization is a
 * length-n distribution. Options: {"alpha" (inner stationary restart)}. */
int dirlap_pagerank(const dirlap_graph* g, double beta, const double* personalization,
                    double eps, uint64_t seed, const char* options_json, double* p,
                    char** report_json);

/* ---- dense reference (debugging; O(n^3), capped dimension) -------------- */

/* || U_A^{+/2} (At - A) U_A^{+/2} ||_2 for the Laplacians of two graphs on the
 * same vertex set; +inf when the difference violates the kernel. */
int dirlap_oracle_approx_norm(const dirlap_graph* a, const dirlap_graph* atil, double* out);

/* Exact stationary distribution via dense eigensolve. */
int dirlap_oracle_stationary(const dirlap_graph* g, double* pi);

/* Dense pseudoinverse solve of L x = b. */
int dirlap_oracle_solve(const dirlap_graph* g, const double* b, double* x);

/* Condition number of the symmetrization U_L restricted to its image. */
int dirlap_oracle_sym_condition(const dirlap_graph* g, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DIRLAP_H */
