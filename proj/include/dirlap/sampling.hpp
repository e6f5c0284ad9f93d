#pragma once

#include <functional>

#include "dirlap/rng.hpp"
#include "dirlap/sparse.hpp"

namespace dirlap {

// Sampling distribution over the nonzero entries of a fixed nonnegative matrix:
// p_ij = (A_ij / s) * (1/r_i + 1/c_j), where r/c are row/column sums and s counts
// the nonzero rows plus nonzero columns. Probabilities sum to 1 by construction.
// Draws are O(1) via a Walker alias table.
struct EntryDistribution {
  Vec r;
  Vec c;
  int s = 0;
  Vec prob;                 // aligned with the source matrix's entry order
  std::vector<int> alias;
  Vec cut;
  uint64_t seed = 0;

  int draw(Rng& rng) const;
};

EntryDistribution build_distribution(const SparseGraph& a, uint64_t seed);  // EmptyMatrix

// (1/k) * sum of k draws of (A_ij / p_ij) e_i e_j^T. Deterministic for a given seed:
// draws are partitioned into 64 fixed chunks with child seeds, so results are
// byte-identical for any DIRLAP_THREADS value.
SparseGraph sample_average(const EntryDistribution& d, const SparseGraph& a, uint64_t k);

struct PatchMatrix {
  SparseGraph m;  // ahat plus the greedy nonnegative completion E
  Vec row_target;
  Vec col_target;
};

// Greedy two-pointer completion: raises row/column sums of ahat to the targets
// exactly with O(n) added entries, skipping the diagonal when asked. Preconditions:
// every row/column sum of ahat is at most its target, and total row deficit equals
// total column deficit (DeficitMismatch otherwise).
PatchMatrix patch_to_degrees(const SparseGraph& ahat, const Vec& target_row,
                             const Vec& target_col, bool forbid_diagonal);

// Power-iteration estimate of || diag(rw)^{-1/2} M diag(cw)^{-1/2} ||_2; zero weights
// mean the row/column is outside the support and must carry no mass.
double scaled_norm_estimate(const SparseGraph& m, const Vec& rw, const Vec& cw,
                            uint64_t seed, int iters = 60);

// Same power-method estimate for an implicit operator given by matvec callbacks
// (y = Mx and y = M^T x). The caller must guarantee M carries no mass on
// zero-weight rows/columns; this overload cannot check that structurally.
double scaled_norm_estimate(const std::function<void(const double*, double*)>& mv,
                            const std::function<void(const double*, double*)>& mtv, int n,
                            const Vec& rw, const Vec& cw, uint64_t seed, int iters = 60);

struct SubgraphOptions {
  double c_sample = 16.0;  // k = ceil(c_sample * s * (4/eps)^2 * ln(s/p))
  int max_resamples = 3;
  size_t exact_below = 64;  // inputs this small are returned as-is
};

struct SparsifyStats {
  uint64_t k = 0;
  int attempts = 0;
  bool exact = false;
  double measured_norm = 0.0;
};

// Degree-preserving sparsification of a (not necessarily Eulerian) directed
// Laplacian: entry sampling at accuracy eps/4, rescale, patch, then a power-method
// verification of the row/column-scaled norm of the difference with up to
// max_resamples doublings (OversampleExhausted after that). Whenever the sample
// budget reaches nnz the input is returned exactly - sampling more entries than the
// matrix has cannot sparsify.
DirectedLaplacian sparsify_subgraph(const DirectedLaplacian& L, double p, double eps,
                                    uint64_t seed, const SubgraphOptions& opt = {},
                                    SparsifyStats* stats = nullptr);

}  // namespace dirlap
