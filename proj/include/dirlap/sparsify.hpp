#pragma once

#include <cstdint>

#include "dirlap/decompose.hpp"
#include "dirlap/sampling.hpp"

namespace dirlap {

struct EulerianSparsifyOptions {
  double phi_target = 0.0;         // forwarded to find_decomposition; 0 = its default
  SubgraphOptions subgraph = {};
  DecomposeOptions decompose = {};
  double gap_safety = 0.5;         // certified fraction of the measured piece gap
  int gap_iters = 200;
};

struct EulerianSparsifyStats {
  size_t pieces = 0;
  size_t exact_pieces = 0;
  double alpha = 0.0;
  double beta = 1.0;
  double delta_min = 0.0;  // tightest per-piece scaled-norm budget used
};

// Degree-preserving sparsification of a strongly connected Eulerian Laplacian:
// decompose into expander pieces, sample each piece against its cover budget,
// sum. Self-loops pass through untouched (they carry no Laplacian mass).
DirectedLaplacian sparsify_eulerian(const DirectedLaplacian& L, double p, double eps,
                                    uint64_t seed, const EulerianSparsifyOptions& opt = {},
                                    EulerianSparsifyStats* stats = nullptr);

// Sparsify the implicit rank-1 product Laplacian diag(y) - (1/r) x y^T, where
// r = |x|_1 = |y|_1 (1e-10 relative, NormMismatch beyond). Degrees of the output
// match the implicit product exactly; the diagonal entries x_i y_i / r are
// emitted verbatim. Trivial supports (nnz <= 1 on either side) return exactly.
DirectedLaplacian sparsify_product(const Vec& x, const Vec& y, double p, double eps,
                                   uint64_t seed, const SubgraphOptions& opt = {},
                                   SparsifyStats* stats = nullptr);

struct SquareStats {
  size_t pieces = 0;              // per-vertex products processed
  size_t exact_pieces = 0;
  size_t max_piece_entries = 0;   // largest single piece materialized
  size_t total_entries = 0;       // summed piece sizes before the Eulerian stage
  size_t components = 1;          // undirected components of the summed square
  bool dense_square_formed = false;  // stays false: W D^{-1} W is never multiplied out
};

// Sparsifier of the square walk: given w >= 0 with equal row and column sums
// (RowColMismatch beyond 1e-10 relative) and D = diag(w 1), approximates
// M = D - w D^{-1} w without forming it, and returns wt with D - wt the
// sparsified M. Per-vertex products feed one Eulerian sparsification round
// (run per undirected component of the summed square, which can disconnect
// even when w is connected).
SparseGraph sparsify_square(const SparseGraph& w, double p, double eps, uint64_t seed,
                            const EulerianSparsifyOptions& opt = {},
                            SquareStats* stats = nullptr);

}  // namespace dirlap
