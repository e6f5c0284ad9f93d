#pragma once

#include <cstdint>
#include <vector>

#include "dirlap/sparse.hpp"

namespace dirlap {

// Split of a directed Laplacian into pieces L^(i) with undirected covers U^(i):
// sum of pieces reassembles L exactly, each cover dominates its piece's graph
// symmetrization diagonal and has normalized spectral gap >= alpha, and the
// covers sum to at most beta * U_L.
struct Decomposition {
  std::vector<DirectedLaplacian> pieces;
  std::vector<SparseGraph> covers;  // undirected Laplacian matrices, one per piece
  double alpha = 0.0;
  double beta = 1.0;
  size_t total_support = 0;

  double phi_target = 0.0;
  std::vector<double> piece_phi;  // certified sweep conductance, 1.0 for single edges
  std::vector<int> piece_bucket;
  int buckets = 0;          // weight scales spanned (nonempty ones)
  int rounds_max = 0;       // worst-case certify rounds over buckets
};

// Cut conductance of a vertex set in an undirected graph given by its adjacency:
// crossing weight over the smaller side's volume. EmptySet/FullSet on degenerate
// input; an S with zero volume on one side and no crossing edges scores 0.
double conductance(const SparseGraph& undirected_adj, const std::vector<int>& in_set);

struct SweepCut {
  std::vector<int> cut;  // vertex ids of the prefix side
  double phi = 0.0;
};

struct SweepOptions {
  int trials = 4;
  int iters = 200;
  double stagnation_tol = 1e-6;
};

// Approximate minimum-conductance cut: power iteration toward the Fiedler
// direction of the normalized adjacency (deflated against the degree vector),
// then the best prefix cut in D^{-1/2}-scaled coordinate order. A disconnected
// support short-circuits to a component cut with phi = 0.
SweepCut cheeger_sweep(const SparseGraph& undirected_adj, uint64_t seed,
                       const SweepOptions& opt = {});

// One-sided upper-ish estimate of the smallest nonzero eigenvalue of the
// normalized Laplacian of an undirected adjacency (2 minus the deflated power
// iterate's Rayleigh quotient). Callers wanting a certified lower bound scale
// by a safety factor.
double normalized_gap_estimate(const SparseGraph& undirected_adj, int iters, uint64_t seed);

struct DecomposeOptions {
  double c_phi = 0.125;             // phi_target = c_phi / log2^2(n+1) when unset
  SweepOptions sweep = {};
  double progress_fraction = 0.25;  // reported observable; the round cap enforces termination
  int max_rounds_override = 0;      // > 0 replaces the ceil(log2 nnz) per-bucket cap
};

// Weight-bucketed recursive sweep-cut decomposition. phi_target <= 0 selects the
// default c_phi / log2^2(n+1). Self-loops carry no Laplacian mass and are ignored.
Decomposition find_decomposition(const DirectedLaplacian& L, double phi_target,
                                 uint64_t seed, const DecomposeOptions& opt = {});

}  // namespace dirlap
