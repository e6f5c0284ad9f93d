#pragma once

#include "dirlap/rng.hpp"
#include "dirlap/sparse.hpp"

namespace dirlap::gen {

// Deterministic instance families used by tests and the bench subcommand. Cycle sums
// are Eulerian by construction (every vertex on a cycle gains one unit in and out).

SparseGraph complete_bidirected(int n, double w = 1.0);
SparseGraph directed_cycle(int n, double w = 1.0);

// weights.size() == n: edge i -> (i+1) % n carries weights[i] in both directions
SparseGraph bidirected_cycle(int n, const Vec& weights);
// weights.size() == n - 1
SparseGraph bidirected_path(int n, const Vec& weights);

// union of `covers` random full-length permutation cycles with weights in [wmin, wmax];
// a unit base cycle guarantees strong connectivity
SparseGraph cycle_union(int n, int covers, double wmin, double wmax, Rng& rng);

// random short cycles added until ~target_m edges: Eulerian, strongly connected
SparseGraph er_eulerian(int n, int target_m, double wmin, double wmax, Rng& rng);

// ER digraph plus a base cycle: strongly connected, generally not Eulerian
SparseGraph er_strongly_connected(int n, double p, double wmin, double wmax, Rng& rng);

// Eulerian mixture of unit-weight and `ratio`-weight random cycles
SparseGraph two_scale_eulerian(int n, double ratio, Rng& rng);

// two bidirected cliques K_k bridged by a single bidirected edge
SparseGraph barbell(int k, double w = 1.0);

// hub 0 connected both ways to each leaf
SparseGraph star_bidirected(int leaves, double w = 1.0);

}  // namespace dirlap::gen
