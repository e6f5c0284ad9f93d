#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dirlap/solver.hpp"
#include "dirlap/sparse.hpp"

namespace dirlap {

// Pluggable Eulerian solver: potentials for L y = b at relative accuracy eps.
// Every application below routes its linear algebra through one of these, so a
// caller can substitute a dense factorization when the emitted systems are too
// stiff for the recursive solver's cost profile (the reduction's regularized
// systems are r^2-conditioned by construction).
using InnerSolver =
    std::function<Vec(const DirectedLaplacian& L, const Vec& b, double eps, uint64_t seed)>;

// The production handle: solve_eulerian under the given options.
InnerSolver default_inner_solver(const SolveOptions& opt = {});

// Strictly row- and column-dominant Z-matrix M (nonpositive off-diagonal,
// nonnegative diagonal, nonnegative row sums q and column sums s), embedded as
// an (n+1)-vertex Eulerian Laplacian: the appended vertex absorbs each row's
// surplus and supplies each column's deficit, and balances itself because
// sum(q) = sum(s). InvalidArgument when M violates the sign structure.
DirectedLaplacian rcdd_complete(const SparseGraph& m);

// Solve M z = c through the Eulerian embedding: route [c; -sum c] through
// `inner` and de-shift by the appended coordinate (M z = c holds exactly for
// z = y_{1..n} - y_{n+1} 1 whenever the embedded system is solved exactly).
Vec rcdd_solve(const SparseGraph& m, const Vec& c, double eps, const InnerSolver& inner,
               uint64_t seed);

struct StationaryOptions {
  double c_stat = 1e-2;      // inner accuracy c_stat * (alpha/n)^q_exp ...
  int q_exp = 2;             // ... with this exponent ...
  double eps_floor = 1e-12;  // ... floored at representability
  int rounds = 0;            // 0: the ceil(3 ln(1/alpha)) default
  double plateau = 0.9;      // stop after two rounds above this fraction of the best
                             // residual (accuracy floor reached); <= 0 disables
  double refine_target = 0.125;  // refine until |L x|_1 / |D x|_1 <= refine_target * alpha;
                                 // <= 0 keeps the bare iteration (also skipped under diag_shift)
  double eps_refine = 1e-2;  // accuracy of each refinement solve
  int refine_max = 40;       // refinement rounds before InnerSolverFailure
  double diag_shift = 0;     // operate on L + shift*I (the full solver's perturbation)
  bool check_connected = true;
};

struct StationaryResult {
  Vec pi;               // nonnegative, sums to 1
  Vec x;                // positive kernel-direction scaling; pi = D x / |D x|_1
  int iterations = 0;     // multiplicative update rounds actually run
  int refine_rounds = 0;  // additive refinement rounds actually run
  double residual = 0;    // |pi^T P - pi^T|_1 == |L x|_1 / |D x|_1
};

// Stationary distribution of a strongly connected directed Laplacian, in two
// phases. Bootstrap: starting from x = D^{-1} 1, each of ceil(3 ln(1/alpha))
// rounds measures the excess e making (E + L) diag(x) row- and column-dominant,
// solves that system through the Eulerian embedding, and multiplies the
// solution into x. The multiplicative map fixes the kernel only when the
// stationary is constant across out-surplus vertices, so it stalls at a
// graph-dependent residual; a refinement phase then solves the cycle-patched
// L diag(x) against -L x (inverse iteration through the Eulerian rescaling)
// until |L x|_1 / |D x|_1 <= refine_target * alpha.
// NotStronglyConnected / InnerSolverFailure.
StationaryResult compute_stationary(const DirectedLaplacian& L, double alpha,
                                    const InnerSolver& inner = {}, uint64_t seed = 0,
                                    const StationaryOptions& opt = {});

struct EulerianScaleOptions {
  double alpha = 0.05;  // stationary restart; squared on each retry
  double tol = 1e-8;    // relative row defect the closing patch may absorb
  int attempts = 3;
  InnerSolver inner;
  StationaryOptions stat;
};

struct EulerianScaleResult {
  Vec x;                     // positive, sums to n
  DirectedLaplacian scaled;  // Eulerian: L diag(x) plus the defect-cancelling circulation
  double defect = 0;         // relative row defect of L diag(x) before the patch
  int attempts = 1;
};

// Column rescaling by the kernel direction: ker(L) = span(x) makes L diag(x)
// Eulerian. The numerically computed x leaves a small row defect, cancelled
// exactly by a cycle circulation whose mass is reported in `defect`.
EulerianScaleResult eulerian_scale(const DirectedLaplacian& L, uint64_t seed = 0,
                                   const EulerianScaleOptions& opt = {});

struct FullSolveOptions {
  double c_pert = 1000;    // diagonal perturbation eps * w_min / (c_pert * n^3)
  double alpha = 0.05;     // stationary restart for the perturbed matrix
  double eps_inner = 1e-2; // per-round accuracy of the rescaled Eulerian solves
  int max_rounds = 60;
  StationaryOptions stat;
};

struct FullSolveReport {
  double delta = 0;           // applied diagonal perturbation
  double defect = 0;          // relative row defect patched after rescaling
  double patch_mass = 0;      // total circulation weight added
  int rounds = 0;             // refinement rounds against the original matrix
  double residual = -1;       // final |L x - b|_2 / |b|_2
  std::vector<double> residual_trace;
  bool b_projected = false;
  StationaryResult stationary;
};

// Solver for strongly connected (generally non-Eulerian) directed Laplacians:
// perturb the diagonal so a stationary scaling is well-defined, rescale to a
// patched Eulerian matrix, then refine against the original L until
// |L x - b|_2 <= eps |b|_2. Eulerian inputs route straight to `inner`.
Vec solve_full(const DirectedLaplacian& L, const Vec& b, double eps,
               const InnerSolver& inner = {}, uint64_t seed = 0,
               const FullSolveOptions& opt = {}, FullSolveReport* report = nullptr);

struct PagerankOptions {
  double alpha = 0;  // stationary restart; 0 picks min(0.02, eps/8)
  InnerSolver inner;
  StationaryOptions stat;
};

// Personalized PageRank with restart probability beta: the stationary
// distribution of the teleported chain (1-beta) P + beta 1 pers^T, computed by
// running compute_stationary on the graph whose adjacency adds, for every
// vertex u, teleport edges u -> v of weight beta * deg(u) * pers_v. beta = 1
// returns the personalization itself.
Vec personalized_pagerank(const NormalizedWalk& w, double beta, const Vec& personalization,
                          double eps, uint64_t seed = 0, const PagerankOptions& opt = {});

// One rung of the weight-scale ladder: the contraction/projection pair is
// determined by the connected components of the symmetrized edges of weight at
// least w, and the contracted system gets the regularizer w / r^2.
struct ScaleLevel {
  double w = 0;
  double reg = 0;
  std::vector<int> comp;  // vertex -> supernode (the contraction map; the
                          // projection centres each supernode's entries)
  int k = 0;
  bool solved = false;    // false when the level was skipped (k == 1 or zero demand)
  double demand_norm = 0; // |C b|_2 routed at this level
};

struct ScaleLadder {
  double r = 0;
  std::vector<ScaleLevel> levels;
};

struct CrudeSolveOptions {
  double r = 0;          // 0: max(1e6, n^3)
  double eps_inner = 0;  // 0: 1/r
  bool store_systems = false;
  bool store_contracted = false;
};

struct CrudeSolveReport {
  ScaleLadder ladder;
  int solves = 0;
  std::vector<DirectedLaplacian> systems;  // Eulerian embeddings handed to `inner`
  std::vector<SparseGraph> contracted;     // regularized C L C^T + (w/r^2) I
};

// Crude solver for arbitrarily ill-conditioned Eulerian systems: walk the
// weight scales from the spanning-forest bottleneck upward, at each scale
// contracting the heavier edges and routing the remaining demand through the
// regularized contracted system. Each emitted system is polynomially
// conditioned in n and r regardless of the input's condition number, and the
// accumulated answer lands within half the U_L-norm of the true solution.
Vec crude_solve_ill_conditioned(const DirectedLaplacian& L, const Vec& b,
                                const InnerSolver& inner = {}, uint64_t seed = 0,
                                const CrudeSolveOptions& opt = {},
                                CrudeSolveReport* report = nullptr);

}  // namespace dirlap
