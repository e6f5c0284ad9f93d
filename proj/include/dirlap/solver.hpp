#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dirlap/sparse.hpp"
#include "dirlap/sparsify.hpp"

namespace dirlap {

// Shared application counter. Every elementary matrix-vector product inside a
// solve charges one unit; a nonzero budget turns runaway recursion into
// RecursionBudgetExceeded instead of a silent slowdown.
struct CostMeter {
  uint64_t applies = 0;
  uint64_t budget = 0;  // 0 = unmetered
  void charge(uint64_t units);
};

// Implicit matrix: a routine that applies a linear map to a vector, plus the
// metadata tests probe (dimension, declared kernel, per-apply cost). Operators
// built by this module annihilate their declared kernel and return vectors
// orthogonal to it; both properties are probed in tests rather than assumed.
class LinearOperator {
 public:
  LinearOperator() = default;
  LinearOperator(int n, std::function<void(const Vec&, Vec&)> fn, uint64_t unit_cost,
                 std::shared_ptr<CostMeter> meter, Vec kernel = {});

  Vec apply(const Vec& x) const;
  int n() const { return n_; }
  const Vec& kernel() const { return kernel_; }    // unit vector; empty = trivial kernel
  uint64_t unit_cost() const { return unit_; }     // elementary applies charged per apply
  const std::shared_ptr<CostMeter>& meter() const { return meter_; }
  bool valid() const { return n_ > 0; }

 private:
  int n_ = 0;
  std::function<void(const Vec&, Vec&)> fn_;
  uint64_t unit_ = 1;
  std::shared_ptr<CostMeter> meter_;
  Vec kernel_;
};

// Square-sparsifier chain: degrees D shared by every level, walks W_0..W_d with
// ||W_i|| <= 1, ker(I - W_i) = span(D^{1/2} 1), and I - W_{i+1} approximating
// I - (W_i^{(alpha)})^2 to eps_hat. lambda_hat is the certified lower bound on
// the normalized symmetrization's smallest nonzero eigenvalue.
struct SquareChain {
  Vec deg;
  Vec dsqrt, dinvsqrt;          // cached D^{1/2}, D^{-1/2}
  Vec kernel;                   // unit vector along D^{1/2} 1
  std::vector<NormalizedWalk> walks;
  double alpha = 0.25;
  double eps_hat = 0;
  int d = 0;
  double lambda_hat = 0;
  std::vector<double> level_gap;  // measured lambda*(I - U_{W_i}) per level (may be empty)

  int n() const { return (int)deg.size(); }
};

struct BuildOptions {
  // Stop squaring once the measured level gap reaches this (0 = always build the
  // full requested d). The chain only exists to push the end-of-chain gap to a
  // constant; past that, extra levels are pure cost.
  double stop_lambda = 0;
  bool measure_levels = true;  // deflated power estimates per level -> level_gap
  int gap_iters = 200;
  uint64_t level_nnz_cap = 30'000'000;  // DimensionCap beyond this (bench memory guard)
  EulerianSparsifyOptions sparsify;
};

// W_0 from an Eulerian sparsification of L at accuracy 1/20 and budget p/(d+1),
// then d rounds of lazy squaring, each re-sparsified at accuracy eps and budget
// p/(d+1). alpha must be 1/4 (the chain analysis is specific to it).
SquareChain build_chain(const DirectedLaplacian& L, int d, double alpha, double eps,
                        double p, uint64_t seed, const BuildOptions& opt = {});

// x_{k+1} = x_k + eta * Z(b - M x_k) from x_0 = 0; returns x_N. The induced map
// b -> x_N is linear and kernel-preserving, so it is also exposed as an operator.
Vec precon_richardson(const LinearOperator& m, const LinearOperator& z, const Vec& b,
                      double eta, int iters);
LinearOperator precon_richardson_op(const LinearOperator& m, const LinearOperator& z,
                                    double eta, int iters);

// Operator views of chain pieces (all share the chain's meter).
LinearOperator walk_operator(const SquareChain& chain, int i,
                             const std::shared_ptr<CostMeter>& meter);       // W_i
LinearOperator shifted_laplacian_operator(const SquareChain& chain, int i,
                                          const std::shared_ptr<CostMeter>& meter);  // I - W_i

// (1-alpha)^delta * inner * (I + W_{i+delta-1}^{(alpha)}) ... (I + W_i^{(alpha)}),
// the descent product around a sub-solver for level i+delta. Exposed so tests can
// substitute an exact inner pseudoinverse and measure the error law directly.
LinearOperator chain_descent(const SquareChain& chain, int i, int delta,
                             const LinearOperator& inner,
                             const std::shared_ptr<CostMeter>& meter);

struct SolveOptions {
  // Outer Richardson count N = ceil(c_out * ln(1/eps)). The faithful constant 10
  // buys nothing once the preconditioner quality is a small constant; see notes.
  double c_out = 1.5;
  // Faithful inner constants: literal exp(-5*delta)/30 recursion accuracies and
  // c_out = 10. Used by unit tests on small chains; impractical at depth.
  bool paper_mode = false;
  double stop_lambda = 0.225;  // forwarded to BuildOptions.stop_lambda
  int d_cap = 200;
  uint64_t c_budget = 64;      // application budget c * n * 2^{3 sqrt(d log2 d)}
  double p = 0;                // chain failure budget; 0 -> 1/n^2
  int lambda_iters = 40;
  bool measure_residual = true;
  BuildOptions build;
};

struct SolveReport {
  double lambda_hat = 0;
  int d = 0;
  double eps_hat = 0;
  double ell = 0;              // base-case step bound actually used
  double lambda_end = 0;       // measured gap at the last level
  uint64_t applications = 0;
  uint64_t budget = 0;
  double wall_seconds = 0;
  double residual = -1;        // ||L x - b||_2 / ||b||_2 (-1 if not measured)
  bool b_projected = false;    // nontrivial component along 1 was removed
  int outer_iters = 0;
  int chain_nnz = 0;           // total stored entries across walks
};

// Recursive solver pieces, exposed for tests. Both return operators acting in the
// normalized coordinates (apply to D^{1/2}-scaled vectors).
LinearOperator base_solver(const SquareChain& chain, double lambda_hat, double eps,
                           const std::shared_ptr<CostMeter>& meter, double* ell_out = nullptr);
LinearOperator solve_recursive(const SquareChain& chain, int i, double lambda_hat,
                               double eps, const std::shared_ptr<CostMeter>& meter,
                               bool paper_mode = false, double* ell_out = nullptr);

// Certified bracket for lambda*(U of D^{-1/2} L D^{-1/2}): inverse powering with
// Jacobi-CG inner solves, Rayleigh quotient halved for the lower bound.
// LambdaEstimateFailed if the iteration cannot certify a positive value.
double estimate_lambda(const DirectedLaplacian& L, int iters, uint64_t seed);

// Full Eulerian solve: estimate lambda, build the chain, precondition the outer
// Richardson on D^{-1/2} L D^{-1/2} with the recursive solver, undo the scaling.
// b is projected orthogonal to 1 when it has a component above 1e-12 (flagged).
Vec solve_eulerian(const DirectedLaplacian& L, const Vec& b, double eps, uint64_t seed,
                   const SolveOptions& opt = {}, SolveReport* report = nullptr);

}  // namespace dirlap
