#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirlap/errors.hpp"
#include "dirlap/linalg.hpp"

namespace dirlap {

struct Entry {
  int row;
  int col;
  double w;
};

enum class Kind { adjacency, general };

// Immutable sparse matrix in canonical row-major triplet order (ties by column,
// duplicates summed at ingest, exact zeros dropped). `adjacency` entries must be
// strictly positive and, unless allow_loops is set, off-diagonal.
class SparseGraph {
 public:
  SparseGraph() = default;

  static SparseGraph from_triplets(int n, std::vector<Entry> entries, Kind kind,
                                   bool allow_loops = false);

  int n() const { return n_; }
  Kind kind() const { return kind_; }
  bool allow_loops() const { return allow_loops_; }
  size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<size_t>& row_ptr() const { return row_ptr_; }

  Vec row_sums() const;
  Vec col_sums() const;
  double weight_min() const;  // over stored entries, by absolute value
  double weight_max() const;

  SparseGraph transpose() const;
  SparseGraph scaled(double a) const;
  static SparseGraph sum(const SparseGraph& a, const SparseGraph& b);
  static SparseGraph diff(const SparseGraph& a, const SparseGraph& b);  // a - b, general

  // y = M x and y = M^T x
  void matvec(const double* x, double* y) const;
  void matvec_t(const double* x, double* y) const;
  Vec matvec(const Vec& x) const;
  Vec matvec_t(const Vec& x) const;

  bool same_pattern_subset_of(const SparseGraph& other) const;

 private:
  int n_ = 0;
  Kind kind_ = Kind::general;
  bool allow_loops_ = false;
  std::vector<Entry> entries_;
  std::vector<size_t> row_ptr_;
};

// Directed Laplacian L = D - A^T over a nonnegative adjacency A with out-degrees
// D = diag(A 1). Immutable; the eulerian flag is settled at construction against
// tol_eul (default 1e-12 * tr(D)/n).
class DirectedLaplacian {
 public:
  static DirectedLaplacian from_adjacency(SparseGraph adj,
                                          std::optional<double> tol_eul = std::nullopt);

  int n() const { return adj_.n(); }
  const SparseGraph& adjacency() const { return adj_; }
  const Vec& out_degrees() const { return deg_; }
  Vec in_degrees() const { return adj_.col_sums(); }
  bool eulerian() const { return eulerian_; }
  double eulerian_tol() const { return tol_; }

  // L 1 = out - in, zero iff Eulerian
  Vec eulerian_defect() const;

  SparseGraph matrix() const;                 // L as a general sparse matrix
  SparseGraph symmetrization() const;         // U_L = (L + L^T)/2
  SparseGraph graph_symmetrization() const;   // S_L = diag(U_A 1) - U_A (loops cancel)

  void apply(const double* x, double* y) const;    // y = L x
  void apply_t(const double* x, double* y) const;  // y = L^T x
  Vec apply(const Vec& x) const;
  Vec apply_t(const Vec& x) const;

 private:
  DirectedLaplacian() = default;
  SparseGraph adj_;
  Vec deg_;
  bool eulerian_ = false;
  double tol_ = 0;
};

// W_hat = D^{-1/2} A^T D^{-1/2} together with the degrees that undo it:
// L = D^{1/2} (I - W_hat) D^{1/2}.
struct NormalizedWalk {
  SparseGraph walk;
  Vec deg;
  int n() const { return walk.n(); }
};

// Errors NegativeWeight / NonFinite with the worst violated row named; zero
// out-degree vertices are accepted here (normalize rejects them).
void validate_laplacian(const SparseGraph& adj);

NormalizedWalk normalize(const DirectedLaplacian& L);          // ZeroDegreeVertex
DirectedLaplacian denormalize(const NormalizedWalk& walk);     // exact round-trip partner

// Strong connectivity of the directed adjacency (Tarjan).
bool strongly_connected(const SparseGraph& adj);

// Connected components of the support of a symmetric matrix (or of U_A for a
// directed one); labels in [0, k).
std::vector<int> undirected_components(const SparseGraph& g, int* count = nullptr);

}  // namespace dirlap
