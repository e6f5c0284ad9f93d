#include "dirlap/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dirlap {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "Ok";
    case Status::negative_weight: return "NegativeWeight";
    case Status::non_finite: return "NonFinite";
    case Status::empty_matrix: return "EmptyMatrix";
    case Status::zero_degree_vertex: return "ZeroDegreeVertex";
    case Status::zero_kernel_vector: return "ZeroKernelVector";
    case Status::self_loop: return "SelfLoop";
    case Status::dimension_mismatch: return "DimensionMismatch";
    case Status::deficit_mismatch: return "DeficitMismatch";
    case Status::oversample_exhausted: return "OversampleExhausted";
    case Status::empty_set: return "EmptySet";
    case Status::full_set: return "FullSet";
    case Status::nonterminating_decomposition: return "NonterminatingDecomposition";
    case Status::not_eulerian: return "NotEulerian";
    case Status::not_strongly_connected: return "NotStronglyConnected";
    case Status::norm_mismatch: return "NormMismatch";
    case Status::row_col_mismatch: return "RowColMismatch";
    case Status::chain_kernel_drift: return "ChainKernelDrift";
    case Status::recursion_budget_exceeded: return "RecursionBudgetExceeded";
    case Status::lambda_estimate_failed: return "LambdaEstimateFailed";
    case Status::inner_solver_failure: return "InnerSolverFailure";
    case Status::dimension_cap: return "DimensionCap";
    case Status::kernel_mismatch: return "KernelMismatch";
    case Status::not_psd_symmetrization: return "NotPSDSymmetrization";
    case Status::io_error: return "IoError";
    case Status::usage_error: return "UsageError";
    case Status::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

SparseGraph SparseGraph::from_triplets(int n, std::vector<Entry> entries, Kind kind,
                                       bool allow_loops) {
  if (n < 0) fail(Status::invalid_argument, "matrix order must be nonnegative");
  SparseGraph g;
  g.n_ = n;
  g.kind_ = kind;
  g.allow_loops_ = allow_loops;

  for (const Entry& e : entries) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      fail(Status::invalid_argument, "entry (" + std::to_string(e.row) + "," +
                                         std::to_string(e.col) + ") out of range for order " +
                                         std::to_string(n));
    if (!std::isfinite(e.w))
      fail(Status::non_finite, "non-finite weight at row " + std::to_string(e.row));
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // sum duplicates, drop exact zeros
  std::vector<Entry> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!out.empty() && out.back().row == e.row && out.back().col == e.col)
      out.back().w += e.w;
    else
      out.push_back(e);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Entry& e) { return e.w == 0.0; }),
            out.end());

  if (kind == Kind::adjacency) {
    for (const Entry& e : out) {
      if (e.w < 0)
        fail(Status::negative_weight, "negative adjacency weight at row " + std::to_string(e.row));
      if (e.row == e.col && !allow_loops)
        fail(Status::self_loop, "self-loop at vertex " + std::to_string(e.row) +
                                    " (pass allow_loops for square-walk matrices)");
    }
  }

  g.entries_ = std::move(out);
  g.row_ptr_.assign(n + 1, 0);
  for (const Entry& e : g.entries_) ++g.row_ptr_[e.row + 1];
  for (int i = 0; i < n; ++i) g.row_ptr_[i + 1] += g.row_ptr_[i];
  return g;
}

Vec SparseGraph::row_sums() const {
  Vec s(n_, 0.0);
  for (const Entry& e : entries_) s[e.row] += e.w;
  return s;
}

Vec SparseGraph::col_sums() const {
  Vec s(n_, 0.0);
  for (const Entry& e : entries_) s[e.col] += e.w;
  return s;
}

double SparseGraph::weight_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Entry& e : entries_) m = std::min(m, std::fabs(e.w));
  return m;
}

double SparseGraph::weight_max() const {
  double m = 0;
  for (const Entry& e : entries_) m = std::max(m, std::fabs(e.w));
  return m;
}

SparseGraph SparseGraph::transpose() const {
  std::vector<Entry> t;
  t.reserve(entries_.size());
  for (const Entry& e : entries_) t.push_back({e.col, e.row, e.w});
  return from_triplets(n_, std::move(t), kind_, allow_loops_);
}

SparseGraph SparseGraph::scaled(double a) const {
  std::vector<Entry> t = entries_;
  for (Entry& e : t) e.w *= a;
  Kind k = (kind_ == Kind::adjacency && a < 0) ? Kind::general : kind_;
  return from_triplets(n_, std::move(t), k, allow_loops_);
}

SparseGraph SparseGraph::sum(const SparseGraph& a, const SparseGraph& b) {
  if (a.n() != b.n()) fail(Status::dimension_mismatch, "sum: order mismatch");
  std::vector<Entry> t = a.entries_;
  t.insert(t.end(), b.entries_.begin(), b.entries_.end());
  Kind k = (a.kind_ == Kind::adjacency && b.kind_ == Kind::adjacency) ? Kind::adjacency
                                                                      : Kind::general;
  return from_triplets(a.n(), std::move(t), k, a.allow_loops_ || b.allow_loops_);
}

SparseGraph SparseGraph::diff(const SparseGraph& a, const SparseGraph& b) {
  if (a.n() != b.n()) fail(Status::dimension_mismatch, "diff: order mismatch");
  std::vector<Entry> t = a.entries_;
  t.reserve(t.size() + b.entries_.size());
  for (const Entry& e : b.entries_) t.push_back({e.row, e.col, -e.w});
  return from_triplets(a.n(), std::move(t), Kind::general, true);
}

void SparseGraph::matvec(const double* x, double* y) const {
  std::fill(y, y + n_, 0.0);
  for (const Entry& e : entries_) y[e.row] += e.w * x[e.col];
}

void SparseGraph::matvec_t(const double* x, double* y) const {
  std::fill(y, y + n_, 0.0);
  for (const Entry& e : entries_) y[e.col] += e.w * x[e.row];
}

Vec SparseGraph::matvec(const Vec& x) const {
  Vec y(n_);
  matvec(x.data(), y.data());
  return y;
}

Vec SparseGraph::matvec_t(const Vec& x) const {
  Vec y(n_);
  matvec_t(x.data(), y.data());
  return y;
}

bool SparseGraph::same_pattern_subset_of(const SparseGraph& other) const {
  if (n_ != other.n_) return false;
  size_t j = 0;
  for (const Entry& e : entries_) {
    while (j < other.entries_.size() &&
           (other.entries_[j].row < e.row ||
            (other.entries_[j].row == e.row && other.entries_[j].col < e.col)))
      ++j;
    if (j == other.entries_.size() || other.entries_[j].row != e.row ||
        other.entries_[j].col != e.col)
      return false;
  }
  return true;
}

void validate_laplacian(const SparseGraph& adj) {
  int worst_row = -1;
  double worst = 0;
  Status code = Status::ok;
  for (const Entry& e : adj.entries()) {
    if (!std::isfinite(e.w)) {
      code = Status::non_finite;
      worst_row = e.row;
      break;
    }
    if (e.w < 0 && -e.w > worst) {
      code = Status::negative_weight;
      worst = -e.w;
      worst_row = e.row;
    }
  }
  if (code != Status::ok)
    fail(code, std::string(status_name(code)) + ": worst violated row " +
                   std::to_string(worst_row));
}

DirectedLaplacian DirectedLaplacian::from_adjacency(SparseGraph adj,
                                                    std::optional<double> tol_eul) {
  validate_laplacian(adj);
  DirectedLaplacian L;
  L.deg_ = adj.row_sums();
  double tr = std::accumulate(L.deg_.begin(), L.deg_.end(), 0.0);
  L.tol_ = tol_eul ? *tol_eul : (adj.n() > 0 ? 1e-12 * tr / adj.n() : 0.0);
  Vec in = adj.col_sums();
  double defect = 0;
  for (int i = 0; i < adj.n(); ++i) defect = std::max(defect, std::fabs(L.deg_[i] - in[i]));
  L.eulerian_ = defect <= L.tol_;
  L.adj_ = std::move(adj);
  return L;
}

Vec DirectedLaplacian::eulerian_defect() const {
  Vec d = deg_;
  Vec in = adj_.col_sums();
  for (int i = 0; i < n(); ++i) d[i] -= in[i];
  return d;
}

SparseGraph DirectedLaplacian::matrix() const {
  std::vector<Entry> t;
  t.reserve(adj_.nnz() + n());
  for (int i = 0; i < n(); ++i)
    if (deg_[i] != 0) t.push_back({i, i, deg_[i]});
  for (const Entry& e : adj_.entries()) t.push_back({e.col, e.row, -e.w});
  return SparseGraph::from_triplets(n(), std::move(t), Kind::general, true);
}

SparseGraph DirectedLaplacian::symmetrization() const {
  std::vector<Entry> t;
  t.reserve(2 * adj_.nnz() + n());
  for (int i = 0; i < n(); ++i)
    if (deg_[i] != 0) t.push_back({i, i, deg_[i]});
  for (const Entry& e : adj_.entries()) {
    t.push_back({e.col, e.row, -0.5 * e.w});
    t.push_back({e.row, e.col, -0.5 * e.w});
  }
  return SparseGraph::from_triplets(n(), std::move(t), Kind::general, true);
}

SparseGraph DirectedLaplacian::graph_symmetrization() const {
  // S_L = diag(U_A 1) - U_A with U_A = (A + A^T)/2; self-loop mass cancels.
  Vec sdeg(n(), 0.0);
  std::vector<Entry> t;
  t.reserve(2 * adj_.nnz() + n());
  for (const Entry& e : adj_.entries()) {
    if (e.row == e.col) continue;
    sdeg[e.row] += 0.5 * e.w;
    sdeg[e.col] += 0.5 * e.w;
    t.push_back({e.row, e.col, -0.5 * e.w});
    t.push_back({e.col, e.row, -0.5 * e.w});
  }
  for (int i = 0; i < n(); ++i)
    if (sdeg[i] != 0) t.push_back({i, i, sdeg[i]});
  return SparseGraph::from_triplets(n(), std::move(t), Kind::general, true);
}

void DirectedLaplacian::apply(const double* x, double* y) const {
  adj_.matvec_t(x, y);  // y = A^T x
  for (int i = 0; i < n(); ++i) y[i] = deg_[i] * x[i] - y[i];
}

void DirectedLaplacian::apply_t(const double* x, double* y) const {
  adj_.matvec(x, y);
  for (int i = 0; i < n(); ++i) y[i] = deg_[i] * x[i] - y[i];
}

Vec DirectedLaplacian::apply(const Vec& x) const {
  Vec y(n());
  apply(x.data(), y.data());
  return y;
}

Vec DirectedLaplacian::apply_t(const Vec& x) const {
  Vec y(n());
  apply_t(x.data(), y.data());
  return y;
}

NormalizedWalk normalize(const DirectedLaplacian& L) {
  const Vec& d = L.out_degrees();
  for (int i = 0; i < L.n(); ++i)
    if (d[i] <= 0)
      fail(Status::zero_degree_vertex, "normalize: zero out-degree at vertex " + std::to_string(i));
  Vec rs(L.n());
  for (int i = 0; i < L.n(); ++i) rs[i] = 1.0 / std::sqrt(d[i]);
  std::vector<Entry> t;
  t.reserve(L.adjacency().nnz());
  for (const Entry& e : L.adjacency().entries())
    t.push_back({e.col, e.row, e.w * rs[e.col] * rs[e.row]});
  NormalizedWalk w;
  w.walk = SparseGraph::from_triplets(L.n(), std::move(t), Kind::general, true);
  w.deg = d;
  return w;
}

DirectedLaplacian denormalize(const NormalizedWalk& w) {
  Vec rs(w.n());
  for (int i = 0; i < w.n(); ++i) {
    if (w.deg[i] <= 0) fail(Status::zero_degree_vertex, "denormalize: zero degree");
    rs[i] = std::sqrt(w.deg[i]);
  }
  std::vector<Entry> t;
  t.reserve(w.walk.nnz());
  for (const Entry& e : w.walk.entries())
    t.push_back({e.col, e.row, e.w * rs[e.row] * rs[e.col]});
  return DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(w.n(), std::move(t), Kind::adjacency, true));
}

namespace {

// Iterative Tarjan SCC; returns number of components.
int tarjan_scc(const SparseGraph& adj) {
  int n = adj.n();
  const auto& rp = adj.row_ptr();
  const auto& es = adj.entries();
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
  std::vector<int> stack, call_v, call_e;
  int next_index = 0, comps = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call_v.push_back(root);
    call_e.push_back(static_cast<int>(rp[root]));
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call_v.empty()) {
      int v = call_v.back();
      int& ei = call_e.back();
      bool advanced = false;
      while (ei < static_cast<int>(rp[v + 1])) {
        int u = es[ei].col;
        ++ei;
        if (index[u] == -1) {
          index[u] = low[u] = next_index++;
          stack.push_back(u);
          on_stack[u] = 1;
          call_v.push_back(u);
          call_e.push_back(static_cast<int>(rp[u]));
          advanced = true;
          break;
        }
        if (on_stack[u]) low[v] = std::min(low[v], index[u]);
      }
      if (advanced) continue;
      if (low[v] == index[v]) {
        ++comps;
        while (true) {
          int u = stack.back();
          stack.pop_back();
          on_stack[u] = 0;
          if (u == v) break;
        }
      }
      call_v.pop_back();
      call_e.pop_back();
      if (!call_v.empty()) low[call_v.back()] = std::min(low[call_v.back()], low[v]);
    }
  }
  return comps;
}

}  // namespace

bool strongly_connected(const SparseGraph& adj) {
  if (adj.n() == 0) return true;
  return tarjan_scc(adj) == 1;
}

std::vector<int> undirected_components(const SparseGraph& g, int* count) {
  UnionFind uf(g.n());
  for (const Entry& e : g.entries())
    if (e.row != e.col && e.w != 0) uf.unite(e.row, e.col);
  std::vector<int> label(g.n(), -1);
  int k = 0;
  for (int i = 0; i < g.n(); ++i) {
    int r = uf.find(i);
    if (label[r] == -1) label[r] = k++;
    label[i] = label[r];
  }
  if (count) *count = k;
  return label;
}

}  // namespace dirlap
