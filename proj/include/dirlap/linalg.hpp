#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dirlap/errors.hpp"
#include "dirlap/rng.hpp"

namespace dirlap {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double nrm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double nrm1(const Vec& a) {
  double s = 0;
  for (double v : a) s += std::fabs(v);
  return s;
}

inline double nrm_inf(const Vec& a) {
  double s = 0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline Vec random_unit(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_double() * 2.0 - 1.0;
  double nv = nrm2(v);
  if (nv == 0) v[0] = 1.0;
  else scale(v, 1.0 / nv);
  return v;
}

// v minus its component along k; k must be nonzero.
inline Vec project_orthogonal(const Vec& v, const Vec& k) {
  if (v.size() != k.size()) fail(Status::dimension_mismatch, "project_orthogonal: size mismatch");
  double kk = dot(k, k);
  if (kk == 0) fail(Status::zero_kernel_vector, "project_orthogonal: zero kernel vector");
  Vec out = v;
  axpy(-dot(v, k) / kk, k, out);
  return out;
}

// Disjoint-set forest for component tracking (scale ladder, decomposition, SCC-free
// undirected checks).
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), rank_(n, 0), comps_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    --comps_;
    return true;
  }
  int components() const { return comps_; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  int comps_;
};

}  // namespace dirlap
