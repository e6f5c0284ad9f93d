#include "dirlap/gen.hpp"

#include <algorithm>
#include <numeric>

namespace dirlap::gen {

namespace {

void shuffle(std::vector<int>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.next_below(i)]);
}

void add_cycle(std::vector<Entry>& out, const std::vector<int>& verts, double w) {
  for (size_t i = 0; i < verts.size(); ++i)
    out.push_back({verts[i], verts[(i + 1) % verts.size()], w});
}

}  // namespace

SparseGraph complete_bidirected(int n, double w) {
  std::vector<Entry> t;
  t.reserve(static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) t.push_back({i, j, w});
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph directed_cycle(int n, double w) {
  std::vector<Entry> t;
  for (int i = 0; i < n; ++i) t.push_back({i, (i + 1) % n, w});
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph bidirected_cycle(int n, const Vec& weights) {
  std::vector<Entry> t;
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    t.push_back({i, j, weights[i]});
    t.push_back({j, i, weights[i]});
  }
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph bidirected_path(int n, const Vec& weights) {
  std::vector<Entry> t;
  for (int i = 0; i + 1 < n; ++i) {
    t.push_back({i, i + 1, weights[i]});
    t.push_back({i + 1, i, weights[i]});
  }
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph cycle_union(int n, int covers, double wmin, double wmax, Rng& rng) {
  std::vector<Entry> t;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  add_cycle(t, order, wmin);  // strong connectivity floor
  for (int c = 0; c < covers; ++c) {
    shuffle(order, rng);
    add_cycle(t, order, rng.next_range(wmin, wmax));
  }
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph er_eulerian(int n, int target_m, double wmin, double wmax, Rng& rng) {
  std::vector<Entry> t;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  add_cycle(t, order, wmin);
  while (static_cast<int>(t.size()) < target_m) {
    int len = 2 + static_cast<int>(rng.next_below(std::max(2, n / 2)));
    len = std::min(len, n);
    shuffle(order, rng);
    std::vector<int> cyc(order.begin(), order.begin() + len);
    add_cycle(t, cyc, rng.next_range(wmin, wmax));
  }
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph er_strongly_connected(int n, double p, double wmin, double wmax, Rng& rng) {
  std::vector<Entry> t;
  for (int i = 0; i < n; ++i) t.push_back({i, (i + 1) % n, wmin});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.next_double() < p) t.push_back({i, j, rng.next_range(wmin, wmax)});
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph two_scale_eulerian(int n, double ratio, Rng& rng) {
  std::vector<Entry> t;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  add_cycle(t, order, 1.0);
  for (int c = 0; c < 3; ++c) {
    shuffle(order, rng);
    add_cycle(t, order, 1.0);
    shuffle(order, rng);
    add_cycle(t, order, ratio);
  }
  return SparseGraph::from_triplets(n, std::move(t), Kind::adjacency);
}

SparseGraph barbell(int k, double w) {
  std::vector<Entry> t;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) {
        t.push_back({i, j, w});
        t.push_back({k + i, k + j, w});
      }
  t.push_back({k - 1, k, w});
  t.push_back({k, k - 1, w});
  return SparseGraph::from_triplets(2 * k, std::move(t), Kind::adjacency);
}

SparseGraph star_bidirected(int leaves, double w) {
  std::vector<Entry> t;
  for (int i = 1; i <= leaves; ++i) {
    t.push_back({0, i, w});
    t.push_back({i, 0, w});
  }
  return SparseGraph::from_triplets(leaves + 1, std::move(t), Kind::adjacency);
}

}  // namespace dirlap::gen
