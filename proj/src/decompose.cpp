#include "dirlap/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dirlap/rng.hpp"

namespace dirlap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Deflated power iteration for the top eigenvector of I + D^{-1/2} A D^{-1/2}
// orthogonal to D^{1/2}1, over the index set [0, m) of a graph with all degrees
// positive. Returns the final Rayleigh quotient mu (in [0, 2], approaching
// 2 - gap from below) and leaves the iterate in x.
double deflated_power(const SparseGraph& adj, const Vec& dsqrt, int iters,
                      double stagnation_tol, Rng rng, Vec& x) {
  const int m = adj.n();
  Vec u1(m);
  for (int i = 0; i < m; ++i) u1[i] = dsqrt[i];
  scale(u1, 1.0 / nrm2(u1));

  x = random_unit(m, rng);
  axpy(-dot(x, u1), u1, x);
  double nx = nrm2(x);
  if (nx < 1e-14) {  // start collided with the kernel direction; nudge and retry
    x.assign(m, 0.0);
    x[0] = 1.0;
    axpy(-dot(x, u1), u1, x);
    nx = nrm2(x);
  }
  scale(x, 1.0 / nx);

  Vec t(m), y(m);
  double mu = 0.0, mu_prev = kInf;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < m; ++i) t[i] = x[i] / dsqrt[i];
    std::fill(y.begin(), y.end(), 0.0);
    for (const Entry& e : adj.entries())
      if (e.row != e.col) y[e.row] += e.w * t[e.col];
    for (int i = 0; i < m; ++i) y[i] = x[i] + y[i] / dsqrt[i];
    mu = dot(x, y);
    axpy(-dot(y, u1), u1, y);
    double ny = nrm2(y);
    if (ny < 1e-14) break;  // iterate vanished off-kernel; keep the last x
    scale(y, 1.0 / ny);
    x = y;
    if (std::fabs(mu - mu_prev) <= stagnation_tol * std::max(1.0, std::fabs(mu))) break;
    mu_prev = mu;
  }
  return mu;
}

void canonical_sort(std::vector<Entry>& es) {
  std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

}  // namespace

double conductance(const SparseGraph& undirected_adj, const std::vector<int>& in_set) {
  const int n = undirected_adj.n();
  if (in_set.empty()) fail(Status::empty_set, "conductance: empty vertex set");
  std::vector<char> mask(n, 0);
  int distinct = 0;
  for (int v : in_set) {
    if (v < 0 || v >= n) fail(Status::invalid_argument, "conductance: vertex id out of range");
    if (!mask[v]) {
      mask[v] = 1;
      ++distinct;
    }
  }
  if (distinct == n) fail(Status::full_set, "conductance: set covers every vertex");

  Vec deg = undirected_adj.row_sums();
  double vol_s = 0.0, vol_total = 0.0;
  for (int v = 0; v < n; ++v) {
    vol_total += deg[v];
    if (mask[v]) vol_s += deg[v];
  }
  double cut = 0.0;
  for (const Entry& e : undirected_adj.entries())
    if (e.row != e.col && mask[e.row] && !mask[e.col]) cut += e.w;

  double denom = std::min(vol_s, vol_total - vol_s);
  if (denom <= 0.0) return 0.0;  // one side carries no volume, so no edge can cross
  return cut / denom;
}

SweepCut cheeger_sweep(const SparseGraph& undirected_adj, uint64_t seed,
                       const SweepOptions& opt) {
  const int n = undirected_adj.n();
  Vec deg = undirected_adj.row_sums();
  std::vector<int> supp;
  for (int v = 0; v < n; ++v)
    if (deg[v] > 0) supp.push_back(v);
  const int m = (int)supp.size();
  if (m < 2) return {{}, kInf};  // nothing to cut

  // Disconnected support: report the lightest component at phi = 0.
  UnionFind uf(n);
  for (const Entry& e : undirected_adj.entries())
    if (e.row != e.col) uf.unite(e.row, e.col);
  {
    int root0 = uf.find(supp[0]);
    bool split = false;
    for (int v : supp)
      if (uf.find(v) != root0) {
        split = true;
        break;
      }
    if (split) {
      // volume per root; pick the smallest (ties to the lowest vertex id)
      std::vector<int> roots;
      Vec vol;
      std::vector<int> first;
      for (int v : supp) {
        int r = uf.find(v);
        size_t k = 0;
        for (; k < roots.size(); ++k)
          if (roots[k] == r) break;
        if (k == roots.size()) {
          roots.push_back(r);
          vol.push_back(0.0);
          first.push_back(v);
        }
        vol[k] += deg[v];
      }
      size_t best = 0;
      for (size_t k = 1; k < roots.size(); ++k)
        if (vol[k] < vol[best] || (vol[k] == vol[best] && first[k] < first[best])) best = k;
      SweepCut out;
      out.phi = 0.0;
      for (int v : supp)
        if (uf.find(v) == roots[best]) out.cut.push_back(v);
      return out;
    }
  }

  // Compact to the support and run the sweep there.
  std::vector<int> loc(n, -1);
  for (int i = 0; i < m; ++i) loc[supp[i]] = i;
  std::vector<Entry> les;
  les.reserve(undirected_adj.nnz());
  for (const Entry& e : undirected_adj.entries())
    if (e.row != e.col) les.push_back({loc[e.row], loc[e.col], e.w});
  SparseGraph local = SparseGraph::from_triplets(m, std::move(les), Kind::adjacency);
  Vec ldeg = local.row_sums();
  Vec dsqrt(m);
  for (int i = 0; i < m; ++i) dsqrt[i] = std::sqrt(ldeg[i]);
  double vol_total = 0.0;
  for (int i = 0; i < m; ++i) vol_total += ldeg[i];

  Rng root(seed);
  double best_phi = kInf;
  std::vector<int> best_prefix;

  Vec x;
  std::vector<char> in_s(m);
  std::vector<int> order(m);
  for (int trial = 0; trial < std::max(1, opt.trials); ++trial) {
    deflated_power(local, dsqrt, opt.iters, opt.stagnation_tol, root.child((uint64_t)trial), x);

    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double ca = x[a] / dsqrt[a], cb = x[b] / dsqrt[b];
      return ca != cb ? ca < cb : supp[a] < supp[b];
    });

    std::fill(in_s.begin(), in_s.end(), 0);
    double vol_s = 0.0, cut = 0.0;
    int best_k = -1;
    double trial_best = kInf;
    for (int k = 0; k + 1 < m; ++k) {
      int v = order[k];
      in_s[v] = 1;
      vol_s += ldeg[v];
      const auto& rp = local.row_ptr();
      for (size_t idx = rp[v]; idx < rp[v + 1]; ++idx) {
        const Entry& e = local.entries()[idx];
        cut += in_s[e.col] ? -e.w : e.w;
      }
      double phi = cut / std::min(vol_s, vol_total - vol_s);
      if (phi < trial_best) {
        trial_best = phi;
        best_k = k;
      }
    }
    if (trial_best < best_phi) {
      best_phi = trial_best;
      best_prefix.assign(order.begin(), order.begin() + best_k + 1);
    }
  }

  SweepCut out;
  out.phi = best_phi;
  out.cut.reserve(best_prefix.size());
  for (int i : best_prefix) out.cut.push_back(supp[i]);
  std::sort(out.cut.begin(), out.cut.end());
  return out;
}

double normalized_gap_estimate(const SparseGraph& undirected_adj, int iters, uint64_t seed) {
  const int n = undirected_adj.n();
  Vec deg = undirected_adj.row_sums();
  std::vector<int> supp;
  for (int v = 0; v < n; ++v)
    if (deg[v] > 0) supp.push_back(v);
  const int m = (int)supp.size();
  if (m < 2) return 0.0;

  std::vector<int> loc(n, -1);
  for (int i = 0; i < m; ++i) loc[supp[i]] = i;
  std::vector<Entry> les;
  for (const Entry& e : undirected_adj.entries())
    if (e.row != e.col) les.push_back({loc[e.row], loc[e.col], e.w});
  SparseGraph local = SparseGraph::from_triplets(m, std::move(les), Kind::adjacency);
  Vec ldeg = local.row_sums();
  Vec dsqrt(m);
  for (int i = 0; i < m; ++i) dsqrt[i] = std::sqrt(ldeg[i]);

  Rng root(Rng::mix64(seed) ^ 0x9a99a11eULL);
  Vec x;
  double mu = 0.0;
  for (int trial = 0; trial < 2; ++trial)
    mu = std::max(mu, deflated_power(local, dsqrt, iters, 1e-8, root.child((uint64_t)trial), x));
  return std::max(0.0, 2.0 - mu);
}

Decomposition find_decomposition(const DirectedLaplacian& L, double phi_target,
                                 uint64_t seed, const DecomposeOptions& opt) {
  const int n = L.n();
  double target = phi_target;
  if (target <= 0.0) {
    double lg = std::log2((double)n + 1.0);
    target = opt.c_phi / std::max(1.0, lg * lg);
  }
  if (!(target > 0.0 && target < 1.0))
    fail(Status::invalid_argument, "find_decomposition: phi_target must lie in (0, 1)");

  Decomposition out;
  out.phi_target = target;
  out.alpha = 0.25 * target * target;
  out.beta = 1.0;

  std::vector<Entry> edges;  // self-loops carry no Laplacian mass
  for (const Entry& e : L.adjacency().entries())
    if (e.row != e.col) edges.push_back(e);
  if (edges.empty()) return out;

  double wmin = kInf, wmax = 0.0;
  for (const Entry& e : edges) {
    wmin = std::min(wmin, e.w);
    wmax = std::max(wmax, e.w);
  }
  int b = wmax > wmin ? (int)std::ceil(std::log2(wmax / wmin)) : 0;
  std::vector<std::vector<Entry>> bucket_edges(b + 1);
  for (const Entry& e : edges) {
    int t = e.w > wmin ? std::min(b, (int)std::floor(std::log2(e.w / wmin))) : 0;
    bucket_edges[std::max(0, t)].push_back(e);
  }
  int nonempty = 0;
  for (const auto& be : bucket_edges)
    if (!be.empty()) ++nonempty;
  out.buckets = nonempty;

  const uint64_t salt = Rng::mix64(seed ^ 0xdeca15edULL);

  auto locate = [](const std::vector<int>& verts, int v) {
    return (int)(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };

  auto certify = [&](std::vector<Entry>& g, double phi, int bucket) {
    std::vector<int> vs;
    vs.reserve(2 * g.size());
    for (const Entry& e : g) {
      vs.push_back(e.row);
      vs.push_back(e.col);
    }
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    out.total_support += vs.size();

    DirectedLaplacian piece =
        DirectedLaplacian::from_adjacency(SparseGraph::from_triplets(n, g, Kind::adjacency));
    out.covers.push_back(piece.graph_symmetrization());
    out.pieces.push_back(std::move(piece));
    out.piece_phi.push_back(phi);
    out.piece_bucket.push_back(bucket);
  };

  int worst_rounds = 0;
  for (int t = 0; t <= b; ++t) {
    std::vector<Entry> residue = std::move(bucket_edges[t]);
    if (residue.empty()) continue;
    const int cap = opt.max_rounds_override > 0
                        ? opt.max_rounds_override
                        : std::max(1, (int)std::ceil(std::log2((double)residue.size())));
    int round = 0;
    while (!residue.empty()) {
      if (round >= cap)
        fail(Status::nonterminating_decomposition,
             "find_decomposition: bucket " + std::to_string(t) + " still has " +
                 std::to_string(residue.size()) + " edges after " + std::to_string(round) +
                 " rounds");
      ++round;
      std::vector<Entry> next;
      std::vector<std::vector<Entry>> work;
      work.push_back(std::move(residue));
      while (!work.empty()) {
        std::vector<Entry> g = std::move(work.back());
        work.pop_back();
        if (g.empty()) continue;
        canonical_sort(g);

        std::vector<int> verts;
        verts.reserve(2 * g.size());
        for (const Entry& e : g) {
          verts.push_back(e.row);
          verts.push_back(e.col);
        }
        std::sort(verts.begin(), verts.end());
        verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
        const int m = (int)verts.size();

        if (g.size() > 1) {
          UnionFind uf(m);
          for (const Entry& e : g) uf.unite(locate(verts, e.row), locate(verts, e.col));
          if (uf.components() > 1) {
            std::vector<int> root_group(m, -1);
            std::vector<std::vector<Entry>> groups;
            for (const Entry& e : g) {
              int r = uf.find(locate(verts, e.row));
              if (root_group[r] < 0) {
                root_group[r] = (int)groups.size();
                groups.emplace_back();
              }
              groups[root_group[r]].push_back(e);
            }
            for (auto& grp : groups) work.push_back(std::move(grp));
            continue;
          }
        }
        if (g.size() == 1) {  // a lone edge is a perfect expander: phi = 1
          certify(g, 1.0, t);
          continue;
        }

        std::vector<Entry> tri;
        tri.reserve(2 * g.size());
        for (const Entry& e : g) {
          int lu = locate(verts, e.row), lv = locate(verts, e.col);
          tri.push_back({lu, lv, e.w / 2});
          tri.push_back({lv, lu, e.w / 2});
        }
        SparseGraph local_u = SparseGraph::from_triplets(m, std::move(tri), Kind::adjacency);

        uint64_t h = salt ^ Rng::mix64(((uint64_t)t << 40) ^ (uint64_t)round);
        for (const Entry& e : g)
          h = Rng::mix64(h ^ (((uint64_t)(uint32_t)e.row << 32) | (uint64_t)(uint32_t)e.col));

        SweepCut sc = cheeger_sweep(local_u, h, opt.sweep);
        if (!(sc.phi < target) || sc.cut.empty() || (int)sc.cut.size() >= m) {
          certify(g, sc.phi, t);
          continue;
        }

        std::vector<char> inc(m, 0);
        for (int v : sc.cut) inc[v] = 1;
        std::vector<Entry> side_a, side_b;
        for (const Entry& e : g) {
          bool iu = inc[locate(verts, e.row)], iv = inc[locate(verts, e.col)];
          if (iu && iv)
            side_a.push_back(e);
          else if (!iu && !iv)
            side_b.push_back(e);
          else
            next.push_back(e);  // crossing edges try again next round
        }
        if (!side_a.empty()) work.push_back(std::move(side_a));
        if (!side_b.empty()) work.push_back(std::move(side_b));
      }
      residue = std::move(next);
    }
    worst_rounds = std::max(worst_rounds, round);
  }
  out.rounds_max = worst_rounds;
  out.beta = std::max(1.0, (double)worst_rounds * (double)nonempty);
  return out;
}

}  // namespace dirlap
