#include "dirlap/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace dirlap {
namespace {

// Largest loop-free product we are willing to write out entry-by-entry when
// sampling would be at least as expensive anyway.
constexpr size_t kMaterializeCap = 4'000'000;

std::vector<int> positive_support(const Vec& v) {
  std::vector<int> s;
  for (int i = 0; i < (int)v.size(); ++i)
    if (v[i] > 0) s.push_back(i);
  return s;
}

// Draw an index from supp weighted by vals, excluding `skip` (whose cumulative
// range is spliced out). prefix[k] = vals over supp[0..k].
int draw_excluding(const std::vector<int>& supp, const Vec& prefix, const Vec& vals, int skip,
                   double total_minus_skip, Rng& rng) {
  double t = rng.next_double() * total_minus_skip;
  auto pos = std::lower_bound(supp.begin(), supp.end(), skip);
  if (pos != supp.end() && *pos == skip) {
    size_t k = (size_t)(pos - supp.begin());
    double before = k == 0 ? 0.0 : prefix[k - 1];
    if (t >= before) t += vals[skip];
  }
  size_t idx = (size_t)(std::upper_bound(prefix.begin(), prefix.end(), t) - prefix.begin());
  if (idx >= supp.size()) idx = supp.size() - 1;
  if (supp[idx] == skip) idx = idx + 1 < supp.size() ? idx + 1 : idx - 1;
  return supp[idx];
}

}  // namespace

DirectedLaplacian sparsify_product(const Vec& x_in, const Vec& y_in, double p, double eps,
                                   uint64_t seed, const SubgraphOptions& opt,
                                   SparsifyStats* stats) {
  if (x_in.size() != y_in.size())
    fail(Status::dimension_mismatch, "sparsify_product: vector sizes differ");
  if (!(p > 0 && p < 1) || !(eps > 0 && eps < 1))
    fail(Status::invalid_argument, "sparsify_product: need p, eps in (0,1)");
  const int n = (int)x_in.size();
  for (int i = 0; i < n; ++i)
    if (x_in[i] < 0 || y_in[i] < 0 || !std::isfinite(x_in[i]) || !std::isfinite(y_in[i]))
      fail(Status::negative_weight, "sparsify_product: vectors must be finite and nonnegative");

  double rx = 0, ry = 0;
  for (int i = 0; i < n; ++i) {
    rx += x_in[i];
    ry += y_in[i];
  }
  if (!(rx > 0)) fail(Status::invalid_argument, "sparsify_product: zero total mass");
  if (std::fabs(rx - ry) > 1e-10 * std::max(rx, ry))
    fail(Status::norm_mismatch, "sparsify_product: |x|_1 and |y|_1 differ beyond tolerance");

  // Force the two masses exactly equal (within the tolerance just checked) so
  // every degree identity downstream is exact rather than 1e-10-close.
  const double r = rx;
  Vec x = x_in, y = y_in;
  if (ry != rx) {
    double f = rx / ry;
    for (double& v : y) v *= f;
  }

  std::vector<int> sx = positive_support(x), sy = positive_support(y);
  const size_t s = sx.size() + sy.size();

  SparsifyStats local;
  SparsifyStats& st = stats ? *stats : local;

  auto exact_return = [&](uint64_t k, uint32_t attempts = 0) {
    std::vector<Entry> es;
    es.reserve(sx.size() * sy.size());
    bool loops = false;
    for (int u : sy)
      for (int v : sx) {
        if (u == v) loops = true;
        es.push_back({u, v, y[u] * x[v] / r});
      }
    st.k = k;
    st.attempts = attempts;
    st.exact = true;
    st.measured_norm = 0.0;
    return DirectedLaplacian::from_adjacency(
        SparseGraph::from_triplets(n, std::move(es), Kind::adjacency, loops));
  };

  if (sx.size() <= 1 || sy.size() <= 1 || s <= opt.exact_below) return exact_return(0);

  // From here on the loop-free part is sampled exactly like the direct entry
  // sparsifier would sample it, at half the requested accuracy (the product's
  // symmetrization has gap >= 1, which converts scaled-norm error one-to-two).
  const double eps_sub = eps / 2;
  const double epsp = eps_sub / 4;

  Vec px(sx.size()), py(sy.size());
  double acc = 0;
  for (size_t k = 0; k < sx.size(); ++k) px[k] = (acc += x[sx[k]]);
  acc = 0;
  for (size_t k = 0; k < sy.size(); ++k) py[k] = (acc += y[sy[k]]);

  size_t overlap = 0;
  for (int u : sy)
    if (x[u] > 0) ++overlap;
  const size_t product_nnz = sx.size() * sy.size() - overlap;

  // Loop-free degree targets of the implicit product.
  Vec row_t(n, 0.0), col_t(n, 0.0);
  for (int u : sy) row_t[u] = y[u] * (r - x[u]) / r;
  for (int v : sx) col_t[v] = x[v] * (r - y[v]) / r;

  // Saturating conversion, same reasoning as the entry sampler: huge formula
  // values immediately trip the exact-materialization branch below.
  const double k0d = std::ceil(opt.c_sample * (double)s *
                               std::log(std::max(2.0, (double)s / p)) / (epsp * epsp));
  const uint64_t k0 = k0d < 9e15 ? (uint64_t)k0d : (uint64_t)9'000'000'000'000'000ULL;

  Rng root(seed);
  for (int attempt = 0; attempt <= opt.max_resamples; ++attempt) {
    uint64_t k = k0;
    for (int a = 0; a < attempt && k < (uint64_t)9e15; ++a) k <<= 1;
    if (k >= product_nnz && product_nnz <= kMaterializeCap)
      return exact_return(k, (uint32_t)attempt);

    Rng rng = root.child((uint64_t)attempt);
    std::map<std::pair<int, int>, uint32_t> counts;
    for (uint64_t t = 0; t < k; ++t) {
      int u, v;
      size_t mode = rng.next_below(s);
      if (mode < sy.size()) {  // tail picked uniformly, head by x-mass
        u = sy[mode];
        v = draw_excluding(sx, px, x, u, r - x[u], rng);
      } else {  // head picked uniformly, tail by y-mass
        v = sx[mode - sy.size()];
        u = draw_excluding(sy, py, y, v, r - y[v], rng);
      }
      ++counts[{u, v}];
    }

    std::vector<Entry> es;
    es.reserve(counts.size());
    for (const auto& [uv, cnt] : counts) {
      auto [u, v] = uv;
      double a_uv = y[u] * x[v] / r;
      double p_uv = (x[v] / (r - x[u]) + y[u] / (r - y[v])) / (double)s;
      es.push_back({u, v, a_uv / p_uv * ((double)cnt / (double)k)});
    }
    SparseGraph ahat = SparseGraph::from_triplets(n, std::move(es), Kind::adjacency);

    double ratio = 1.0 + epsp;
    {
      Vec rs = ahat.row_sums(), cs = ahat.col_sums();
      for (int i = 0; i < n; ++i) {
        if (row_t[i] > 0) ratio = std::max(ratio, rs[i] / row_t[i]);
        if (col_t[i] > 0) ratio = std::max(ratio, cs[i] / col_t[i]);
      }
    }

    PatchMatrix patched;
    try {
      patched = patch_to_degrees(ahat.scaled(1.0 / ratio), row_t, col_t,
                                 /*forbid_diagonal=*/true);
    } catch (const Error& e) {
      if (e.code() == Status::deficit_mismatch) continue;  // resample with more draws
      throw;
    }

    const SparseGraph& am = patched.m;
    auto diff_mv = [&](const double* in, double* out) {
      am.matvec(in, out);
      double xv = 0;
      for (int j : sx) xv += x[j] * in[j];
      for (int u : sy) out[u] -= y[u] * (xv - x[u] * in[u]) / r;
    };
    auto diff_mtv = [&](const double* in, double* out) {
      am.matvec_t(in, out);
      double yv = 0;
      for (int u : sy) yv += y[u] * in[u];
      for (int j : sx) out[j] -= x[j] * (yv - y[j] * in[j]) / r;
    };
    double measured = scaled_norm_estimate(diff_mv, diff_mtv, n, row_t, col_t,
                                           rng.next_u64() ^ 0xfeedULL, 80);
    if (measured <= eps_sub) {
      std::vector<Entry> fin = am.entries();
      bool loops = false;
      for (int u : sy)
        if (x[u] > 0) {
          fin.push_back({u, u, y[u] * x[u] / r});
          loops = true;
        }
      st.k = k;
      st.attempts = attempt + 1;
      st.exact = false;
      st.measured_norm = measured;
      return DirectedLaplacian::from_adjacency(
          SparseGraph::from_triplets(n, std::move(fin), Kind::adjacency, loops));
    }
  }
  fail(Status::oversample_exhausted,
       "sparsify_product: scaled-norm check failed after " +
           std::to_string(opt.max_resamples + 1) + " attempts");
}

DirectedLaplacian sparsify_eulerian(const DirectedLaplacian& L, double p, double eps,
                                    uint64_t seed, const EulerianSparsifyOptions& opt,
                                    EulerianSparsifyStats* stats) {
  if (!(p > 0 && p < 1) || !(eps > 0 && eps < 1))
    fail(Status::invalid_argument, "sparsify_eulerian: need p, eps in (0,1)");
  if (!L.eulerian()) fail(Status::not_eulerian, "sparsify_eulerian: input is not Eulerian");
  if (!strongly_connected(L.adjacency()))
    fail(Status::not_strongly_connected, "sparsify_eulerian: graph is not strongly connected");

  EulerianSparsifyStats local;
  EulerianSparsifyStats& st = stats ? *stats : local;

  const int n = L.n();
  std::vector<Entry> loops, core;
  for (const Entry& e : L.adjacency().entries())
    (e.row == e.col ? loops : core).push_back(e);
  if (core.empty()) return L;  // all mass on the diagonal; nothing to sparsify

  DirectedLaplacian core_l = DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(n, core, Kind::adjacency));

  Rng root(seed);
  Decomposition dec =
      find_decomposition(core_l, opt.phi_target, root.child(0xdecULL).next_u64(), opt.decompose);
  st.pieces = dec.pieces.size();
  st.alpha = dec.alpha;
  st.beta = dec.beta;
  st.delta_min = 1.0;

  const double pp = p / ((double)n * (double)n);
  std::vector<Entry> out = std::move(loops);
  for (size_t i = 0; i < dec.pieces.size(); ++i) {
    const DirectedLaplacian& piece = dec.pieces[i];
    const SparseGraph& adj = piece.adjacency();
    SparseGraph u_adj = SparseGraph::sum(adj, adj.transpose()).scaled(0.5);
    double gap = std::max(
        dec.alpha, opt.gap_safety * normalized_gap_estimate(
                       u_adj, opt.gap_iters, root.child(0x6a90ULL + i).next_u64()));
    gap = std::min(gap, 2.0);
    double delta = std::min(0.999, eps * gap / (2.0 * dec.beta));
    st.delta_min = std::min(st.delta_min, delta);

    SparsifyStats ps;
    DirectedLaplacian sp =
        sparsify_subgraph(piece, pp, delta, root.child(1 + i).next_u64(), opt.subgraph, &ps);
    if (ps.exact) ++st.exact_pieces;
    for (const Entry& e : sp.adjacency().entries()) out.push_back(e);
  }

  bool any_loops = L.adjacency().allow_loops();
  return DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(n, std::move(out), Kind::adjacency, any_loops));
}

SparseGraph sparsify_square(const SparseGraph& w, double p, double eps, uint64_t seed,
                            const EulerianSparsifyOptions& opt, SquareStats* stats) {
  if (!(p > 0 && p < 1) || !(eps > 0 && eps < 1))
    fail(Status::invalid_argument, "sparsify_square: need p, eps in (0,1)");
  const int n = w.n();
  Vec d = w.row_sums(), cs = w.col_sums();
  double scale_ref = 0;
  for (int i = 0; i < n; ++i) scale_ref = std::max(scale_ref, std::max(d[i], cs[i]));
  for (int i = 0; i < n; ++i)
    if (std::fabs(d[i] - cs[i]) > 1e-10 * std::max(1.0, scale_ref))
      fail(Status::row_col_mismatch,
           "sparsify_square: row/column sums differ at vertex " + std::to_string(i));
  if (!strongly_connected(w))
    fail(Status::not_strongly_connected, "sparsify_square: graph is not strongly connected");

  SquareStats local;
  SquareStats& st = stats ? *stats : local;
  st.pieces = 0;
  st.dense_square_formed = false;

  // Row i of the transpose is column i of w; both views are needed per vertex.
  SparseGraph wt = w.transpose();
  const auto& rp = w.row_ptr();
  const auto& rpt = wt.row_ptr();

  Rng root(seed);
  std::vector<Entry> acc;
  const double pv = p / (2.0 * (double)n);
  for (int i = 0; i < n; ++i) {
    if (!(d[i] > 0)) continue;
    Vec x(n, 0.0), y(n, 0.0);
    for (size_t k = rpt[i]; k < rpt[i + 1]; ++k) {
      const Entry& e = wt.entries()[k];
      x[e.col] = e.w;  // w[:, i]
    }
    for (size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const Entry& e = w.entries()[k];
      y[e.col] = e.w;  // w[i, :]
    }
    SparsifyStats ps;
    DirectedLaplacian piece =
        sparsify_product(x, y, pv, eps / 6, root.child((uint64_t)i).next_u64(), opt.subgraph, &ps);
    ++st.pieces;
    if (ps.exact) ++st.exact_pieces;
    size_t pn = piece.adjacency().nnz();
    st.max_piece_entries = std::max(st.max_piece_entries, pn);
    st.total_entries += pn;
    for (const Entry& e : piece.adjacency().entries()) acc.push_back(e);
  }

  DirectedLaplacian mhat = DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(n, std::move(acc), Kind::adjacency, true));

  // The summed square can fall apart into undirected components (a bipartite-ish
  // w squares into separate classes); each component is Eulerian and connected,
  // hence strongly connected, and is sparsified on its own index set.
  int ncomp = 0;
  std::vector<int> label = undirected_components(mhat.adjacency(), &ncomp);
  st.components = (size_t)ncomp;

  std::vector<Entry> tilde;
  if (ncomp <= 1) {
    DirectedLaplacian mt =
        sparsify_eulerian(mhat, p / 2, eps / 3, root.child(0x5011dULL).next_u64(), opt);
    tilde = mt.adjacency().entries();
  } else {
    const double pc = p / (2.0 * (double)ncomp);
    for (int c = 0; c < ncomp; ++c) {
      std::vector<int> verts;
      for (int v = 0; v < n; ++v)
        if (label[v] == c) verts.push_back(v);
      std::vector<int> loc(n, -1);
      for (size_t k = 0; k < verts.size(); ++k) loc[verts[k]] = (int)k;
      std::vector<Entry> sub;
      for (const Entry& e : mhat.adjacency().entries())
        if (label[e.row] == c) sub.push_back({loc[e.row], loc[e.col], e.w});
      if (sub.empty()) continue;
      DirectedLaplacian subl = DirectedLaplacian::from_adjacency(
          SparseGraph::from_triplets((int)verts.size(), std::move(sub), Kind::adjacency, true));
      DirectedLaplacian mt =
          sparsify_eulerian(subl, pc, eps / 3, root.child(0x5011dULL + 1 + c).next_u64(), opt);
      for (const Entry& e : mt.adjacency().entries())
        tilde.push_back({verts[e.row], verts[e.col], e.w});
    }
  }

  // D - Mtilde in matrix form is exactly the transpose of Mtilde's adjacency,
  // because the Eulerian stage preserves degrees bit-for-bit.
  std::vector<Entry> res;
  res.reserve(tilde.size());
  for (const Entry& e : tilde) res.push_back({e.col, e.row, e.w});
  return SparseGraph::from_triplets(n, std::move(res), Kind::adjacency, true);
}

}  // namespace dirlap
