#include "dirlap/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

namespace dirlap {
namespace {

InnerSolver resolve(const InnerSolver& inner) {
  return inner ? inner : default_inner_solver();
}

// Center v within each labelled group: the orthogonal projection onto the
// kernel of the contraction map.
void center_by(Vec& v, const std::vector<int>& comp, int k) {
  std::vector<double> sum(k, 0.0);
  std::vector<int> cnt(k, 0);
  for (size_t i = 0; i < v.size(); ++i) {
    sum[comp[i]] += v[i];
    ++cnt[comp[i]];
  }
  for (size_t i = 0; i < v.size(); ++i) v[i] -= sum[comp[i]] / cnt[comp[i]];
}

// Row-rescale the adjacency by x (the graph of L diag(x)) and append the cycle
// circulation i -> i+1 that cancels the row defect L x exactly; column sums are
// untouched by both steps, so the result is Eulerian to rounding.
SparseGraph scaled_patched_adjacency(const DirectedLaplacian& L, const Vec& x, double* mass) {
  const SparseGraph& a = L.adjacency();
  const int n = a.n();
  Vec v = L.apply(x);
  double dust = 0;
  for (double t : v) dust += t;
  // 1^T L = 0: fold summation dust so the circulation closes, placed where the
  // relative harm is smallest
  Vec deg = L.out_degrees();
  int big = 0;
  for (int i = 1; i < n; ++i)
    if (deg[i] * x[i] > deg[big] * x[big]) big = i;
  v[big] -= dust;

  std::vector<Entry> ents;
  ents.reserve(a.nnz() + n);
  for (const Entry& e : a.entries()) ents.push_back({e.row, e.col, e.w * x[e.row]});

  // flows f_i = fbase - cumsum_i >= 0 satisfy f_i - f_{i-1} = -v_i cyclically
  double run = 0, fbase = 0;
  Vec cum(n);
  for (int i = 0; i < n; ++i) {
    run += v[i];
    cum[i] = run;
    fbase = std::max(fbase, run);
  }
  double total = 0;
  for (int i = 0; i < n && n > 1; ++i) {
    double f = fbase - cum[i];
    if (f > 0) {
      ents.push_back({i, (i + 1) % n, f});
      total += f;
    }
  }
  if (mass) *mass = total;
  return SparseGraph::from_triplets(n, std::move(ents), Kind::adjacency, a.allow_loops());
}

}  // namespace

InnerSolver default_inner_solver(const SolveOptions& opt) {
  return [opt](const DirectedLaplacian& L, const Vec& b, double eps, uint64_t seed) {
    return solve_eulerian(L, b, eps, seed, opt);
  };
}

DirectedLaplacian rcdd_complete(const SparseGraph& m) {
  const int n = m.n();
  if (n == 0) fail(Status::empty_matrix, "rcdd_complete: empty matrix");
  Vec q = m.row_sums();
  Vec s = m.col_sums();

  double scale = 0;
  for (const Entry& e : m.entries()) scale = std::max(scale, std::fabs(e.w));
  const double tol = 1e-9 * scale;

  std::vector<Entry> adj;
  adj.reserve(m.nnz() + 2 * (size_t)n);
  for (const Entry& e : m.entries()) {
    if (e.row == e.col) {
      if (e.w < -tol)
        fail(Status::invalid_argument, "rcdd_complete: negative diagonal at row " +
                                           std::to_string(e.row));
      continue;  // diagonal is implied by the degree identity
    }
    if (e.w > tol)
      fail(Status::invalid_argument, "rcdd_complete: positive off-diagonal at (" +
                                         std::to_string(e.row) + "," + std::to_string(e.col) + ")");
    if (e.w < 0) adj.push_back({e.col, e.row, -e.w});
  }
  for (int i = 0; i < n; ++i) {
    if (q[i] < -tol)
      fail(Status::invalid_argument,
           "rcdd_complete: row " + std::to_string(i) + " not dominant (sum " +
               std::to_string(q[i]) + ")");
    if (s[i] < -tol)
      fail(Status::invalid_argument,
           "rcdd_complete: column " + std::to_string(i) + " not dominant (sum " +
               std::to_string(s[i]) + ")");
    if (s[i] > 0) adj.push_back({i, n, s[i]});   // column deficit supplied by the new vertex
    if (q[i] > 0) adj.push_back({n, i, q[i]});   // row surplus absorbed by it
  }
  return DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(n + 1, std::move(adj), Kind::adjacency, false));
}

Vec rcdd_solve(const SparseGraph& m, const Vec& c, double eps, const InnerSolver& inner,
               uint64_t seed) {
  const int n = m.n();
  if ((int)c.size() != n) fail(Status::dimension_mismatch, "rcdd_solve: rhs size mismatch");
  DirectedLaplacian emb = rcdd_complete(m);
  Vec bh(n + 1, 0.0);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    bh[i] = c[i];
    sum += c[i];
  }
  bh[n] = -sum;
  Vec y = inner(emb, bh, eps, seed);
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = y[i] - y[n];
  return z;
}

StationaryResult compute_stationary(const DirectedLaplacian& L, double alpha,
                                    const InnerSolver& inner, uint64_t seed,
                                    const StationaryOptions& opt) {
  const int n = L.n();
  if (!(alpha > 0 && alpha <= 0.5))
    fail(Status::invalid_argument, "compute_stationary: alpha must lie in (0, 1/2]");
  if (opt.check_connected && !strongly_connected(L.adjacency()))
    fail(Status::not_strongly_connected, "compute_stationary: graph is not strongly connected");

  StationaryResult res;
  if (n == 1) {
    res.pi = {1.0};
    res.x = {1.0};
    return res;
  }

  const double shift = opt.diag_shift;
  Vec dhat = L.out_degrees();
  for (double& d : dhat) d += shift;
  Vec lone = L.eulerian_defect();  // L 1
  for (double& d : lone) d += shift;

  const InnerSolver in = resolve(inner);
  Rng root(seed);
  const double eps_in =
      std::max(opt.eps_floor, opt.c_stat * std::pow(alpha / n, (double)opt.q_exp));
  const int rounds = opt.rounds > 0 ? opt.rounds : (int)std::ceil(3.0 * std::log(1.0 / alpha));

  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 / dhat[i];

  SparseGraph lm = L.matrix();
  double best = -1;
  int stale = 0;
  int done = 0;
  for (int t = 0; t <= rounds; ++t) {
    Vec lx = L.apply(x);
    if (shift != 0) axpy(shift, x, lx);
    Vec e(n);
    double routed = 0;  // |Dhat^{-1} e|_1, the demand the round must move
    for (int i = 0; i < n; ++i) {
      double v = std::max(0.0, std::max(lx[i], x[i] * lone[i]));
      // row dominance of (E + L) X additionally needs e_i >= -(L x)_i / x_i
      if (lx[i] < 0) v = std::max(v, -lx[i] / x[i]);
      e[i] = v;
      routed += v / dhat[i];
    }
    if (routed == 0) break;  // x is an exact kernel direction

    double xm = 0;
    for (int i = 0; i < n; ++i) xm += dhat[i] * x[i];
    double rel = nrm1(lx) / xm;
    // below this the slack weights of (E + L) X are cancellation noise and the
    // rounds only churn; the refinement phase owns the regime
    if (rel <= 1e-9) break;
    if (opt.plateau > 0 && best >= 0 && rel >= opt.plateau * best) {
      if (++stale >= 2) break;  // inner accuracy floor reached
    } else {
      stale = 0;
    }
    if (best < 0 || rel < best) best = rel;

    // M = (E + L + shift I) diag(x), row- and column-dominant by choice of e
    std::vector<Entry> ents;
    ents.reserve(lm.nnz() + n);
    for (const Entry& en : lm.entries()) ents.push_back({en.row, en.col, en.w * x[en.col]});
    for (int i = 0; i < n; ++i) ents.push_back({i, i, (e[i] + shift) * x[i]});
    SparseGraph M = SparseGraph::from_triplets(n, std::move(ents), Kind::general);

    Vec b(n);
    for (int i = 0; i < n; ++i) b[i] = e[i] / dhat[i] / routed;

    Vec z;
    try {
      z = rcdd_solve(M, b, eps_in, in, root.child(0x57a7ULL + t).next_u64());
    } catch (const Error& err) {
      fail(Status::inner_solver_failure,
           "compute_stationary: inner solve failed in round " + std::to_string(t) + ": " +
               err.what());
    }
    double zmax = 0;
    for (double v : z) zmax = std::max(zmax, v);
    if (zmax <= 0)
      fail(Status::inner_solver_failure, "compute_stationary: update is nonpositive");
    const double floor = 1e-15 * zmax;  // keep x strictly positive through roundoff
    for (int i = 0; i < n; ++i) x[i] *= std::max(z[i], floor);

    double norm = 0;
    for (int i = 0; i < n; ++i) norm += dhat[i] * x[i];
    scale(x, 1.0 / norm);
    done = t + 1;
  }

  auto rel_residual = [&](const Vec& v) {
    Vec lv = L.apply(v);
    if (shift != 0) axpy(shift, v, lv);
    double m = 0;
    for (int i = 0; i < n; ++i) m += dhat[i] * v[i];
    return nrm1(lv) / m;
  };

  // The multiplicative update fixes the kernel only when the stationary is
  // constant across the out-surplus vertices (elsewhere the excess e cannot
  // vanish at the kernel), so the rounds above stall at a graph-dependent
  // residual no matter how small alpha or the inner accuracy. Finish by
  // inverse iteration through the Eulerian rescaling: solve the cycle-patched
  // L diag(x) against -L x and fold the correction into x. Each round
  // contracts the residual by roughly eps_refine plus a term of the order of
  // the residual itself, which restores the alpha-scaled contract.
  double resid = rel_residual(x);
  const double target = opt.refine_target * alpha;
  if (opt.refine_target > 0 && shift == 0) {
    double prevr = 2.0;
    int stale_r = 0;
    for (int r = 1; resid > target; ++r) {
      if (r > opt.refine_max)
        fail(Status::inner_solver_failure,
             "compute_stationary: residual " + std::to_string(resid) +
                 " above the alpha target after " + std::to_string(opt.refine_max) +
                 " refinement rounds");
      DirectedLaplacian scaled =
          DirectedLaplacian::from_adjacency(scaled_patched_adjacency(L, x, nullptr));
      if (!scaled.eulerian())
        fail(Status::not_eulerian, "compute_stationary: patched rescaling failed to balance");
      Vec rhs = L.apply(x);
      double mean = 0;
      for (double v : rhs) mean += v;
      mean /= n;
      for (double& v : rhs) v = mean - v;  // -L x, re-centred against rounding dust
      Vec z;
      try {
        z = in(scaled, rhs, opt.eps_refine, root.child(0x2ef1ULL + r).next_u64());
      } catch (const Error& err) {
        fail(Status::inner_solver_failure,
             "compute_stationary: refinement solve failed in round " + std::to_string(r) +
                 ": " + err.what());
      }
      double zmin = 0;
      for (double v : z) zmin = std::min(zmin, v);
      // damp so x stays strictly positive; near the kernel z sits well inside (-1, inf)
      const double step = zmin < -0.5 ? -0.5 / zmin : 1.0;
      for (int i = 0; i < n; ++i) x[i] *= 1.0 + step * z[i];
      double norm = 0;
      for (int i = 0; i < n; ++i) norm += dhat[i] * x[i];
      scale(x, 1.0 / norm);
      resid = rel_residual(x);
      res.refine_rounds = r;
      if (resid >= 0.9 * prevr) {
        if (++stale_r >= 3)
          fail(Status::inner_solver_failure,
               "compute_stationary: refinement stalled at relative residual " +
                   std::to_string(resid));
      } else {
        stale_r = 0;
      }
      prevr = std::min(prevr, resid);
    }
  }

  res.x = x;
  res.iterations = done;
  res.residual = resid;
  res.pi.resize(n);
  double tot = 0;
  for (int i = 0; i < n; ++i) {
    res.pi[i] = std::max(0.0, dhat[i] * x[i]);
    tot += res.pi[i];
  }
  scale(res.pi, 1.0 / tot);
  return res;
}

EulerianScaleResult eulerian_scale(const DirectedLaplacian& L, uint64_t seed,
                                   const EulerianScaleOptions& opt) {
  const int n = L.n();
  if (L.eulerian()) return EulerianScaleResult{Vec(n, 1.0), L, 0.0, 1};
  if (!strongly_connected(L.adjacency()))
    fail(Status::not_strongly_connected, "eulerian_scale: graph is not strongly connected");

  Rng root(seed);
  double alpha = opt.alpha;
  StationaryResult st;
  int attempts = 0;
  for (int a = 0; a < std::max(1, opt.attempts); ++a) {
    StationaryOptions so = opt.stat;
    so.check_connected = false;
    st = compute_stationary(L, alpha, opt.inner, root.child(0xa11ULL + a).next_u64(), so);
    attempts = a + 1;
    if (st.residual <= opt.tol) break;
    alpha = std::max(alpha * alpha, 1e-9);  // more rounds, tighter inner accuracy
  }

  Vec x = st.x;
  double sx = 0;
  for (double v : x) sx += v;
  scale(x, n / sx);

  double mass = 0;
  DirectedLaplacian scaled =
      DirectedLaplacian::from_adjacency(scaled_patched_adjacency(L, x, &mass));
  if (!scaled.eulerian())
    fail(Status::not_eulerian, "eulerian_scale: patched rescaling failed to balance");
  return EulerianScaleResult{std::move(x), std::move(scaled), st.residual, attempts};
}

Vec solve_full(const DirectedLaplacian& L, const Vec& b, double eps, const InnerSolver& inner,
               uint64_t seed, const FullSolveOptions& opt, FullSolveReport* report) {
  const int n = L.n();
  if ((int)b.size() != n) fail(Status::dimension_mismatch, "solve_full: rhs size mismatch");
  if (!(eps > 0 && eps < 1)) fail(Status::invalid_argument, "solve_full: eps must lie in (0,1)");
  if (!strongly_connected(L.adjacency()))
    fail(Status::not_strongly_connected, "solve_full: graph is not strongly connected");

  FullSolveReport rep;
  const InnerSolver in = resolve(inner);
  Rng root(seed);

  // the image of L is the mean-zero subspace; project and flag meaningful mass
  Vec rhs = b;
  double mean = 0;
  for (double v : rhs) mean += v;
  mean /= n;
  rep.b_projected = std::fabs(mean) * std::sqrt((double)n) > 1e-12 * nrm2(b);
  for (double& v : rhs) v -= mean;
  const double bn = nrm2(rhs);
  if (bn == 0) {
    if (report) *report = rep;
    return Vec(n, 0.0);
  }

  if (L.eulerian()) {
    Vec x = in(L, rhs, eps, root.child(0xe01ULL).next_u64());
    rep.rounds = 1;
    Vec r = rhs;
    axpy(-1.0, L.apply(x), r);
    rep.residual = nrm2(r) / bn;
    rep.residual_trace.push_back(rep.residual);
    if (report) *report = rep;
    return x;
  }

  const double wmin = L.adjacency().weight_min();
  const double delta = eps * wmin / (opt.c_pert * (double)n * n * n);
  rep.delta = delta;

  StationaryOptions so = opt.stat;
  so.diag_shift = delta;
  so.check_connected = false;
  rep.stationary =
      compute_stationary(L, opt.alpha, in, root.child(0x57a7f011ULL).next_u64(), so);
  Vec x = rep.stationary.x;
  double sx = 0;
  for (double v : x) sx += v;
  scale(x, n / sx);
  rep.defect = rep.stationary.residual;

  DirectedLaplacian scaled =
      DirectedLaplacian::from_adjacency(scaled_patched_adjacency(L, x, &rep.patch_mass));
  if (!scaled.eulerian())
    fail(Status::not_eulerian, "solve_full: patched rescaling failed to balance");

  // refine against the original matrix; the scaled solves contribute
  // L (diag(x) z) = (L diag(x)) z ~ r up to the patch and perturbation
  const double eps_in = std::min(opt.eps_inner, eps);
  const double xx = dot(x, x);
  Vec xout(n, 0.0);
  Vec r = rhs;
  double rel = 1.0;
  double prev = 2.0;
  int stale = 0;
  for (int round = 1; round <= opt.max_rounds; ++round) {
    Vec rc = r;
    double rm = 0;
    for (double v : rc) rm += v;
    rm /= n;
    for (double& v : rc) v -= rm;
    Vec z = in(scaled, rc, eps_in, root.child(0xf111ULL + round).next_u64());
    for (int i = 0; i < n; ++i) xout[i] += x[i] * z[i];
    axpy(-dot(xout, x) / xx, x, xout);  // pin the kernel component
    r = rhs;
    axpy(-1.0, L.apply(xout), r);
    rel = nrm2(r) / bn;
    rep.residual_trace.push_back(rel);
    rep.rounds = round;
    if (rel <= eps) break;
    if (rel >= 0.9 * prev) {
      if (++stale >= 3)
        fail(Status::inner_solver_failure,
             "solve_full: refinement stalled at relative residual " + std::to_string(rel));
    } else {
      stale = 0;
    }
    prev = std::min(prev, rel);
  }
  rep.residual = rel;
  if (rel > eps)
    fail(Status::inner_solver_failure,
         "solve_full: residual " + std::to_string(rel) + " above target after " +
             std::to_string(rep.rounds) + " rounds");
  if (report) *report = rep;
  return xout;
}

Vec personalized_pagerank(const NormalizedWalk& w, double beta, const Vec& personalization,
                          double eps, uint64_t seed, const PagerankOptions& opt) {
  const int n = w.n();
  if (!(beta > 0 && beta <= 1))
    fail(Status::invalid_argument, "personalized_pagerank: beta must lie in (0, 1]");
  if (!(eps > 0)) fail(Status::invalid_argument, "personalized_pagerank: eps must be positive");
  if ((int)personalization.size() != n)
    fail(Status::dimension_mismatch, "personalized_pagerank: personalization size mismatch");
  Vec pers = personalization;
  double sum = 0;
  for (double v : pers) {
    if (v < 0)
      fail(Status::invalid_argument, "personalized_pagerank: personalization must be nonnegative");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-10)
    fail(Status::invalid_argument, "personalized_pagerank: personalization must sum to 1");
  scale(pers, 1.0 / sum);
  if (beta == 1) return pers;  // the chain restarts every step

  const DirectedLaplacian L = denormalize(w);
  const SparseGraph& a = L.adjacency();
  const Vec& deg = L.out_degrees();

  // teleported chain: (1-beta) A plus beta * deg(u) * pers_v from every u;
  // total out-degree per vertex is unchanged
  std::vector<Entry> ents;
  ents.reserve(a.nnz() + (size_t)n * 4);
  for (const Entry& e : a.entries()) ents.push_back({e.row, e.col, (1.0 - beta) * e.w});
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (pers[v] > 0) ents.push_back({u, v, beta * deg[u] * pers[v]});
  DirectedLaplacian Lt = DirectedLaplacian::from_adjacency(
      SparseGraph::from_triplets(n, std::move(ents), Kind::adjacency, true));

  double alpha = opt.alpha > 0 ? opt.alpha : std::min(0.02, eps / 8.0);
  alpha = std::max(alpha, 1e-12);
  StationaryResult st =
      compute_stationary(Lt, alpha, opt.inner, Rng(seed).child(0x9a6eULL).next_u64(), opt.stat);
  return st.pi;
}

Vec crude_solve_ill_conditioned(const DirectedLaplacian& L, const Vec& b,
                                const InnerSolver& inner, uint64_t seed,
                                const CrudeSolveOptions& opt, CrudeSolveReport* report) {
  const int n = L.n();
  if ((int)b.size() != n)
    fail(Status::dimension_mismatch, "crude_solve_ill_conditioned: rhs size mismatch");
  if (!L.eulerian())
    fail(Status::not_eulerian, "crude_solve_ill_conditioned: input must be Eulerian");

  // image membership: demand must balance within every undirected component
  int ncomp = 0;
  std::vector<int> gcomp = undirected_components(L.adjacency(), &ncomp);
  {
    std::vector<double> cs(ncomp, 0.0);
    for (int i = 0; i < n; ++i) cs[gcomp[i]] += b[i];
    const double tol = 1e-9 * std::max(1e-300, nrm2(b));
    for (int c = 0; c < ncomp; ++c)
      if (std::fabs(cs[c]) > tol)
        fail(Status::invalid_argument,
             "crude_solve_ill_conditioned: demand does not balance within component " +
                 std::to_string(c));
  }

  const InnerSolver in = resolve(inner);
  Rng root(seed);
  const double r = opt.r > 0 ? opt.r : std::max(1e6, (double)n * n * n);
  const double eps_in = opt.eps_inner > 0 ? opt.eps_inner : 1.0 / r;

  CrudeSolveReport rep;
  rep.ladder.r = r;

  // undirected edge weights of the symmetrization, deduped over unordered pairs
  struct UEdge {
    int u, v;
    double w;
  };
  std::vector<UEdge> edges;
  {
    std::vector<Entry> half;
    half.reserve(L.adjacency().nnz());
    for (const Entry& e : L.adjacency().entries()) {
      if (e.row == e.col) continue;
      int u = std::min(e.row, e.col), v = std::max(e.row, e.col);
      half.push_back({u, v, 0.5 * e.w});
    }
    std::sort(half.begin(), half.end(), [](const Entry& a, const Entry& c) {
      return a.row != c.row ? a.row < c.row : a.col < c.col;
    });
    for (size_t i = 0; i < half.size();) {
      size_t j = i;
      double w = 0;
      while (j < half.size() && half[j].row == half[i].row && half[j].col == half[i].col)
        w += half[j++].w;
      if (w > 0) edges.push_back({half[i].row, half[i].col, w});
      i = j;
    }
  }
  if (edges.empty()) {
    if (report) *report = rep;
    return Vec(n, 0.0);  // edgeless: the only balanced demand is zero
  }

  // bottleneck of the maximal spanning forest: the heaviest-first Kruskal pass
  // ends on the smallest weight any tree needs
  double w0;
  {
    std::vector<const UEdge*> order(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) order[i] = &edges[i];
    std::sort(order.begin(), order.end(),
              [](const UEdge* a, const UEdge* c) { return a->w > c->w; });
    UnionFind uf(n);
    w0 = order.front()->w;
    for (const UEdge* e : order)
      if (uf.unite(e->u, e->v)) w0 = std::min(w0, e->w);
  }

  std::vector<double> weights;
  weights.reserve(edges.size());
  for (const UEdge& e : edges) weights.push_back(e.w);
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());

  SparseGraph lm = L.matrix();
  Vec x(n, 0.0);
  Vec bcur = b;
  double w = w0;
  for (;;) {
    ScaleLevel lvl;
    lvl.w = w;
    lvl.reg = w / (r * r);

    UnionFind uf(n);
    for (const UEdge& e : edges)
      if (e.w >= w) uf.unite(e.u, e.v);
    lvl.comp.assign(n, -1);
    int k = 0;
    {
      std::vector<int> id(n, -1);
      for (int i = 0; i < n; ++i) {
        int rt = uf.find(i);
        if (id[rt] < 0) id[rt] = k++;
        lvl.comp[i] = id[rt];
      }
    }
    lvl.k = k;

    if (k > 1) {
      Vec bc(k, 0.0);
      for (int i = 0; i < n; ++i) bc[lvl.comp[i]] += bcur[i];
      lvl.demand_norm = nrm2(bc);
      if (lvl.demand_norm > 0) {
        std::vector<Entry> ents;
        ents.reserve(lm.nnz() + k);
        for (const Entry& e : lm.entries())
          ents.push_back({lvl.comp[e.row], lvl.comp[e.col], e.w});
        for (int c = 0; c < k; ++c) ents.push_back({c, c, lvl.reg});
        SparseGraph M = SparseGraph::from_triplets(k, std::move(ents), Kind::general);

        DirectedLaplacian emb = rcdd_complete(M);
        if (opt.store_systems) rep.systems.push_back(emb);
        if (opt.store_contracted) rep.contracted.push_back(M);

        Vec bh(k + 1, 0.0);
        double sum = 0;
        for (int c = 0; c < k; ++c) {
          bh[c] = bc[c];
          sum += bc[c];
        }
        bh[k] = -sum;
        Vec y;
        try {
          y = in(emb, bh, eps_in,
                 root.child(0xc0a15eULL + rep.ladder.levels.size()).next_u64());
        } catch (const Error& err) {
          fail(Status::inner_solver_failure,
               "crude_solve_ill_conditioned: inner solve failed at scale " +
                   std::to_string(w) + ": " + err.what());
        }
        ++rep.solves;
        lvl.solved = true;
        Vec z(n);
        for (int i = 0; i < n; ++i) z[i] = y[lvl.comp[i]] - y[k];
        axpy(1.0, z, x);
        axpy(-1.0, L.apply(z), bcur);
      }
    }
    center_by(bcur, lvl.comp, k);  // Proj: residual demand balances per supernode
    rep.ladder.levels.push_back(std::move(lvl));

    auto it = std::lower_bound(weights.begin(), weights.end(), w);
    if (it == weights.end()) break;
    w = 2.0 * *it;
  }

  if (report) *report = rep;
  return x;
}

}  // namespace dirlap
