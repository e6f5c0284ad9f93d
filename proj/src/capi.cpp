#include "dirlap.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"

#include "dirlap/gen.hpp"
#include "dirlap/io.hpp"
#include "dirlap/oracle.hpp"
#include "dirlap/reduce.hpp"
#include "dirlap/solver.hpp"
#include "dirlap/sparsify.hpp"

using json = nlohmann::json;
using namespace dirlap;

struct dirlap_graph {
  SparseGraph g;
};

namespace {

thread_local std::string tl_error;

// Library buffers cross the C boundary, so they must be malloc-backed for
// dirlap_free (plain free) to release them regardless of how the library
// itself was allocated.
char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class F>
int guarded(F&& body) {
  tl_error.clear();
  try {
    body();
    return DIRLAP_OK;
  } catch (const Error& e) {
    tl_error = e.what();
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    tl_error = std::string("options: ") + e.what();
    return DIRLAP_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    tl_error = "out of memory";
    return DIRLAP_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    tl_error = e.what();
    return DIRLAP_INVALID_ARGUMENT;
  }
}

void require(bool cond, const char* what) {
  if (!cond) fail(Status::invalid_argument, what);
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') return json::object();
  json j = json::parse(options_json);
  require(j.is_object(), "options must be a JSON object");
  return j;
}

void emit_report(char** out, const json& j) {
  if (out) *out = dup_string(j.dump(2));
}

DirectedLaplacian laplacian_of(const dirlap_graph* g) {
  require(g != nullptr, "graph handle is null");
  return DirectedLaplacian::from_adjacency(g->g);
}

}  // namespace

extern "C" {

const char* dirlap_version(void) { return "0.1.0"; }

const char* dirlap_status_name(int status) {
  if (status < 0 || status > static_cast<int>(Status::invalid_argument)) return "Unknown";
  return status_name(static_cast<Status>(status));
}

const char* dirlap_last_error(void) { return tl_error.c_str(); }

void dirlap_free(void* p) { std::free(p); }

int dirlap_graph_from_triplets(int n, size_t nnz, const int* rows, const int* cols,
                               const double* weights, int allow_loops, dirlap_graph** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    require(nnz == 0 || (rows && cols && weights), "triplet arrays are null");
    std::vector<Entry> entries(nnz);
    for (size_t i = 0; i < nnz; ++i) entries[i] = {rows[i], cols[i], weights[i]};
    *out = new dirlap_graph{
        SparseGraph::from_triplets(n, std::move(entries), Kind::adjacency, allow_loops != 0)};
  });
}

int dirlap_graph_read(const char* path, int allow_loops, dirlap_graph** out) {
  return guarded([&] {
    require(path && out, "path or output handle is null");
    *out = new dirlap_graph{read_matrix_market_file(path, Kind::adjacency, allow_loops != 0)};
  });
}

int dirlap_graph_write(const dirlap_graph* g, const char* path) {
  return guarded([&] {
    require(g && path, "graph or path is null");
    write_matrix_market_file(path, g->g);
  });
}

int dirlap_graph_generate(const char* spec_json, uint64_t seed, dirlap_graph** out) {
  return guarded([&] {
    require(spec_json && out, "spec or output handle is null");
    json spec = json::parse(spec_json);
    require(spec.is_object() && spec.contains("family"), "spec needs a \"family\" key");
    const std::string family = spec["family"];
    const int n = spec.value("n", 0);
    Rng rng(seed);
    SparseGraph g;
    if (family == "complete") {
      g = gen::complete_bidirected(n, spec.value("w", 1.0));
    } else if (family == "cycle") {
      g = gen::directed_cycle(n, spec.value("w", 1.0));
    } else if (family == "er-eulerian") {
      g = gen::er_eulerian(n, spec.value("m", 4 * n), spec.value("wmin", 0.5),
                           spec.value("wmax", 2.0), rng);
    } else if (family == "er-strong") {
      g = gen::er_strongly_connected(n, spec.value("p", 0.1), spec.value("wmin", 0.5),
                                     spec.value("wmax", 2.0), rng);
    } else if (family == "two-scale") {
      g = gen::two_scale_eulerian(n, spec.value("ratio", 1e6), rng);
    } else if (family == "barbell") {
      g = gen::barbell(spec.value("k", n), spec.value("w", 1.0));
    } else if (family == "star") {
      g = gen::star_bidirected(spec.value("leaves", n > 1 ? n - 1 : 1), spec.value("w", 1.0));
    } else {
      fail(Status::invalid_argument, "unknown family \"" + family + "\"");
    }
    *out = new dirlap_graph{std::move(g)};
  });
}

void dirlap_graph_free(dirlap_graph* g) { delete g; }

int dirlap_graph_n(const dirlap_graph* g) { return g ? g->g.n() : 0; }

size_t dirlap_graph_nnz(const dirlap_graph* g) { return g ? g->g.nnz() : 0; }

int dirlap_graph_entries(const dirlap_graph* g, int* rows, int* cols, double* weights) {
  return guarded([&] {
    require(g != nullptr, "graph handle is null");
    const auto& es = g->g.entries();
    for (size_t i = 0; i < es.size(); ++i) {
      if (rows) rows[i] = es[i].row;
      if (cols) cols[i] = es[i].col;
      if (weights) weights[i] = es[i].w;
    }
  });
}

int dirlap_graph_out_degrees(const dirlap_graph* g, double* deg) {
  return guarded([&] {
    require(g && deg, "graph or output buffer is null");
    Vec d = g->g.row_sums();
    std::memcpy(deg, d.data(), d.size() * sizeof(double));
  });
}

int dirlap_graph_in_degrees(const dirlap_graph* g, double* deg) {
  return guarded([&] {
    require(g && deg, "graph or output buffer is null");
    Vec d = g->g.col_sums();
    std::memcpy(deg, d.data(), d.size() * sizeof(double));
  });
}

int dirlap_graph_is_eulerian(const dirlap_graph* g, int* flag) {
  return guarded([&] {
    require(g && flag, "graph or output flag is null");
    *flag = laplacian_of(g).eulerian() ? 1 : 0;
  });
}

int dirlap_graph_is_strongly_connected(const dirlap_graph* g, int* flag) {
  return guarded([&] {
    require(g && flag, "graph or output flag is null");
    *flag = strongly_connected(g->g) ? 1 : 0;
  });
}

int dirlap_vector_read(const char* path, int expect_n, double** out, int* out_n) {
  return guarded([&] {
    require(path && out, "path or output pointer is null");
    Vec v = read_vector_file(path, expect_n);
    double* buf = static_cast<double*>(std::malloc(v.size() * sizeof(double)));
    if (!buf && !v.empty()) throw std::bad_alloc();
    std::memcpy(buf, v.data(), v.size() * sizeof(double));
    *out = buf;
    if (out_n) *out_n = static_cast<int>(v.size());
  });
}

int dirlap_vector_write(const char* path, const double* v, int n) {
  return guarded([&] {
    require(path && (v || n == 0), "path or vector is null");
    write_vector_file(path, Vec(v, v + n));
  });
}

int dirlap_sparsify(const dirlap_graph* g, double eps, uint64_t seed, const char* options_json,
                    dirlap_graph** out, char** report_json) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);

    EulerianSparsifyOptions so;
    so.phi_target = opts.value("phi_target", 0.0);
    so.subgraph.c_sample = opts.value("c_sample", so.subgraph.c_sample);
    const double p = opts.value("p", 0.01);

    EulerianSparsifyStats stats;
    DirectedLaplacian T = sparsify_eulerian(L, p, eps, seed, so, &stats);
    *out = new dirlap_graph{T.adjacency()};

    emit_report(report_json,
                json{{"report_version", 1},
                     {"op", "sparsify"},
                     {"n", L.n()},
                     {"nnz_in", g->g.nnz()},
                     {"nnz_out", T.adjacency().nnz()},
                     {"pieces", stats.pieces},
                     {"exact_pieces", stats.exact_pieces},
                     {"alpha", stats.alpha},
                     {"beta", stats.beta},
                     {"delta_min", stats.delta_min},
                     {"params",
                      {{"eps", eps},
                       {"p", p},
                       {"seed", seed},
                       {"c_sample", so.subgraph.c_sample},
                       {"phi_target", so.phi_target}}}});
  });
}

int dirlap_sparsify_square(const dirlap_graph* w, double eps, uint64_t seed,
                           const char* options_json, dirlap_graph** out, char** report_json) {
  return guarded([&] {
    require(w && out, "input or output handle is null");
    json opts = parse_options(options_json);

    EulerianSparsifyOptions so;
    so.phi_target = opts.value("phi_target", 0.0);
    so.subgraph.c_sample = opts.value("c_sample", so.subgraph.c_sample);
    const double p = opts.value("p", 0.01);

    SquareStats stats;
    SparseGraph wt = sparsify_square(w->g, p, eps, seed, so, &stats);
    size_t nnz_out = wt.nnz();
    *out = new dirlap_graph{std::move(wt)};

    emit_report(report_json,
                json{{"report_version", 1},
                     {"op", "sparsify-square"},
                     {"n", w->g.n()},
                     {"nnz_in", w->g.nnz()},
                     {"nnz_out", nnz_out},
                     {"pieces", stats.pieces},
                     {"exact_pieces", stats.exact_pieces},
                     {"max_piece_entries", stats.max_piece_entries},
                     {"total_entries", stats.total_entries},
                     {"components", stats.components},
                     {"dense_square_formed", stats.dense_square_formed},
                     {"params",
                      {{"eps", eps},
                       {"p", p},
                       {"seed", seed},
                       {"c_sample", so.subgraph.c_sample},
                       {"phi_target", so.phi_target}}}});
  });
}

int dirlap_decompose(const dirlap_graph* g, uint64_t seed, const char* options_json,
                     char** manifest_json) {
  return guarded([&] {
    require(manifest_json != nullptr, "manifest output is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);

    const double phi_target = opts.value("phi_target", 0.0);
    const bool include_edges = opts.value("include_edges", false);
    Decomposition dec = find_decomposition(L, phi_target, seed);

    json pieces = json::array();
    for (size_t i = 0; i < dec.pieces.size(); ++i) {
      json piece{{"index", i},
                 {"support", dec.pieces[i].adjacency().nnz()},
                 {"phi", dec.piece_phi[i]},
                 {"bucket", dec.piece_bucket[i]},
                 {"cover_nnz", dec.covers[i].nnz()}};
      if (include_edges) {
        json edges = json::array();
        for (const Entry& e : dec.pieces[i].adjacency().entries())
          edges.push_back({e.row, e.col, e.w});
        piece["edges"] = std::move(edges);
      }
      pieces.push_back(std::move(piece));
    }

    emit_report(manifest_json, json{{"report_version", 1},
                                    {"op", "decompose"},
                                    {"n", L.n()},
                                    {"nnz", g->g.nnz()},
                                    {"phi_target", dec.phi_target},
                                    {"alpha", dec.alpha},
                                    {"beta", dec.beta},
                                    {"total_support", dec.total_support},
                                    {"buckets", dec.buckets},
                                    {"rounds_max", dec.rounds_max},
                                    {"pieces", std::move(pieces)},
                                    {"params", {{"seed", seed}}}});
  });
}

namespace {

SolveOptions solve_options_from(const json& opts) {
  SolveOptions so;
  so.paper_mode = opts.value("paper_mode", so.paper_mode);
  so.c_out = opts.value("c_out", so.c_out);
  so.c_budget = opts.value("c_budget", so.c_budget);
  so.stop_lambda = opts.value("stop_lambda", so.stop_lambda);
  so.d_cap = opts.value("d_cap", so.d_cap);
  so.p = opts.value("p", so.p);
  return so;
}

json solve_report_json(const SolveReport& rep, double eps, uint64_t seed,
                       const SolveOptions& so) {
  return json{{"lambda_hat", rep.lambda_hat},
              {"d", rep.d},
              {"eps_hat", rep.eps_hat},
              {"ell", rep.ell},
              {"lambda_end", rep.lambda_end},
              {"applications", rep.applications},
              {"budget", rep.budget},
              {"wall_seconds", rep.wall_seconds},
              {"residual", rep.residual},
              {"b_projected", rep.b_projected},
              {"outer_iters", rep.outer_iters},
              {"chain_nnz", rep.chain_nnz},
              {"params",
               {{"eps", eps},
                {"seed", seed},
                {"paper_mode", so.paper_mode},
                {"c_out", so.c_out},
                {"c_budget", so.c_budget},
                {"stop_lambda", so.stop_lambda},
                {"d_cap", so.d_cap},
                {"c_sample", so.build.sparsify.subgraph.c_sample},
                {"phi_target", so.build.sparsify.phi_target}}}};
}

}  // namespace

int dirlap_solve_eulerian(const dirlap_graph* g, const double* b, double eps, uint64_t seed,
                          const char* options_json, double* x, char** report_json) {
  return guarded([&] {
    require(b && x, "right-hand side or solution buffer is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);
    SolveOptions so = solve_options_from(opts);

    SolveReport rep;
    Vec xv = solve_eulerian(L, Vec(b, b + L.n()), eps, seed, so, &rep);
    std::memcpy(x, xv.data(), xv.size() * sizeof(double));

    json j = solve_report_json(rep, eps, seed, so);
    j["op"] = "solve-eulerian";
    j["report_version"] = 1;
    j["n"] = L.n();
    emit_report(report_json, j);
  });
}

int dirlap_solve(const dirlap_graph* g, const double* b, double eps, uint64_t seed,
                 const char* options_json, double* x, char** report_json) {
  return guarded([&] {
    require(b && x, "right-hand side or solution buffer is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);

    FullSolveOptions fo;
    fo.alpha = opts.value("alpha", fo.alpha);
    fo.c_pert = opts.value("c_pert", fo.c_pert);
    fo.eps_inner = opts.value("eps_inner", fo.eps_inner);
    fo.max_rounds = opts.value("max_rounds", fo.max_rounds);
    SolveOptions so = solve_options_from(opts);

    FullSolveReport rep;
    Vec xv = solve_full(L, Vec(b, b + L.n()), eps, default_inner_solver(so), seed, fo, &rep);
    std::memcpy(x, xv.data(), xv.size() * sizeof(double));

    emit_report(report_json, json{{"report_version", 1},
                                  {"op", "solve"},
                                  {"n", L.n()},
                                  {"delta", rep.delta},
                                  {"defect", rep.defect},
                                  {"patch_mass", rep.patch_mass},
                                  {"rounds", rep.rounds},
                                  {"residual", rep.residual},
                                  {"residual_trace", rep.residual_trace},
                                  {"b_projected", rep.b_projected},
                                  {"stationary_iterations", rep.stationary.iterations},
                                  {"stationary_residual", rep.stationary.residual},
                                  {"params",
                                   {{"eps", eps},
                                    {"seed", seed},
                                    {"alpha", fo.alpha},
                                    {"c_pert", fo.c_pert},
                                    {"eps_inner", fo.eps_inner},
                                    {"max_rounds", fo.max_rounds},
                                    {"c_sample", so.build.sparsify.subgraph.c_sample},
                                    {"paper_mode", so.paper_mode}}}});
  });
}

int dirlap_stationary(const dirlap_graph* g, double alpha, uint64_t seed,
                      const char* options_json, double* pi, char** report_json) {
  return guarded([&] {
    require(pi != nullptr, "output buffer is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);

    StationaryOptions so;
    so.rounds = opts.value("rounds", so.rounds);
    so.c_stat = opts.value("c_stat", so.c_stat);
    so.q_exp = opts.value("q_exp", so.q_exp);

    StationaryResult res = compute_stationary(L, alpha, {}, seed, so);
    std::memcpy(pi, res.pi.data(), res.pi.size() * sizeof(double));

    emit_report(report_json, json{{"report_version", 1},
                                  {"op", "stationary"},
                                  {"n", L.n()},
                                  {"iterations", res.iterations},
                                  {"refine_rounds", res.refine_rounds},
                                  {"residual", res.residual},
                                  {"params",
                                   {{"alpha", alpha},
                                    {"seed", seed},
                                    {"c_stat", so.c_stat},
                                    {"q_exp", so.q_exp},
                                    {"rounds", so.rounds}}}});
  });
}

int dirlap_pagerank(const dirlap_graph* g, double beta, const double* personalization,
                    double eps, uint64_t seed, const char* options_json, double* p,
                    char** report_json) {
  return guarded([&] {
    require(personalization && p, "personalization or output buffer is null");
    json opts = parse_options(options_json);
    DirectedLaplacian L = laplacian_of(g);
    NormalizedWalk w = normalize(L);

    PagerankOptions po;
    po.alpha = opts.value("alpha", po.alpha);

    Vec pers(personalization, personalization + L.n());
    Vec pv = personalized_pagerank(w, beta, pers, eps, seed, po);
    std::memcpy(p, pv.data(), pv.size() * sizeof(double));

    emit_report(report_json, json{{"report_version", 1},
                                  {"op", "pagerank"},
                                  {"n", L.n()},
                                  {"params",
                                   {{"beta", beta},
                                    {"eps", eps},
                                    {"seed", seed},
                                    {"alpha", po.alpha}}}});
  });
}

int dirlap_oracle_approx_norm(const dirlap_graph* a, const dirlap_graph* atil, double* out) {
  return guarded([&] {
    require(a && atil && out, "input handles or output are null");
    *out = oracle::approx_norm(laplacian_of(a), laplacian_of(atil));
  });
}

int dirlap_oracle_stationary(const dirlap_graph* g, double* pi) {
  return guarded([&] {
    require(pi != nullptr, "output buffer is null");
    Vec v = oracle::exact_stationary(laplacian_of(g));
    std::memcpy(pi, v.data(), v.size() * sizeof(double));
  });
}

int dirlap_oracle_solve(const dirlap_graph* g, const double* b, double* x) {
  return guarded([&] {
    require(b && x, "right-hand side or solution buffer is null");
    DirectedLaplacian L = laplacian_of(g);
    Eigen::MatrixXd Ld = oracle::dense_laplacian(L);
    Eigen::VectorXd bd = oracle::to_eigen(Vec(b, b + L.n()));
    Vec xv = oracle::from_eigen(oracle::dense_pinv(Ld) * bd);
    std::memcpy(x, xv.data(), xv.size() * sizeof(double));
  });
}

int dirlap_oracle_sym_condition(const dirlap_graph* g, double* out) {
  return guarded([&] {
    require(out != nullptr, "output is null");
    *out = oracle::sym_condition_number(oracle::dense_laplacian(laplacian_of(g)));
  });
}

}  // extern "C"
