// Command-line front end. Everything numerical goes through the C API in
// dirlap.h; this file only parses arguments, moves files, and shapes reports.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dirlap.h"
#include "json.hpp"

using json = nlohmann::json;

namespace {

// exit 2: the input or its validation is at fault; exit 3: the numerics gave
// up inside their own guard rails (budgets, resample limits, caps).
int exit_code_for(int st) {
  switch (st) {
    case DIRLAP_OVERSAMPLE_EXHAUSTED:
    case DIRLAP_NONTERMINATING_DECOMPOSITION:
    case DIRLAP_CHAIN_KERNEL_DRIFT:
    case DIRLAP_RECURSION_BUDGET_EXCEEDED:
    case DIRLAP_LAMBDA_ESTIMATE_FAILED:
    case DIRLAP_INNER_SOLVER_FAILURE:
    case DIRLAP_DIMENSION_CAP:
      return 3;
    default:
      return 2;
  }
}

void check(int st) {
  if (st == DIRLAP_OK) return;
  std::fprintf(stderr, "dirlap: %s: %s\n", dirlap_status_name(st), dirlap_last_error());
  std::exit(exit_code_for(st));
}

struct Graph {
  dirlap_graph* p = nullptr;
  ~Graph() { dirlap_graph_free(p); }
};

struct Str {
  char* p = nullptr;
  ~Str() { dirlap_free(p); }
};

struct Buf {
  double* p = nullptr;
  ~Buf() { dirlap_free(p); }
};

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

Graph read_graph(const std::string& path, bool allow_loops = false) {
  Graph g;
  check(dirlap_graph_read(path.c_str(), allow_loops ? 1 : 0, &g.p));
  return g;
}

std::vector<double> read_vec(const std::string& path, int n) {
  Buf b;
  int got = 0;
  check(dirlap_vector_read(path.c_str(), n, &b.p, &got));
  return std::vector<double>(b.p, b.p + got);
}

// Solution vectors go to a file when one is named, otherwise to stdout in the
// same one-value-per-line format.
void output_vector(const std::string& path, const std::vector<double>& v) {
  if (path.empty()) {
    for (double x : v) std::printf("%.17g\n", x);
    return;
  }
  check(dirlap_vector_write(path.c_str(), v.data(), static_cast<int>(v.size())));
}

// Wraps the library's JSON report with the invocation and total wall time.
void write_report(const std::string& path, const char* lib_report, const std::string& command,
                  double wall) {
  if (path.empty()) return;
  json j = lib_report ? json::parse(lib_report) : json::object();
  j["command"] = command;
  j["wall_seconds_total"] = wall;
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "dirlap: cannot write report to %s\n", path.c_str());
    std::exit(2);
  }
  out << j.dump(2) << "\n";
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// Least-squares slope of log(time) against log(nnz).
double loglog_slope(const std::vector<double>& nnz, const std::vector<double>& time) {
  const size_t k = nnz.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < k; ++i) {
    mx += std::log(nnz[i]);
    my += std::log(time[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double num = 0, den = 0;
  for (size_t i = 0; i < k; ++i) {
    const double dx = std::log(nnz[i]) - mx;
    num += dx * (std::log(time[i]) - my);
    den += dx * dx;
  }
  return num / den;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string command = join_args(argc, argv);
  const double t0 = now_seconds();

  CLI::App app{"directed-Laplacian sparsification and solver toolkit"};
  app.require_subcommand(1);

  // ---- sparsify ----------------------------------------------------------
  struct {
    double eps = 0.25, p = 0.01, c_sample = 16.0, phi = 0.0;
    uint64_t seed = 0;
    std::string report, in, out;
  } sp;
  auto* sparsify = app.add_subcommand("sparsify", "degree-preserving Eulerian sparsification");
  sparsify->add_option("--eps", sp.eps, "approximation accuracy")->required();
  sparsify->add_option("--p", sp.p, "failure probability budget");
  sparsify->add_option("--c-sample", sp.c_sample, "oversampling constant");
  sparsify->add_option("--phi", sp.phi, "conductance target (0 = auto schedule)");
  sparsify->add_option("--seed", sp.seed, "rng seed; fixed seed = bit-identical output");
  sparsify->add_option("--report", sp.report, "write the JSON run report here");
  sparsify->add_option("input", sp.in, "input graph (.mtx)")->required()->check(CLI::ExistingFile);
  sparsify->add_option("output", sp.out, "output graph (.mtx)")->required();

  // ---- sparsify-square ---------------------------------------------------
  struct {
    double eps = 0.3, p = 0.01, c_sample = 16.0, phi = 0.0;
    uint64_t seed = 0;
    std::string report, in, out;
  } sq;
  auto* square = app.add_subcommand(
      "sparsify-square", "sparsify the implicit square walk of a weight matrix");
  square->add_option("--eps", sq.eps, "approximation accuracy")->required();
  square->add_option("--p", sq.p, "failure probability budget");
  square->add_option("--c-sample", sq.c_sample, "oversampling constant");
  square->add_option("--phi", sq.phi, "conductance target (0 = auto schedule)");
  square->add_option("--seed", sq.seed, "rng seed");
  square->add_option("--report", sq.report, "write the JSON run report here");
  square->add_option("input", sq.in, "weight matrix (.mtx, loops allowed)")
      ->required()
      ->check(CLI::ExistingFile);
  square->add_option("output", sq.out, "output weight matrix (.mtx)")->required();

  // ---- decompose ---------------------------------------------------------
  struct {
    double phi = 0.0;
    bool edges = false;
    uint64_t seed = 0;
    std::string report, in, out;
  } dc;
  auto* decompose = app.add_subcommand("decompose", "expander decomposition manifest");
  decompose->add_option("--phi", dc.phi, "conductance target (0 = auto schedule)");
  decompose->add_flag("--include-edges", dc.edges, "embed piece edge lists in the manifest");
  decompose->add_option("--seed", dc.seed, "rng seed");
  decompose->add_option("--report", dc.report, "also write the manifest here");
  decompose->add_option("input", dc.in, "input graph (.mtx)")->required()->check(CLI::ExistingFile);
  decompose->add_option("output", dc.out, "manifest file (default: stdout)");

  // ---- solve-eulerian / solve --------------------------------------------
  struct SolveArgs {
    double eps = 1e-6;
    uint64_t seed = 0;
    bool paper = false;
    double c_out = 1.5, stop_lambda = 0.225;
    uint64_t c_budget = 64;
    int d_cap = 200;
    double alpha = 0.05, c_pert = 1000.0, eps_inner = 1e-2;
    int max_rounds = 60;
    std::string report, in, b, out;
  } se, sf;

  auto add_solver_flags = [](CLI::App* cmd, SolveArgs& a) {
    cmd->add_option("--eps", a.eps, "relative accuracy")->required();
    cmd->add_option("--seed", a.seed, "rng seed");
    cmd->add_flag("--paper-mode", a.paper, "literal inner accuracy schedule");
    cmd->add_option("--c-out", a.c_out, "outer Richardson constant");
    cmd->add_option("--c-budget", a.c_budget, "operator application budget constant");
    cmd->add_option("--stop-lambda", a.stop_lambda, "chain early-stop gap");
    cmd->add_option("--d-cap", a.d_cap, "chain depth hard cap");
    cmd->add_option("--report", a.report, "write the JSON run report here");
    cmd->add_option("input", a.in, "input graph (.mtx)")->required()->check(CLI::ExistingFile);
    cmd->add_option("rhs", a.b, "right-hand side (.vec)")->required()->check(CLI::ExistingFile);
    cmd->add_option("output", a.out, "solution file (default: stdout)");
  };

  auto* solve_e = app.add_subcommand("solve-eulerian", "solve L x = b for an Eulerian graph");
  add_solver_flags(solve_e, se);

  auto* solve_f =
      app.add_subcommand("solve", "solve L x = b for any strongly connected graph");
  add_solver_flags(solve_f, sf);
  solve_f->add_option("--alpha", sf.alpha, "stationary restart parameter");
  solve_f->add_option("--c-pert", sf.c_pert, "diagonal perturbation constant");
  solve_f->add_option("--eps-inner", sf.eps_inner, "per-round preconditioner accuracy");
  solve_f->add_option("--max-rounds", sf.max_rounds, "refinement round cap");

  // ---- stationary --------------------------------------------------------
  struct {
    double alpha = 0.1;
    uint64_t seed = 0;
    std::string report, in, out;
  } st;
  auto* stationary = app.add_subcommand("stationary", "stationary distribution of the walk");
  stationary->add_option("--alpha", st.alpha, "restart parameter in (0, 1/2]");
  stationary->add_option("--seed", st.seed, "rng seed");
  stationary->add_option("--report", st.report, "write the JSON run report here");
  stationary->add_option("input", st.in, "input graph (.mtx)")
      ->required()
      ->check(CLI::ExistingFile);
  stationary->add_option("output", st.out, "distribution file (default: stdout)");

  // ---- pagerank ----------------------------------------------------------
  struct {
    double beta = 0.15, eps = 1e-8;
    int seed_vertex = -1;
    uint64_t seed = 0;
    std::string pers, report, in, out;
  } pr;
  auto* pagerank = app.add_subcommand("pagerank", "personalized PageRank");
  pagerank->add_option("--beta", pr.beta, "restart probability in (0, 1]");
  pagerank->add_option("--eps", pr.eps, "accuracy");
  auto* opt_sv =
      pagerank->add_option("--seed-vertex", pr.seed_vertex, "personalize on one vertex");
  auto* opt_pf = pagerank->add_option("--personalization", pr.pers, "personalization .vec")
                     ->check(CLI::ExistingFile);
  opt_sv->excludes(opt_pf);
  pagerank->add_option("--seed", pr.seed, "rng seed");
  pagerank->add_option("--report", pr.report, "write the JSON run report here");
  pagerank->add_option("input", pr.in, "input graph (.mtx)")->required()->check(CLI::ExistingFile);
  pagerank->add_option("output", pr.out, "distribution file (default: stdout)");

  // ---- bench -------------------------------------------------------------
  struct {
    std::vector<int> sizes = {1 << 10, 1 << 12, 1 << 14};
    double eps = 1e-6;
    int degree = 6;
    uint64_t seed = 1;
    std::string report;
  } be;
  auto* bench = app.add_subcommand("bench", "near-linear scaling probe of the Eulerian solver");
  bench->add_option("--sizes", be.sizes, "vertex counts, ascending")->delimiter(',');
  bench->add_option("--eps", be.eps, "solve accuracy");
  bench->add_option("--degree", be.degree, "average out-degree of the random family");
  bench->add_option("--seed", be.seed, "rng seed");
  bench->add_option("--report", be.report, "write the JSON run report here");

  // ---- oracle (hidden; dense reference, debugging only) -------------------
  struct {
    std::string a, b, vec;
  } orc;
  auto* oracle = app.add_subcommand("oracle", "dense reference computations")->group("");
  auto* o_norm = oracle->add_subcommand("approx-norm", "asymmetric approximation norm");
  o_norm->add_option("a", orc.a, "reference graph")->required()->check(CLI::ExistingFile);
  o_norm->add_option("b", orc.b, "approximating graph")->required()->check(CLI::ExistingFile);
  auto* o_stat = oracle->add_subcommand("stationary", "exact stationary distribution");
  o_stat->add_option("input", orc.a, "input graph")->required()->check(CLI::ExistingFile);
  auto* o_solve = oracle->add_subcommand("solve", "dense pseudoinverse solve");
  o_solve->add_option("input", orc.a, "input graph")->required()->check(CLI::ExistingFile);
  o_solve->add_option("rhs", orc.vec, "right-hand side (.vec)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* o_cond = oracle->add_subcommand("condition", "symmetrization condition number");
  o_cond->add_option("input", orc.a, "input graph")->required()->check(CLI::ExistingFile);
  oracle->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::fprintf(stderr, "dirlap: %s\n", e.what());
    return 64;
  }

  if (*sparsify) {
    Graph g = read_graph(sp.in);
    json opts{{"p", sp.p}, {"c_sample", sp.c_sample}, {"phi_target", sp.phi}};
    Graph out;
    Str rep;
    check(dirlap_sparsify(g.p, sp.eps, sp.seed, opts.dump().c_str(), &out.p, &rep.p));
    check(dirlap_graph_write(out.p, sp.out.c_str()));
    write_report(sp.report, rep.p, command, now_seconds() - t0);
    std::printf("sparsify: %zu -> %zu entries\n", dirlap_graph_nnz(g.p), dirlap_graph_nnz(out.p));
    return 0;
  }

  if (*square) {
    Graph g = read_graph(sq.in, /*allow_loops=*/true);
    json opts{{"p", sq.p}, {"c_sample", sq.c_sample}, {"phi_target", sq.phi}};
    Graph out;
    Str rep;
    check(dirlap_sparsify_square(g.p, sq.eps, sq.seed, opts.dump().c_str(), &out.p, &rep.p));
    check(dirlap_graph_write(out.p, sq.out.c_str()));
    write_report(sq.report, rep.p, command, now_seconds() - t0);
    std::printf("sparsify-square: %zu -> %zu entries\n", dirlap_graph_nnz(g.p),
                dirlap_graph_nnz(out.p));
    return 0;
  }

  if (*decompose) {
    Graph g = read_graph(dc.in);
    json opts{{"phi_target", dc.phi}, {"include_edges", dc.edges}};
    Str manifest;
    check(dirlap_decompose(g.p, dc.seed, opts.dump().c_str(), &manifest.p));
    if (dc.out.empty()) {
      std::printf("%s\n", manifest.p);
    } else {
      std::ofstream f(dc.out);
      if (!f) check(DIRLAP_IO_ERROR);
      f << manifest.p << "\n";
    }
    write_report(dc.report, manifest.p, command, now_seconds() - t0);
    return 0;
  }

  auto run_solve = [&](const SolveArgs& a, bool eulerian) {
    Graph g = read_graph(a.in);
    const int n = dirlap_graph_n(g.p);
    std::vector<double> b = read_vec(a.b, n);
    std::vector<double> x(static_cast<size_t>(n));
    json opts{{"paper_mode", a.paper}, {"c_out", a.c_out},           {"c_budget", a.c_budget},
              {"stop_lambda", a.stop_lambda}, {"d_cap", a.d_cap}};
    Str rep;
    if (eulerian) {
      check(dirlap_solve_eulerian(g.p, b.data(), a.eps, a.seed, opts.dump().c_str(), x.data(),
                                  &rep.p));
    } else {
      opts["alpha"] = a.alpha;
      opts["c_pert"] = a.c_pert;
      opts["eps_inner"] = a.eps_inner;
      opts["max_rounds"] = a.max_rounds;
      check(dirlap_solve(g.p, b.data(), a.eps, a.seed, opts.dump().c_str(), x.data(), &rep.p));
    }
    output_vector(a.out, x);
    write_report(a.report, rep.p, command, now_seconds() - t0);
  };

  if (*solve_e) {
    run_solve(se, true);
    return 0;
  }
  if (*solve_f) {
    run_solve(sf, false);
    return 0;
  }

  if (*stationary) {
    Graph g = read_graph(st.in);
    std::vector<double> pi(static_cast<size_t>(dirlap_graph_n(g.p)));
    Str rep;
    check(dirlap_stationary(g.p, st.alpha, st.seed, nullptr, pi.data(), &rep.p));
    output_vector(st.out, pi);
    write_report(st.report, rep.p, command, now_seconds() - t0);
    return 0;
  }

  if (*pagerank) {
    Graph g = read_graph(pr.in);
    const int n = dirlap_graph_n(g.p);
    std::vector<double> pers;
    if (!pr.pers.empty()) {
      pers = read_vec(pr.pers, n);
    } else if (pr.seed_vertex >= 0) {
      if (pr.seed_vertex >= n) {
        std::fprintf(stderr, "dirlap: --seed-vertex %d out of range for n = %d\n",
                     pr.seed_vertex, n);
        return 2;
      }
      pers.assign(static_cast<size_t>(n), 0.0);
      pers[static_cast<size_t>(pr.seed_vertex)] = 1.0;
    } else {
      pers.assign(static_cast<size_t>(n), 1.0 / n);  // unpersonalized PageRank
    }
    std::vector<double> p(static_cast<size_t>(n));
    Str rep;
    check(dirlap_pagerank(g.p, pr.beta, pers.data(), pr.eps, pr.seed, nullptr, p.data(),
                          &rep.p));
    output_vector(pr.out, p);
    write_report(pr.report, rep.p, command, now_seconds() - t0);
    return 0;
  }

  if (*bench) {
    json entries = json::array();
    std::vector<double> fit_nnz, fit_time;
    std::printf("%10s %12s %10s %16s %12s %4s\n", "n", "nnz", "seconds", "applications",
                "chain_nnz", "d");
    for (size_t idx = 0; idx < be.sizes.size(); ++idx) {
      const int n = be.sizes[idx];
      json spec{{"family", "er-eulerian"},
                {"n", n},
                {"m", be.degree * n},
                {"wmin", 0.5},
                {"wmax", 2.0}};
      Graph g;
      check(dirlap_graph_generate(spec.dump().c_str(), be.seed + idx, &g.p));
      const size_t nnz = dirlap_graph_nnz(g.p);

      // deterministic mean-free demand: the bench must not depend on a second
      // rng stream, or two runs could disagree on the application counts
      std::vector<double> b(static_cast<size_t>(n));
      double mean = 0;
      for (int i = 0; i < n; ++i) {
        b[static_cast<size_t>(i)] = std::sin(1.0 + i);
        mean += b[static_cast<size_t>(i)];
      }
      for (double& v : b) v -= mean / n;

      std::vector<double> x(static_cast<size_t>(n));
      Str rep;
      const int rc = dirlap_solve_eulerian(g.p, b.data(), be.eps, be.seed, nullptr, x.data(),
                                           &rep.p);
      if (rc != DIRLAP_OK) {
        std::printf("%10d %12zu   failed: %s\n", n, nnz, dirlap_status_name(rc));
        entries.push_back(
            {{"n", n}, {"nnz", nnz}, {"status", dirlap_status_name(rc)}});
        continue;
      }
      json r = json::parse(rep.p);
      const double secs = r["wall_seconds"].get<double>();
      std::printf("%10d %12zu %10.3f %16llu %12d %4d\n", n, nnz, secs,
                  static_cast<unsigned long long>(r["applications"].get<uint64_t>()),
                  r["chain_nnz"].get<int>(), r["d"].get<int>());
      entries.push_back({{"n", n},
                         {"nnz", nnz},
                         {"status", "Ok"},
                         {"wall_seconds", secs},
                         {"applications", r["applications"]},
                         {"chain_nnz", r["chain_nnz"]},
                         {"d", r["d"]},
                         {"lambda_hat", r["lambda_hat"]},
                         {"residual", r["residual"]}});
      fit_nnz.push_back(static_cast<double>(nnz));
      fit_time.push_back(secs);
    }
    json out{{"report_version", 1},
             {"op", "bench"},
             {"entries", std::move(entries)},
             {"params", {{"eps", be.eps}, {"seed", be.seed}, {"degree", be.degree}}}};
    if (fit_nnz.size() >= 2) {
      const double slope = loglog_slope(fit_nnz, fit_time);
      std::printf("log-log slope (time vs nnz): %.3f\n", slope);
      out["slope"] = slope;
    } else {
      out["slope"] = nullptr;  // single size: slope omitted
    }
    write_report(be.report, out.dump(2).c_str(), command, now_seconds() - t0);
    return 0;
  }

  if (*oracle) {
    if (*o_norm) {
      Graph a = read_graph(orc.a), b = read_graph(orc.b);
      double v = 0;
      check(dirlap_oracle_approx_norm(a.p, b.p, &v));
      std::printf("%.17g\n", v);
    } else if (*o_stat) {
      Graph g = read_graph(orc.a);
      std::vector<double> pi(static_cast<size_t>(dirlap_graph_n(g.p)));
      check(dirlap_oracle_stationary(g.p, pi.data()));
      output_vector("", pi);
    } else if (*o_solve) {
      Graph g = read_graph(orc.a);
      const int n = dirlap_graph_n(g.p);
      std::vector<double> b = read_vec(orc.vec, n);
      std::vector<double> x(static_cast<size_t>(n));
      check(dirlap_oracle_solve(g.p, b.data(), x.data()));
      output_vector("", x);
    } else if (*o_cond) {
      Graph g = read_graph(orc.a);
      double v = 0;
      check(dirlap_oracle_sym_condition(g.p, &v));
      std::printf("%.17g\n", v);
    }
    return 0;
  }

  return 64;  // unreachable with require_subcommand(1)
}
