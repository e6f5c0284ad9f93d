#include "dirlap/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dirlap {

namespace {

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    size_t i = line.find_first_not_of(" \t\r\n");
    if (i == std::string::npos) continue;
    if (line[i] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

SparseGraph read_matrix_market(std::istream& in, Kind kind, bool allow_loops) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("%%MatrixMarket", 0) != 0)
    fail(Status::io_error, "missing %%MatrixMarket header");
  std::istringstream hs(header);
  std::string tag, object, format, field, symmetry;
  hs >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || field != "real" || symmetry != "general")
    fail(Status::io_error, "unsupported Matrix Market flavor: " + header);

  std::string line;
  if (!next_data_line(in, line)) fail(Status::io_error, "missing size line");
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz)) fail(Status::io_error, "bad size line: " + line);
  }
  if (rows != cols) fail(Status::io_error, "matrix must be square");
  std::vector<Entry> entries;
  entries.reserve(static_cast<size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, line)) fail(Status::io_error, "truncated entry list");
    std::istringstream ls(line);
    long i = 0, j = 0;
    double w = 0;
    if (!(ls >> i >> j >> w)) fail(Status::io_error, "bad entry line: " + line);
    if (i < 1 || i > rows || j < 1 || j > cols)
      fail(Status::io_error, "entry index out of range: " + line);
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), w});
  }
  return SparseGraph::from_triplets(static_cast<int>(rows), std::move(entries), kind,
                                    allow_loops);
}

SparseGraph read_matrix_market_file(const std::string& path, Kind kind, bool allow_loops) {
  std::ifstream in(path);
  if (!in) fail(Status::io_error, "cannot open " + path);
  return read_matrix_market(in, kind, allow_loops);
}

void write_matrix_market(std::ostream& out, const SparseGraph& g) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << g.n() << " " << g.n() << " " << g.nnz() << "\n";
  char buf[64];
  for (const Entry& e : g.entries()) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", e.row + 1, e.col + 1, e.w);
    out << buf;
  }
}

void write_matrix_market_file(const std::string& path, const SparseGraph& g) {
  std::ofstream out(path);
  if (!out) fail(Status::io_error, "cannot open " + path + " for writing");
  write_matrix_market(out, g);
  if (!out.good()) fail(Status::io_error, "write failed: " + path);
}

Vec read_vector(std::istream& in, int n) {
  Vec v;
  std::string line;
  while (next_data_line(in, line)) {
    std::istringstream ls(line);
    double x = 0;
    while (ls >> x) v.push_back(x);
  }
  if (n >= 0 && static_cast<int>(v.size()) != n)
    fail(Status::io_error, "vector has " + std::to_string(v.size()) + " values, expected " +
                               std::to_string(n));
  return v;
}

Vec read_vector_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) fail(Status::io_error, "cannot open " + path);
  return read_vector(in, n);
}

void write_vector(std::ostream& out, const Vec& v) {
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    out << buf;
  }
}

void write_vector_file(const std::string& path, const Vec& v) {
  std::ofstream out(path);
  if (!out) fail(Status::io_error, "cannot open " + path + " for writing");
  write_vector(out, v);
  if (!out.good()) fail(Status::io_error, "write failed: " + path);
}

}  // namespace dirlap
