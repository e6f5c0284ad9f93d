#pragma once

#include <iosfwd>
#include <string>

#include "dirlap/sparse.hpp"

namespace dirlap {

// Matrix Market coordinate format, 1-indexed "i j w" lines meaning an edge i->j of
// weight w. Duplicates are summed by canonicalization; '%' comments and blank lines
// are skipped.
SparseGraph read_matrix_market(std::istream& in, Kind kind = Kind::adjacency,
                               bool allow_loops = false);
SparseGraph read_matrix_market_file(const std::string& path, Kind kind = Kind::adjacency,
                                    bool allow_loops = false);
void write_matrix_market(std::ostream& out, const SparseGraph& g);
void write_matrix_market_file(const std::string& path, const SparseGraph& g);

// One value per line, '%' comments allowed; the reader demands exactly n values when
// n >= 0.
Vec read_vector(std::istream& in, int n = -1);
Vec read_vector_file(const std::string& path, int n = -1);
void write_vector(std::ostream& out, const Vec& v);
void write_vector_file(const std::string& path, const Vec& v);

}  // namespace dirlap
