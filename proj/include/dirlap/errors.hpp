#pragma once

#include <stdexcept>
#include <string>

namespace dirlap {

enum class Status : int {
  ok = 0,
  negative_weight = 1,
  non_finite = 2,
  empty_matrix = 3,
  zero_degree_vertex = 4,
  zero_kernel_vector = 5,
  self_loop = 6,
  dimension_mismatch = 7,
  deficit_mismatch = 8,
  oversample_exhausted = 9,
  empty_set = 10,
  full_set = 11,
  nonterminating_decomposition = 12,
  not_eulerian = 13,
  not_strongly_connected = 14,
  norm_mismatch = 15,
  row_col_mismatch = 16,
  chain_kernel_drift = 17,
  recursion_budget_exceeded = 18,
  lambda_estimate_failed = 19,
  inner_solver_failure = 20,
  dimension_cap = 21,
  kernel_mismatch = 22,
  not_psd_symmetrization = 23,
  io_error = 24,
  usage_error = 25,
  invalid_argument = 26,
};

const char* status_name(Status s);

// All core routines report failure by throwing Error; the C shim translates the
// code to an integer and stashes the message thread-locally.
class Error : public std::runtime_error {
 public:
  Error(Status code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Status code() const { return code_; }

 private:
  Status code_;
};

[[noreturn]] inline void fail(Status code, const std::string& what) { throw Error(code, what); }

}  // namespace dirlap
