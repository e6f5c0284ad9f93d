#pragma once

#include <cstdint>

namespace dirlap {

// Counter-based splittable generator: output = mix(key, counter). Children derive
// fresh keys from (key, tag), so k parallel sampling chunks draw from disjoint
// streams and results merge deterministically regardless of thread count.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(mix64(seed ^ 0x9e3779b97f4a7c15ull)) {}

  uint64_t next_u64() { return mix2(key_, ctr_++); }

  // [0, 1), 53-bit mantissa
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n) {
    // rejection-free modulo is fine here: n is tiny relative to 2^64 in all uses,
    // and reproducibility matters more than the 2^-40 bias
    return next_u64() % n;
  }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  Rng child(uint64_t tag) const { return Rng(mix2(key_, 0xd1b54a32d192ed03ull ^ tag)); }

  static uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t mix2(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace dirlap
