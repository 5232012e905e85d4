#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nora {

std::uint64_t splitmix64(std::uint64_t x);
// Sub-seed for stream `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Portable sampling on top of mt19937_64; the std distributions are
// implementation-defined, which would break cross-platform determinism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  std::uint64_t below(std::uint64_t n);                // uniform in [0, n)
  std::int64_t between(std::int64_t lo, std::int64_t hi);  // inclusive
  double unit();                                       // [0, 1)
  bool chance(double p) { return unit() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(v.size()))];
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace nora
