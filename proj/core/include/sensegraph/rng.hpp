#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace sensegraph {

// std::mt19937_64's output sequence is fixed by the standard, but the
// standard distributions are not; these helpers keep draws identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n), rejection sampled. n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sensegraph
