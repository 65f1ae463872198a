#include "sensegraph/rng.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace sensegraph {

std::size_t Rng::uniform_index(std::size_t n) {
  assert(n > 0);
  const auto bound = static_cast<std::uint64_t>(n);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  // 2^64 mod bound values at the top are discarded to remove modulo bias.
  const std::uint64_t excess = (kMax % bound + 1) % bound;
  std::uint64_t r = engine_();
  while (r > kMax - excess) r = engine_();
  return static_cast<std::size_t>(r % bound);
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace sensegraph
