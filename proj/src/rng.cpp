#include "cvpc/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

namespace cvpc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

double uniform_open(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  const std::uint64_t key = splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
  const std::uint64_t bits = splitmix64(splitmix64(key ^ (counter * 0xD1B54A32D192ED03ULL)));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return normal_quantile(uniform_open(seed, stream, counter));
}

}  // namespace cvpc
