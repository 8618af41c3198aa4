#pragma once

#include <cstdint>

namespace cvpc {

/// Counter-based standard-normal generator.
///
/// Every draw is a pure function of (seed, stream, counter), so a sample matrix
/// can be filled in any order, by any number of workers, and still be bit-identical.
///
/// Algorithm (documented so goldens can be reproduced elsewhere):
///   key    = splitmix64(seed + 0x9E3779B97F4A7C15 * (stream + 1))
///   bits   = splitmix64(splitmix64(key ^ (counter * 0xD1B54A32D192ED03)))
///   u      = ((bits >> 11) + 0.5) * 2^-53            in (0, 1)
///   z      = -sqrt(2) * erfc_inv(2u)                 (inverse normal CDF)
/// where splitmix64 is the finalizer of Steele et al. (add-free variant).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

double uniform_open(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept;

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Inverse of the standard normal CDF on (0, 1).
double normal_quantile(double u);

}  // namespace cvpc
