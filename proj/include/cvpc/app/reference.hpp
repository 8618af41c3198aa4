#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvpc/app/config.hpp"

namespace cvpc::app {

/// Stream reserved for reference samples.
inline constexpr std::uint64_t kReferenceStream = std::uint64_t{1} << 41;

/// Large-sample MC mean/variance trajectory on the reporting grid.
///
/// Cache file: one line of JSON header (model, quantity, seed, samples, step,
/// horizon, reporting interval), then CSV `t,mean,variance,std_error_mean`
/// with 17 significant digits.
struct Reference {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> std_error_mean;
  std::size_t samples = 0;
};

nlohmann::json reference_header(const ExperimentConfig& config);

/// Runs the reference ensemble in fixed-size chunks merged in index order.
Reference build_reference(const ExperimentConfig& config);

void write_reference(const std::filesystem::path& path, const nlohmann::json& header, const Reference& ref);

enum class CacheStatus { Hit, Built, Rebuilt };
const char* to_string(CacheStatus status);

/// Returns the cached reference when its header matches; builds and writes it
/// when absent. A mismatching cache throws CacheConflict unless `force`.
Reference obtain_reference(const ExperimentConfig& config, bool force, CacheStatus* status = nullptr);

/// Formats with 17 significant digits ("nan" for NaN).
std::string format_double(double v);

}  // namespace cvpc::app
