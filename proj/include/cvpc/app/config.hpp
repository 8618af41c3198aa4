#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cvpc/basis.hpp"
#include "cvpc/models.hpp"
#include "cvpc/ode.hpp"

namespace cvpc::app {

enum class WeightMode { Pilot, Reference };

struct ExperimentConfig {
  std::string model_name;
  nlohmann::json model_json;  // canonical description, used in cache headers
  StochasticOde ode{"unset", 1, 0, {AffineExpr{}}, {}};
  QoiSpec qoi;

  double budget = 0.0;  // high-fidelity sample units
  unsigned pilot_max_degree = 3;
  std::size_t pilot_samples = 500;
  ExpansionScheme scheme = ExpansionScheme::TotalOrder;
  std::uint64_t seed = 0;
  std::size_t replications = 1;

  double step = 1e-3;
  double t_end = 1.0;
  double report_every = 0.1;

  std::size_t reference_samples = 100000;
  std::filesystem::path reference_cache;

  WeightMode weight_mode = WeightMode::Reference;
  std::optional<double> rhs_weight;  // empty: calibrated by operation count
  unsigned comparator_max_degree = 5;
  std::optional<unsigned> comparator_degree;
  int threads = 0;  // 0 keeps the OpenMP default

  QoiModel qoi_model() const { return {ode, qoi}; }
  TimeGrid report_grid() const;
  std::size_t report_stride() const;
};

/// Parses and validates a config document. Throws ConfigError with a field path.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Model description as JSON (stable key order), usable to rebuild the model.
nlohmann::json describe_model(const StochasticOde& ode);
nlohmann::json describe_qoi(const QoiSpec& qoi);

const char* to_string(WeightMode mode);

}  // namespace cvpc::app
