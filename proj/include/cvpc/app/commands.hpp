#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvpc/app/config.hpp"
#include "cvpc/app/reference.hpp"
#include "cvpc/design.hpp"

namespace cvpc::app {

struct DesignOutcome {
  PilotStats pilot;
  FittedModels fit;
  DegreeZero degree_zero;
  EstimatorDesign design;
};

/// Pilot, fit, and discrete design for the configured budget.
/// The pilot is run at the quantity's time and is not charged to the budget.
DesignOutcome design_experiment(const ExperimentConfig& config);

nlohmann::json design_to_json(const ExperimentConfig& config, const DesignOutcome& outcome);

struct EstimateOptions {
  bool alpha_zero = false;
  bool force_reference = false;
};

/// One CVPC run at the design's (p*, N*), replication stream 0.
nlohmann::json run_estimate(const ExperimentConfig& config, const nlohmann::json& design, const EstimateOptions& options);

struct BenchmarkRow {
  double t = 0.0;
  std::string estimator;  // MC, gPC, CVPC, CVPC-suboptimal
  std::string stat;       // mean, variance
  double estimate = 0.0;  // average over replications
  double rmse = 0.0;
  double rmse_std_error = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double cost = 0.0;
  double reference = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  DesignOutcome design;
  unsigned gpc_degree = 0;
  std::size_t n_mc = 0;
  std::size_t replications = 0;
  std::string replication_mode;
  bool surrogate_diverged = false;
  double surrogate_last_finite_time = 0.0;
  bool comparator_diverged = false;
  double comparator_last_finite_time = 0.0;

  const BenchmarkRow& row(double t, const std::string& estimator, const std::string& stat) const;
  std::vector<double> times() const;
};

/// Equal-budget comparison of MC, gPC, CVPC and CVPC with swapped weights.
///
/// Replication r draws its MC batch from stream r; CVPC uses the leading N* rows
/// of that batch, so the two estimators of one replication share samples.
BenchmarkReport run_benchmark(const ExperimentConfig& config, const Reference& reference, std::size_t replications);

/// Writes benchmark.csv (t,estimator,stat,estimate,rmse,alpha,rho,cost,replication_mode),
/// benchmark_relative.csv and benchmark_meta.json into `dir`.
void write_benchmark(const BenchmarkReport& report, const std::filesystem::path& dir);

/// Largest degree <= cap whose measured Galerkin cost fits the budget.
unsigned comparator_degree(const ExperimentConfig& config);

}  // namespace cvpc::app
