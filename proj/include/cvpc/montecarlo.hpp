#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cvpc/galerkin.hpp"
#include "cvpc/models.hpp"
#include "cvpc/ode.hpp"

namespace cvpc {

/// N x n_zeta standard normal draws; row i, column d uses counter (first + i) * n_zeta + d
/// of the given stream, so a batch can be drawn in chunks.
struct SampleBatch {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t first = 0;
  std::size_t n = 0;
  std::size_t n_zeta = 0;
  std::vector<double> values;  // row-major

  static SampleBatch draw(std::uint64_t seed, std::size_t n, std::size_t n_zeta, std::uint64_t stream = 0,
                          std::size_t first = 0);

  std::span<const double> row(std::size_t i) const { return {values.data() + i * n_zeta, n_zeta}; }
  /// Identifies the batch by (seed, stream, first, n, n_zeta) without hashing the draws.
  std::uint64_t fingerprint() const noexcept;
};

struct EstimatorResult {
  double mean = 0.0;
  std::optional<double> variance;  // 1/(N-1) sample variance; empty when N < 2
  std::vector<double> values;
  double cost = 0.0;
  std::uint64_t fingerprint = 0;
};

EstimatorResult summarize(std::vector<double> values, double cost, std::uint64_t fingerprint);

/// Per-sample values, one column per reporting time. Column-major.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  SampleMatrix() = default;
  SampleMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  double& at(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double at(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
  std::span<const double> column(std::size_t j) const { return {data.data() + j * rows, rows}; }
};

enum class Execution { Serial, Parallel };

/// Grid indices reported by a run with the given stride: multiples of stride and the last step.
std::vector<std::size_t> report_indices(const TimeGrid& grid, std::size_t stride);

/// Integrates the model once per sample and records the quantity at every reported index.
///
/// Serial evaluates the generic right-hand side and is the reference; Parallel
/// realizes the coefficients per sample and runs samples on OpenMP threads.
/// Both produce bit-identical matrices.
SampleMatrix sample_qoi(const QoiModel& model, const SampleBatch& batch, const TimeGrid& grid,
                        std::size_t stride, Execution exec = Execution::Parallel);

/// Evaluates one expansion per column at every sample of the batch.
SampleMatrix sample_surrogate(std::span<const PcExpansion> expansions, const SampleBatch& batch,
                              Execution exec = Execution::Parallel);

/// Plain MC estimate of the quantity at time t (grid step `step`). Cost is N.
EstimatorResult mc_estimate(const QoiModel& model, const SampleBatch& batch, double t, double step = 1e-3,
                            Execution exec = Execution::Parallel);

/// Correlated mean estimator: the surrogate averaged over the same batch. Cost 0.
EstimatorResult cme_estimate(const PcExpansion& expansion, const SampleBatch& batch);

}  // namespace cvpc
