#pragma once

#include <cstdint>
#include <optional>

#include "cvpc/basis.hpp"
#include "cvpc/design.hpp"
#include "cvpc/galerkin.hpp"
#include "cvpc/models.hpp"

namespace cvpc {

/// Stream reserved for pilot samples, disjoint from replication streams.
inline constexpr std::uint64_t kPilotStream = std::uint64_t{1} << 40;

struct PilotSettings {
  unsigned p_pilot = 3;
  std::size_t n_pilot = 500;
  std::uint64_t seed = 0;
  double step = 1e-3;
  double time = 1.0;  // quantity is correlated at this time
  ExpansionScheme scheme = ExpansionScheme::TotalOrder;
  std::optional<double> rhs_weight;  // fixed weight per coefficient ODE; counted when empty
};

/// Cost of integrating `system` in high-fidelity sample units.
///
/// Both integrations take the same steps, so the cost is M * w where w is the
/// relative RHS weight of one coefficient ODE. A fixed `rhs_weight` is used as
/// given; otherwise w is the ratio of floating-point operations per RHS call,
/// Galerkin over high fidelity, divided by M.
double galerkin_cost(const GalerkinSystem& system, const StochasticOde& hf, std::optional<double> rhs_weight);

/// galerkin_cost of the degree-p projection of the model's augmented system.
double galerkin_cost(const QoiModel& model, unsigned p, ExpansionScheme scheme, std::optional<double> rhs_weight);

/// Runs the model on N_pilot shared samples and, for every degree 0..p_pilot,
/// the Galerkin surrogate; records correlation and cost per degree.
PilotStats run_pilot(const QoiModel& model, const PilotSettings& settings);

}  // namespace cvpc
