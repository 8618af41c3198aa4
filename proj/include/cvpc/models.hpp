#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvpc/galerkin.hpp"
#include "cvpc/ode.hpp"

namespace cvpc {

enum class QoiKind {
  StateMoment,                     // Q(t) = x_state(t)
  TimeNormalizedQuadraticIntegral  // Q(t) = (1/t) int_0^t sum_k w_k x_k^2 ds
};

struct QoiSpec {
  QoiKind kind = QoiKind::StateMoment;
  std::size_t state = 0;
  std::vector<double> weights;
  double time = 1.0;
};

/// A model together with its quantity of interest.
///
/// Integral quantities are carried as one extra state q with dq/dt = sum_k w_k x_k^2,
/// so the sampled path and the Galerkin path share one integrator. At t = 0 the
/// quantity is the integrand itself.
class QoiModel {
 public:
  QoiModel(StochasticOde base, QoiSpec spec);

  const StochasticOde& base() const noexcept { return base_; }
  /// The ODE actually integrated (base plus the accumulator state, if any).
  const StochasticOde& system() const noexcept { return system_; }
  const QoiSpec& spec() const noexcept { return spec_; }

  double integrand(std::span<const double> x) const;
  /// Per-sample quantity from an integrated state of system().
  double value(std::span<const double> x, double t) const;
  /// Expansion of the quantity from a Galerkin state of system().
  PcExpansion expansion(const GalerkinSystem& galerkin, std::span<const double> x, double t) const;

 private:
  StochasticOde base_;
  QoiSpec spec_;
  StochasticOde system_;
};

struct ModelPreset {
  std::string name;
  StochasticOde ode;
  QoiSpec qoi;
  std::string provenance;
};

/// theta = (1, 10, 1); x0, y0 ~ N(0.5, 0.5^2), z0 ~ N(15, 0.5^2); Q = int (x^2+y^2+z^2) / t at t = 3.
ModelPreset lorenz_stable();
/// theta = (10, 28, 8/3); same means, standard deviations 0.25.
ModelPreset lorenz_chaotic();
/// dx/dt = -x, x0 ~ N(1, 0.1^2); Q = x(1).
ModelPreset linear_benchmark();

/// Lorenz system dx = t1 (y - x), dy = t2 x - y - x z, dz = x y - t3 z with
/// independent Gaussian initial conditions.
StochasticOde lorenz(std::string name, double theta1, double theta2, double theta3,
                     const std::vector<double>& mean, const std::vector<double>& sigma);

ModelPreset preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace cvpc
