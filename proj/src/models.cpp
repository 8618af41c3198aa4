#include "cvpc/models.hpp"

#include <cmath>
#include <stdexcept>

#include "cvpc/error.hpp"

namespace cvpc {

namespace {

StochasticOde augment(const StochasticOde& base, const QoiSpec& spec) {
  if (spec.kind == QoiKind::StateMoment) {
    if (spec.state >= base.n_states()) throw DimensionMismatch("quantity of interest refers to a missing state");
    return base;
  }
  if (spec.weights.size() != base.n_states()) {
    throw DimensionMismatch("integral quantity needs one weight per state");
  }
  auto initial = base.initial_conditions();
  initial.push_back(AffineExpr{});
  auto terms = base.terms();
  const std::size_t aux = base.n_states();
  for (std::size_t k = 0; k < base.n_states(); ++k) {
    if (!std::isfinite(spec.weights[k])) throw std::invalid_argument("quantity weights must be finite");
    if (spec.weights[k] != 0.0) terms.push_back({aux, {k, k}, AffineExpr{spec.weights[k], {}}});
  }
  return {base.name(), aux + 1, base.n_zeta(), std::move(initial), std::move(terms)};
}

}  // namespace

QoiModel::QoiModel(StochasticOde base, QoiSpec spec)
    : base_(std::move(base)), spec_(std::move(spec)), system_(augment(base_, spec_)) {
  if (!(spec_.time >= 0.0)) throw std::invalid_argument("quantity time must be non-negative");
}

double QoiModel::integrand(std::span<const double> x) const {
  if (spec_.kind == QoiKind::StateMoment) return x[spec_.state];
  double value = 0.0;
  for (std::size_t k = 0; k < spec_.weights.size(); ++k) value += spec_.weights[k] * x[k] * x[k];
  return value;
}

double QoiModel::value(std::span<const double> x, double t) const {
  if (spec_.kind == QoiKind::StateMoment) return x[spec_.state];
  if (t <= 0.0) return integrand(x);
  return x[base_.n_states()] / t;
}

PcExpansion QoiModel::expansion(const GalerkinSystem& galerkin, std::span<const double> x, double t) const {
  if (spec_.kind == QoiKind::StateMoment) return galerkin.expansion(x, spec_.state);
  const std::size_t aux = base_.n_states();
  if (t <= 0.0) {
    // The accumulator's right-hand side is the projected integrand.
    std::vector<double> dx(galerkin.size());
    galerkin.rhs(x, dx);
    return galerkin.expansion(dx, aux);
  }
  auto e = galerkin.expansion(x, aux);
  for (auto& c : e.coefficients) c /= t;
  return e;
}

StochasticOde lorenz(std::string name, double theta1, double theta2, double theta3,
                     const std::vector<double>& mean, const std::vector<double>& sigma) {
  if (mean.size() != 3 || sigma.size() != 3) throw DimensionMismatch("Lorenz needs three means and sigmas");
  std::vector<AffineExpr> initial(3);
  for (std::size_t k = 0; k < 3; ++k) {
    initial[k].constant = mean[k];
    initial[k].slopes.assign(3, 0.0);
    initial[k].slopes[k] = sigma[k];
  }
  auto c = [](double v) { return AffineExpr{v, {}}; };
  std::vector<PolynomialTerm> terms{
      {0, {1}, c(theta1)},  {0, {0}, c(-theta1)},
      {1, {0}, c(theta2)},  {1, {1}, c(-1.0)},    {1, {0, 2}, c(-1.0)},
      {2, {0, 1}, c(1.0)},  {2, {2}, c(-theta3)},
  };
  return {std::move(name), 3, 3, std::move(initial), std::move(terms)};
}

ModelPreset lorenz_stable() {
  return {"lorenz-stable",
          lorenz("lorenz-stable", 1.0, 10.0, 1.0, {0.5, 0.5, 15.0}, {0.5, 0.5, 0.5}),
          {QoiKind::TimeNormalizedQuadraticIntegral, 0, {1.0, 1.0, 1.0}, 3.0},
          "Lorenz, fixed-point attractors at (+-3, +-3, 9); v1"};
}

ModelPreset lorenz_chaotic() {
  return {"lorenz-chaotic",
          lorenz("lorenz-chaotic", 10.0, 28.0, 8.0 / 3.0, {0.5, 0.5, 15.0}, {0.25, 0.25, 0.25}),
          {QoiKind::TimeNormalizedQuadraticIntegral, 0, {1.0, 1.0, 1.0}, 3.0},
          "Lorenz, chaotic regime, halved initial spread; v1"};
}

ModelPreset linear_benchmark() {
  StochasticOde ode("linear-benchmark", 1, 1, {AffineExpr{1.0, {0.1}}}, {{0, {0}, AffineExpr{-1.0, {}}}});
  return {"linear-benchmark", std::move(ode), {QoiKind::StateMoment, 0, {}, 1.0},
          "dx/dt = -x with Gaussian initial condition; analytic test system; v1"};
}

ModelPreset preset(std::string_view name) {
  if (name == "lorenz-stable") return lorenz_stable();
  if (name == "lorenz-chaotic") return lorenz_chaotic();
  if (name == "linear-benchmark") return linear_benchmark();
  throw std::invalid_argument("unknown model preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"lorenz-stable", "lorenz-chaotic", "linear-benchmark"}; }

}  // namespace cvpc
