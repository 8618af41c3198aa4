#include "cvpc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvpc/error.hpp"

namespace cvpc {

double AffineExpr::evaluate(std::span<const double> zeta) const {
  double value = constant;
  for (std::size_t d = 0; d < slopes.size(); ++d) value += slopes[d] * zeta[d];
  return value;
}

bool AffineExpr::is_deterministic() const {
  return std::all_of(slopes.begin(), slopes.end(), [](double s) { return s == 0.0; });
}

StochasticOde::StochasticOde(std::string name, std::size_t n_states, std::size_t n_zeta,
                             std::vector<AffineExpr> initial, std::vector<PolynomialTerm> terms)
    : name_(std::move(name)),
      n_states_(n_states),
      n_zeta_(n_zeta),
      initial_(std::move(initial)),
      terms_(std::move(terms)) {
  if (n_states_ == 0) throw std::invalid_argument("model needs at least one state");
  if (initial_.size() != n_states_) {
    throw DimensionMismatch("model '" + name_ + "' has " + std::to_string(n_states_) +
                            " states but " + std::to_string(initial_.size()) + " initial conditions");
  }
  auto check_expr = [&](const AffineExpr& e) {
    if (e.slopes.size() > n_zeta_) {
      throw DimensionMismatch("expression in model '" + name_ + "' references " +
                              std::to_string(e.slopes.size()) + " uncertain dimensions, model has " +
                              std::to_string(n_zeta_));
    }
  };
  for (const auto& ic : initial_) check_expr(ic);
  for (const auto& term : terms_) {
    if (term.target >= n_states_) throw DimensionMismatch("term target out of range");
    for (auto s : term.states) {
      if (s >= n_states_) throw DimensionMismatch("term state out of range");
    }
    check_expr(term.coefficient);
  }
}

std::size_t StochasticOde::max_term_degree() const noexcept {
  std::size_t degree = 0;
  for (const auto& term : terms_) degree = std::max(degree, term.states.size());
  return degree;
}

void StochasticOde::initial_state(std::span<const double> zeta, std::span<double> x0) const {
  for (std::size_t k = 0; k < n_states_; ++k) x0[k] = initial_[k].evaluate(zeta);
}

void StochasticOde::rhs(std::span<const double> x, std::span<const double> zeta,
                        std::span<double> dx) const {
  std::fill(dx.begin(), dx.end(), 0.0);
  for (const auto& term : terms_) {
    double value = term.coefficient.evaluate(zeta);
    for (auto s : term.states) value *= x[s];
    dx[term.target] += value;
  }
}

std::size_t StochasticOde::rhs_flops() const noexcept {
  std::size_t flops = 0;
  for (const auto& term : terms_) {
    const auto random = std::count_if(term.coefficient.slopes.begin(), term.coefficient.slopes.end(),
                                      [](double s) { return s != 0.0; });
    flops += 2 * static_cast<std::size_t>(random) + term.states.size() + 1;
  }
  return flops;
}

StochasticOde StochasticOde::with_scaled_uncertainty(double factor) const {
  auto initial = initial_;
  for (auto& ic : initial) {
    for (auto& s : ic.slopes) s *= factor;
  }
  return {name_, n_states_, n_zeta_, std::move(initial), terms_};
}

TimeGrid TimeGrid::over(double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("time horizon and step must be positive");
  }
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (std::abs(rounded * step - horizon) > 1e-12 * std::max(1.0, horizon)) {
    throw std::invalid_argument("step does not divide the time horizon");
  }
  return {step, static_cast<std::size_t>(rounded)};
}

std::size_t TimeGrid::index_of(double t) const {
  const double ratio = t / step;
  const double rounded = std::round(ratio);
  if (rounded < 0.0 || std::abs(rounded - ratio) > 1e-9 || static_cast<std::size_t>(rounded) > steps) {
    throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace cvpc
