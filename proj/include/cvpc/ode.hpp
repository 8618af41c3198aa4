#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cvpc {

/// c + sum_d slope_d * zeta_d, with zeta independent standard normals.
struct AffineExpr {
  double constant = 0.0;
  std::vector<double> slopes;  // empty means deterministic

  double evaluate(std::span<const double> zeta) const;
  bool is_deterministic() const;
};

/// coefficient(zeta) * prod_{s in states} x_s, added to dx_target/dt.
/// An empty state list is a forcing term.
struct PolynomialTerm {
  std::size_t target = 0;
  std::vector<std::size_t> states;
  AffineExpr coefficient;
};

/// dx/dt = sum of polynomial terms, x(0) affine in zeta.
///
/// The high-fidelity path accepts terms of any degree; Galerkin projection only
/// accepts degree <= 2, and bilinear terms must have deterministic coefficients.
class StochasticOde {
 public:
  StochasticOde(std::string name, std::size_t n_states, std::size_t n_zeta,
                std::vector<AffineExpr> initial, std::vector<PolynomialTerm> terms);

  const std::string& name() const noexcept { return name_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_zeta() const noexcept { return n_zeta_; }
  const std::vector<AffineExpr>& initial_conditions() const noexcept { return initial_; }
  const std::vector<PolynomialTerm>& terms() const noexcept { return terms_; }
  std::size_t max_term_degree() const noexcept;

  void initial_state(std::span<const double> zeta, std::span<double> x0) const;
  void rhs(std::span<const double> x, std::span<const double> zeta, std::span<double> dx) const;
  /// Floating-point operations of one rhs() call.
  std::size_t rhs_flops() const noexcept;

  /// Copy with every initial-condition slope multiplied by factor.
  StochasticOde with_scaled_uncertainty(double factor) const;

 private:
  std::string name_;
  std::size_t n_states_;
  std::size_t n_zeta_;
  std::vector<AffineExpr> initial_;
  std::vector<PolynomialTerm> terms_;
};

/// Uniform grid t_k = k * step, k = 0..steps.
struct TimeGrid {
  double step = 1e-3;
  std::size_t steps = 0;

  static TimeGrid over(double horizon, double step);
  double horizon() const noexcept { return step * static_cast<double>(steps); }
  double time(std::size_t k) const noexcept { return step * static_cast<double>(k); }
  /// Grid index of t; throws if t is not on the grid (tolerance 1e-12 relative to step).
  std::size_t index_of(double t) const;
};

/// Classical fourth-order Runge-Kutta with fixed step.
///
/// `f(x, dx)` evaluates the right-hand side; `observe(k, x)` is called at k = 0
/// and after each step and returns false to stop early.
template <class Rhs, class Observer>
void rk4_integrate(Rhs&& f, std::vector<double>& x, double step, std::size_t steps,
                   Observer&& observe) {
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  if (!observe(std::size_t{0}, std::as_const(x))) return;
  const double half = 0.5 * step;
  const double sixth = step / 6.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    f(std::span<const double>(x), std::span<double>(k1));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k1[i];
    f(std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k2[i];
    f(std::span<const double>(tmp), std::span<double>(k3));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + step * k3[i];
    f(std::span<const double>(tmp), std::span<double>(k4));
    for (std::size_t i = 0; i < n; ++i) x[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    if (!observe(s, std::as_const(x))) return;
  }
}

}  // namespace cvpc
