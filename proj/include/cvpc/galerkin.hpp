#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cvpc/basis.hpp"
#include "cvpc/ode.hpp"

namespace cvpc {

/// Coefficients of one scalar quantity in an orthonormal basis.
struct PcExpansion {
  std::shared_ptr<const MultiIndexBasis> basis;
  std::vector<double> coefficients;

  /// Surrogate value sum_j c_j Phi_j(zeta).
  double evaluate(std::span<const double> zeta) const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean is coefficient 0, variance is the sum of squares of the rest.
Moments extract_moments(const PcExpansion& expansion);
/// Control-variate mean: the analytic surrogate mean.
double cvm(const PcExpansion& expansion);

/// Deterministic ODE system for the expansion coefficients of every state.
///
/// State layout is block-per-state: entry k * M + i is coefficient i of state k.
class GalerkinSystem {
 public:
  static GalerkinSystem project(const StochasticOde& ode, std::shared_ptr<const MultiIndexBasis> basis,
                                std::shared_ptr<const InnerProductTensors> tensors);
  /// Convenience overload building the tensors itself.
  static GalerkinSystem project(const StochasticOde& ode, std::shared_ptr<const MultiIndexBasis> basis);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t terms() const noexcept { return m_; }
  std::size_t size() const noexcept { return n_states_ * m_; }
  const std::shared_ptr<const MultiIndexBasis>& basis() const noexcept { return basis_; }
  const std::shared_ptr<const InnerProductTensors>& tensors() const noexcept { return tensors_; }

  const std::vector<double>& initial_state() const noexcept { return initial_; }
  void rhs(std::span<const double> x, std::span<double> dx) const;
  /// Floating-point operations of one rhs() call.
  std::size_t rhs_flops() const noexcept;

  std::span<const double> block(std::span<const double> x, std::size_t state) const {
    return x.subspan(state * m_, m_);
  }
  PcExpansion expansion(std::span<const double> x, std::size_t state) const;

 private:
  struct LinearOp {
    std::size_t target;
    std::size_t source;
    double constant;
    std::vector<std::pair<std::size_t, double>> slopes;  // (dimension, slope), zero slopes dropped
  };
  struct BilinearOp {
    std::size_t target;
    std::size_t a;
    std::size_t b;
    double coefficient;
  };

  std::shared_ptr<const MultiIndexBasis> basis_;
  std::shared_ptr<const InnerProductTensors> tensors_;
  std::size_t n_states_ = 0;
  std::size_t m_ = 0;
  std::vector<double> forcing_;  // projected constant terms, same layout as the state
  std::vector<LinearOp> linear_;
  std::vector<BilinearOp> bilinear_;
  std::vector<double> initial_;
};

/// Coefficient states sampled every `stride` grid steps (plus the final step).
struct GalerkinTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  bool diverged = false;
  /// Last grid time at which every coefficient was finite.
  double last_finite_time = 0.0;
};

/// Fixed-step RK4 from t = 0 to grid.horizon(). A non-finite coefficient stops
/// the run and sets `diverged`; the recorded prefix is kept.
GalerkinTrajectory integrate(const GalerkinSystem& system, const TimeGrid& grid, std::size_t stride = 1);

}  // namespace cvpc
