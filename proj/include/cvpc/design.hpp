#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cvpc/basis.hpp"

namespace cvpc {

/// 1 - rho^2 as a function of degree: k1 exp(-k2 p).
struct CorrelationModel {
  double k1 = 1.0;
  double k2 = 1.0;

  double operator()(double p) const;
  double derivative(double p) const;
};

/// Stirling form of the total-order term count:
/// e^-n / n! * p^-(p+1/2) * (p+n)^(p+n+1/2), valid for p >= 1.
double stirling_terms(std::size_t n_zeta, double p);

/// Cost of the Galerkin solve in high-fidelity sample units.
///   tensor product: k3 (p+1)^(k4 n)
///   total order:    k3 stirling_terms(n, p)^k4
struct CostModel {
  ExpansionScheme scheme = ExpansionScheme::TotalOrder;
  double k3 = 1.0;
  double k4 = 1.0;
  std::size_t n_zeta = 1;

  double operator()(double p) const;
  double derivative(double p) const;
  /// Smallest degree the continuous model is valid for: 0 (tensor) or 1 (total order).
  double lower_bound() const noexcept { return scheme == ExpansionScheme::TensorProduct ? 0.0 : 1.0; }
  /// p with f_c(p) = cost, by bisection; requires cost >= f_c(lower_bound()).
  double inverse(double cost) const;
};

/// Degree-0 surrogate for the total-order comparison (the Stirling form is invalid at 0).
struct DegreeZero {
  double cost = 1.0;
  double rho_factor = 1.0;  // 1 - rho^2 of a constant surrogate
};

enum class Shape { NonMonotonic, Decreasing, Increasing };
const char* to_string(Shape shape);

struct ContinuousSolution {
  double p_tilde = 0.0;
  Shape shape = Shape::NonMonotonic;
  double lower = 0.0;  // domain [lower, upper]
  double upper = 0.0;  // f_c^-1(C0 - C)
};

/// Sign-equivalent derivative numerator of J(p) = f_rho / (C0 - f_c) for the
/// exponential correlation model: f_c'(p) + k2 f_c(p) - k2 C0.
double objective_slope(const CorrelationModel& corr, const CostModel& cost, double budget, double p);

/// Minimizer of the relaxed problem over [lower, f_c^-1(C0 - C)].
/// Throws InfeasibleBudget unless C0 > C + f_c(lower).
ContinuousSolution solve_continuous(const CorrelationModel& corr, const CostModel& cost, double budget,
                                    double unit_cost);

struct EstimatorDesign {
  unsigned p_star = 0;
  std::size_t n_star = 0;
  double budget = 0.0;
  double unit_cost = 1.0;
  CorrelationModel corr;
  CostModel cost;
  std::optional<DegreeZero> degree_zero;
  ContinuousSolution continuous;
  bool continuous_feasible = true;
  double gpc_cost = 0.0;            // f_c(p*) (or the degree-0 cost)
  double objective = 0.0;           // J_disc(p*)
  double variance_factor = 0.0;     // f_rho(p*) / N*
};

/// J_disc(p) = f_rho(p) / (C0 - f_c(p)); degree 0 under total order uses `degree_zero`.
double discrete_objective(const CorrelationModel& corr, const CostModel& cost, double budget, unsigned p,
                          const std::optional<DegreeZero>& degree_zero = std::nullopt);
/// Cost of degree p, using `degree_zero` for p = 0 under total order.
double degree_cost(const CostModel& cost, unsigned p, const std::optional<DegreeZero>& degree_zero = std::nullopt);

/// Largest integer p >= lower_bound with f_c(p) <= C0 - C, if any.
std::optional<unsigned> max_feasible_degree(const CostModel& cost, double budget, double unit_cost);

/// Integer design. Under total order, degree 0 is compared using `degree_zero`
/// (defaults to cost k3 and rho factor k1).
EstimatorDesign solve_discrete(const CorrelationModel& corr, const CostModel& cost, double budget,
                               double unit_cost, std::optional<DegreeZero> degree_zero = std::nullopt);

struct DesignPoint {
  double budget = 0.0;
  bool feasible = false;
  unsigned p_star = 0;
  std::size_t n_star = 0;
  double variance_factor = 0.0;
};

std::vector<DesignPoint> design_curve(const CorrelationModel& corr, const CostModel& cost,
                                      const std::vector<double>& budgets, double unit_cost,
                                      std::optional<DegreeZero> degree_zero = std::nullopt);

struct PilotDegree {
  unsigned p = 0;
  std::size_t terms = 0;
  double rho = 0.0;
  double cost = 0.0;
  double var_pc = 0.0;
  double cov_q_pc = 0.0;
  bool degenerate = false;
  bool diverged = false;
};

struct PilotStats {
  double unit_cost = 1.0;
  std::size_t n_pilot = 0;
  unsigned p_pilot = 0;
  std::size_t n_zeta = 0;
  double mean_q = 0.0;
  double var_q = 0.0;
  std::vector<PilotDegree> degrees;
};

struct FittedModels {
  CorrelationModel corr;
  CostModel cost;
  std::vector<std::string> flags;
};

/// Log-space least squares: log(1 - rho^2) = log k1 - k2 p over usable degrees p >= 1,
/// and log C_pc against n log(p+1) (tensor) or log stirling_terms (total order, p >= 1).
FittedModels fit_models(const PilotStats& stats, ExpansionScheme scheme);

}  // namespace cvpc
