#include "cvpc/design.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvpc/error.hpp"

namespace cvpc {

namespace {

constexpr double kRhoFloor = 1e-12;
constexpr double kMinPositive = 1e-6;

struct LineFit {
  double intercept;
  double slope;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("regression needs at least two distinct abscissae");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace

double CorrelationModel::operator()(double p) const { return k1 * std::exp(-k2 * p); }
double CorrelationModel::derivative(double p) const { return -k2 * k1 * std::exp(-k2 * p); }

double stirling_terms(std::size_t n_zeta, double p) {
  const double n = static_cast<double>(n_zeta);
  const double log_s = -n - std::lgamma(n + 1.0) - (p + 0.5) * std::log(p) + (p + n + 0.5) * std::log(p + n);
  return std::exp(log_s);
}

double CostModel::operator()(double p) const {
  const double n = static_cast<double>(n_zeta);
  if (scheme == ExpansionScheme::TensorProduct) return k3 * std::pow(p + 1.0, k4 * n);
  return k3 * std::pow(stirling_terms(n_zeta, p), k4);
}

double CostModel::derivative(double p) const {
  const double n = static_cast<double>(n_zeta);
  if (scheme == ExpansionScheme::TensorProduct) return (*this)(p) * k4 * n / (p + 1.0);
  return (*this)(p) * k4 * (std::log((p + n) / p) - n / (2.0 * p * (p + n)));
}

double CostModel::inverse(double cost) const {
  double lo = lower_bound();
  if (cost < (*this)(lo)) throw std::invalid_argument("cost below the model's lower bound");
  double hi = std::max(1.0, 2.0 * lo);
  while ((*this)(hi) < cost) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::overflow_error("cost model inverse did not bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) <= cost) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

const char* to_string(Shape shape) {
  switch (shape) {
    case Shape::NonMonotonic:
      return "non-monotonic";
    case Shape::Decreasing:
      return "decreasing";
    case Shape::Increasing:
      return "increasing";
  }
  return "unknown";
}

double objective_slope(const CorrelationModel& corr, const CostModel& cost, double budget, double p) {
  return cost.derivative(p) + corr.k2 * cost(p) - corr.k2 * budget;
}

ContinuousSolution solve_continuous(const CorrelationModel& corr, const CostModel& cost, double budget,
                                    double unit_cost) {
  ContinuousSolution s;
  s.lower = cost.lower_bound();
  if (!(budget > unit_cost + cost(s.lower))) {
    throw InfeasibleBudget("budget " + std::to_string(budget) + " does not cover one sample (" +
                           std::to_string(unit_cost) + ") plus the cheapest expansion (" +
                           std::to_string(cost(s.lower)) + ")");
  }
  s.upper = cost.inverse(budget - unit_cost);
  const double g_lo = objective_slope(corr, cost, budget, s.lower);
  const double g_hi = objective_slope(corr, cost, budget, s.upper);
  if (g_lo >= 0.0) {
    s.shape = Shape::Increasing;
    s.p_tilde = s.lower;
    return s;
  }
  if (g_hi <= 0.0) {
    s.shape = Shape::Decreasing;
    s.p_tilde = s.upper;
    return s;
  }
  s.shape = Shape::NonMonotonic;
  double a = s.lower, b = s.upper;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (a + b);
    const double g = objective_slope(corr, cost, budget, mid);
    if (g < 0.0) {
      a = mid;
    } else {
      b = mid;
    }
    if (b - a <= 1e-8 && std::abs(g) <= 1e-10 * budget) break;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b)) break;
  }
  s.p_tilde = 0.5 * (a + b);
  return s;
}

double degree_cost(const CostModel& cost, unsigned p, const std::optional<DegreeZero>& degree_zero) {
  if (p == 0 && cost.scheme == ExpansionScheme::TotalOrder) {
    return degree_zero ? degree_zero->cost : cost.k3;
  }
  return cost(static_cast<double>(p));
}

double discrete_objective(const CorrelationModel& corr, const CostModel& cost, double budget, unsigned p,
                          const std::optional<DegreeZero>& degree_zero) {
  double rho_factor = corr(static_cast<double>(p));
  if (p == 0 && cost.scheme == ExpansionScheme::TotalOrder) rho_factor = degree_zero ? degree_zero->rho_factor : corr.k1;
  return rho_factor / (budget - degree_cost(cost, p, degree_zero));
}

std::optional<unsigned> max_feasible_degree(const CostModel& cost, double budget, double unit_cost) {
  const double lo = cost.lower_bound();
  const double room = budget - unit_cost;
  if (!(cost(lo) <= room)) return std::nullopt;
  double guess = std::floor(cost.inverse(room));
  auto p = static_cast<unsigned>(std::max(lo, guess));
  while (cost(static_cast<double>(p) + 1.0) <= room) ++p;
  while (p > lo && cost(static_cast<double>(p)) > room) --p;
  return p;
}

EstimatorDesign solve_discrete(const CorrelationModel& corr, const CostModel& cost, double budget,
                               double unit_cost, std::optional<DegreeZero> degree_zero) {
  if (!(unit_cost > 0.0)) throw std::invalid_argument("unit cost must be positive");
  const bool total = cost.scheme == ExpansionScheme::TotalOrder;
  if (total && !degree_zero) degree_zero = DegreeZero{cost.k3, corr.k1};

  EstimatorDesign d;
  d.budget = budget;
  d.unit_cost = unit_cost;
  d.corr = corr;
  d.cost = cost;
  d.degree_zero = degree_zero;

  std::optional<unsigned> chosen;
  try {
    d.continuous = solve_continuous(corr, cost, budget, unit_cost);
    const auto p_lo = static_cast<unsigned>(cost.lower_bound());
    const unsigned p_hi = *max_feasible_degree(cost, budget, unit_cost);
    switch (d.continuous.shape) {
      case Shape::Increasing:
        chosen = p_lo;
        break;
      case Shape::Decreasing:
        chosen = p_hi;
        break;
      case Shape::NonMonotonic: {
        const auto fl = static_cast<unsigned>(std::floor(d.continuous.p_tilde));
        const auto ce = static_cast<unsigned>(std::ceil(d.continuous.p_tilde));
        if (ce > p_hi) {
          chosen = p_hi;
        } else {
          const double j_fl = discrete_objective(corr, cost, budget, std::max(fl, p_lo), degree_zero);
          const double j_ce = discrete_objective(corr, cost, budget, ce, degree_zero);
          chosen = j_ce < j_fl ? ce : std::max(fl, p_lo);
        }
        break;
      }
    }
  } catch (const InfeasibleBudget&) {
    d.continuous_feasible = false;
    if (!total) throw;
  }

  if (total && budget - unit_cost >= degree_zero->cost) {
    if (!chosen || discrete_objective(corr, cost, budget, 0, degree_zero) <
                       discrete_objective(corr, cost, budget, *chosen, degree_zero)) {
      chosen = 0U;
    }
  }
  if (!chosen) {
    throw InfeasibleBudget("budget " + std::to_string(budget) +
                           " does not cover one sample plus the cheapest expansion");
  }

  d.p_star = *chosen;
  d.gpc_cost = degree_cost(cost, d.p_star, degree_zero);
  auto n = static_cast<std::size_t>(std::floor((budget - d.gpc_cost) / unit_cost));
  while (static_cast<double>(n + 1) * unit_cost + d.gpc_cost <= budget) ++n;
  while (n > 0 && static_cast<double>(n) * unit_cost + d.gpc_cost > budget) --n;
  d.n_star = n;
  d.objective = discrete_objective(corr, cost, budget, d.p_star, degree_zero);
  const double rho_factor = d.p_star == 0 && total ? degree_zero->rho_factor : corr(d.p_star);
  d.variance_factor = rho_factor / static_cast<double>(d.n_star);
  return d;
}

std::vector<DesignPoint> design_curve(const CorrelationModel& corr, const CostModel& cost,
                                      const std::vector<double>& budgets, double unit_cost,
                                      std::optional<DegreeZero> degree_zero) {
  std::vector<DesignPoint> out;
  out.reserve(budgets.size());
  for (double b : budgets) {
    DesignPoint pt;
    pt.budget = b;
    try {
      const auto d = solve_discrete(corr, cost, b, unit_cost, degree_zero);
      pt.feasible = true;
      pt.p_star = d.p_star;
      pt.n_star = d.n_star;
      pt.variance_factor = d.variance_factor;
    } catch (const InfeasibleBudget&) {
      pt.feasible = false;
    }
    out.push_back(pt);
  }
  return out;
}

FittedModels fit_models(const PilotStats& stats, ExpansionScheme scheme) {
  FittedModels fit;
  std::vector<double> xr, yr;
  for (const auto& d : stats.degrees) {
    if (d.p < 1 || d.degenerate || d.diverged) continue;
    double r = 1.0 - d.rho * d.rho;
    if (r < kRhoFloor) {
      r = kRhoFloor;
      fit.flags.push_back("rho at degree " + std::to_string(d.p) + " floored at 1 - rho^2 = 1e-12");
    }
    xr.push_back(d.p);
    yr.push_back(std::log(r));
  }
  if (xr.size() < 2) throw std::invalid_argument("correlation fit needs at least two usable pilot degrees");
  const auto lr = least_squares(xr, yr);
  fit.corr.k1 = std::exp(lr.intercept);
  fit.corr.k2 = -lr.slope;
  if (!(fit.corr.k2 > 0.0)) {
    fit.flags.push_back("fitted k2 = " + std::to_string(fit.corr.k2) + " not positive; clamped to 1e-6");
    fit.corr.k2 = kMinPositive;
  }

  std::vector<double> xc, yc;
  for (const auto& d : stats.degrees) {
    if (!(d.cost > 0.0)) continue;
    if (scheme == ExpansionScheme::TensorProduct) {
      xc.push_back(static_cast<double>(stats.n_zeta) * std::log(d.p + 1.0));
    } else {
      if (d.p < 1) continue;
      xc.push_back(std::log(stirling_terms(stats.n_zeta, d.p)));
    }
    yc.push_back(std::log(d.cost));
  }
  if (xc.size() < 2) throw std::invalid_argument("cost fit needs at least two pilot degrees");
  const auto lc = least_squares(xc, yc);
  fit.cost.scheme = scheme;
  fit.cost.n_zeta = stats.n_zeta;
  fit.cost.k3 = std::exp(lc.intercept);
  fit.cost.k4 = lc.slope;
  if (!(fit.cost.k4 > 0.0)) {
    fit.flags.push_back("fitted k4 = " + std::to_string(fit.cost.k4) + " not positive; clamped to 1e-6");
    fit.cost.k4 = kMinPositive;
  }
  return fit;
}

}  // namespace cvpc
