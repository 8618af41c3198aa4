#include "cvpc/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "cvpc/error.hpp"

namespace cvpc {

double PcExpansion::evaluate(std::span<const double> zeta) const {
  const auto phi = basis->evaluate(zeta);
  double value = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) value += coefficients[j] * phi[j];
  return value;
}

Moments extract_moments(const PcExpansion& expansion) {
  const auto& c = expansion.coefficients;
  Moments m;
  if (c.empty()) return m;
  m.mean = c[0];
  for (std::size_t i = 1; i < c.size(); ++i) m.variance += c[i] * c[i];
  return m;
}

double cvm(const PcExpansion& expansion) {
  return expansion.coefficients.empty() ? 0.0 : expansion.coefficients[0];
}

GalerkinSystem GalerkinSystem::project(const StochasticOde& ode, std::shared_ptr<const MultiIndexBasis> basis) {
  auto tensors = std::make_shared<const InnerProductTensors>(InnerProductTensors::build(*basis));
  return project(ode, std::move(basis), std::move(tensors));
}

GalerkinSystem GalerkinSystem::project(const StochasticOde& ode, std::shared_ptr<const MultiIndexBasis> basis,
                                       std::shared_ptr<const InnerProductTensors> tensors) {
  if (!basis || !tensors) throw std::invalid_argument("projection needs a basis and its tensors");
  if (basis->n_zeta() != ode.n_zeta()) {
    throw DimensionMismatch("model '" + ode.name() + "' has " + std::to_string(ode.n_zeta()) +
                            " uncertain inputs but the basis has " + std::to_string(basis->n_zeta()));
  }
  if (tensors->size() != basis->size()) throw DimensionMismatch("tensors were built for a different basis");

  GalerkinSystem sys;
  sys.n_states_ = ode.n_states();
  sys.m_ = basis->size();
  sys.forcing_.assign(sys.size(), 0.0);
  sys.initial_.assign(sys.size(), 0.0);

  std::vector<std::optional<std::size_t>> unit(basis->n_zeta());
  for (std::size_t d = 0; d < basis->n_zeta(); ++d) unit[d] = basis->linear_term(d);

  // An affine expression c + s . zeta has coefficients c on Phi_0 and s_d on Phi_{e_d}.
  // Slopes are dropped when the basis has no degree-one terms (p = 0).
  auto spread = [&](const AffineExpr& e, std::size_t k, std::vector<double>& out) {
    out[k * sys.m_] += e.constant;
    for (std::size_t d = 0; d < e.slopes.size(); ++d) {
      if (unit[d]) out[k * sys.m_ + *unit[d]] += e.slopes[d];
    }
  };

  for (std::size_t k = 0; k < ode.n_states(); ++k) spread(ode.initial_conditions()[k], k, sys.initial_);

  for (const auto& term : ode.terms()) {
    switch (term.states.size()) {
      case 0:
        spread(term.coefficient, term.target, sys.forcing_);
        break;
      case 1: {
        LinearOp op{term.target, term.states[0], term.coefficient.constant, {}};
        for (std::size_t d = 0; d < term.coefficient.slopes.size(); ++d) {
          if (term.coefficient.slopes[d] != 0.0) op.slopes.emplace_back(d, term.coefficient.slopes[d]);
        }
        sys.linear_.push_back(std::move(op));
        break;
      }
      case 2:
        if (!term.coefficient.is_deterministic()) {
          throw UnsupportedModel("model '" + ode.name() +
                                 "': bilinear terms with uncertain coefficients are not supported");
        }
        sys.bilinear_.push_back({term.target, term.states[0], term.states[1], term.coefficient.constant});
        break;
      default:
        throw UnsupportedModel("model '" + ode.name() + "' has a term of degree " +
                               std::to_string(term.states.size()) + "; projection supports degree <= 2");
    }
  }
  sys.basis_ = std::move(basis);
  sys.tensors_ = std::move(tensors);
  return sys;
}

void GalerkinSystem::rhs(std::span<const double> x, std::span<double> dx) const {
  std::copy(forcing_.begin(), forcing_.end(), dx.begin());
  const std::size_t m = m_;
  for (const auto& op : linear_) {
    const double* xs = x.data() + op.source * m;
    double* out = dx.data() + op.target * m;
    for (std::size_t i = 0; i < m; ++i) out[i] += op.constant * xs[i];
    for (const auto& [d, slope] : op.slopes) {
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (const auto& e : tensors_->linear_row(d, i)) acc += e.value * xs[e.j];
        out[i] += slope * acc;
      }
    }
  }
  for (const auto& op : bilinear_) {
    const double* xa = x.data() + op.a * m;
    const double* xb = x.data() + op.b * m;
    double* out = dx.data() + op.target * m;
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (const auto& e : tensors_->row(i)) acc += e.value * xa[e.j] * xb[e.l];
      out[i] += op.coefficient * acc;
    }
  }
}

std::size_t GalerkinSystem::rhs_flops() const noexcept {
  std::vector<std::size_t> linear_nnz(basis_->n_zeta(), 0);
  for (std::size_t d = 0; d < linear_nnz.size(); ++d) {
    for (std::size_t i = 0; i < m_; ++i) linear_nnz[d] += tensors_->linear_row(d, i).size();
  }
  std::size_t flops = 0;
  for (const auto& op : linear_) {
    flops += 2 * m_;
    for (const auto& slope : op.slopes) flops += 2 * linear_nnz[slope.first] + 2 * m_;
  }
  flops += bilinear_.size() * (3 * tensors_->contraction_nonzeros() + 2 * m_);
  return flops;
}

PcExpansion GalerkinSystem::expansion(std::span<const double> x, std::size_t state) const {
  const auto b = block(x, state);
  return {basis_, std::vector<double>(b.begin(), b.end())};
}

GalerkinTrajectory integrate(const GalerkinSystem& system, const TimeGrid& grid, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  GalerkinTrajectory out;
  std::vector<double> x = system.initial_state();
  auto f = [&](std::span<const double> s, std::span<double> ds) { system.rhs(s, ds); };
  rk4_integrate(f, x, grid.step, grid.steps, [&](std::size_t k, const std::vector<double>& s) {
    if (!std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); })) {
      out.diverged = true;
      return false;
    }
    out.last_finite_time = grid.time(k);
    if (k % stride == 0 || k == grid.steps) {
      out.times.push_back(grid.time(k));
      out.states.push_back(s);
    }
    return true;
  });
  return out;
}

}  // namespace cvpc
