#include "cvpc/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "cvpc/cv.hpp"
#include "cvpc/galerkin.hpp"
#include "cvpc/montecarlo.hpp"

namespace cvpc {

double galerkin_cost(const GalerkinSystem& system, const StochasticOde& hf, std::optional<double> rhs_weight) {
  if (rhs_weight) return *rhs_weight * static_cast<double>(system.terms());
  return static_cast<double>(system.rhs_flops()) / static_cast<double>(std::max<std::size_t>(hf.rhs_flops(), 1));
}

double galerkin_cost(const QoiModel& model, unsigned p, ExpansionScheme scheme, std::optional<double> rhs_weight) {
  auto basis = std::make_shared<const MultiIndexBasis>(MultiIndexBasis::build(model.system().n_zeta(), p, scheme));
  return galerkin_cost(GalerkinSystem::project(model.system(), basis), model.system(), rhs_weight);
}

PilotStats run_pilot(const QoiModel& model, const PilotSettings& settings) {
  if (settings.n_pilot < 2) throw std::invalid_argument("pilot needs at least two samples");
  if (settings.p_pilot < 1) throw std::invalid_argument("pilot needs degree at least 1");

  const auto& ode = model.system();
  const auto batch = SampleBatch::draw(settings.seed, settings.n_pilot, ode.n_zeta(), kPilotStream);
  const auto grid = TimeGrid::over(settings.time, settings.step);
  const auto hf = sample_qoi(model, batch, grid, grid.steps);
  const auto q = hf.column(hf.cols - 1);

  PilotStats stats;
  stats.unit_cost = 1.0;
  stats.n_pilot = settings.n_pilot;
  stats.p_pilot = settings.p_pilot;
  stats.n_zeta = ode.n_zeta();
  const auto summary = summarize(std::vector<double>(q.begin(), q.end()), 0.0, 0);
  stats.mean_q = summary.mean;
  stats.var_q = summary.variance.value_or(0.0);

  for (unsigned p = 0; p <= settings.p_pilot; ++p) {
    auto basis = std::make_shared<const MultiIndexBasis>(MultiIndexBasis::build(ode.n_zeta(), p, settings.scheme));
    const auto system = GalerkinSystem::project(ode, basis);
    const auto traj = integrate(system, grid, grid.steps);

    PilotDegree d;
    d.p = p;
    d.terms = basis->size();
    d.cost = galerkin_cost(system, ode, settings.rhs_weight);
    if (traj.diverged || traj.times.empty() || traj.times.back() != grid.horizon()) {
      d.diverged = true;
      stats.degrees.push_back(d);
      continue;
    }
    const auto e = model.expansion(system, traj.states.back(), grid.horizon());
    const auto pc = cme_estimate(e, batch);
    d.var_pc = pc.variance.value_or(0.0);
    d.cov_q_pc = sample_covariance(q, pc.values);
    bool clamped = false;
    d.rho = pearson(q, pc.values, &clamped);
    const bool constant = std::all_of(pc.values.begin(), pc.values.end(),
                                      [&](double v) { return v == pc.values.front(); });
    d.degenerate = constant || !(d.var_pc > 0.0) || !std::isfinite(d.rho);
    if (d.degenerate) d.rho = 0.0;
    stats.degrees.push_back(d);
  }
  return stats;
}

}  // namespace cvpc
