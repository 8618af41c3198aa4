#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "cvpc/galerkin.hpp"
#include "cvpc/models.hpp"
#include "cvpc/montecarlo.hpp"

using namespace cvpc;

namespace {

std::vector<double> run(const StochasticOde& ode, std::vector<double> x, double horizon, double step,
                        const std::function<void(double, const std::vector<double>&)>& observe = {}) {
  const std::vector<double> zeta(ode.n_zeta(), 0.0);
  auto f = [&](std::span<const double> s, std::span<double> ds) { ode.rhs(s, zeta, ds); };
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  rk4_integrate(f, x, step, steps, [&](std::size_t k, const std::vector<double>& s) {
    if (observe) observe(step * static_cast<double>(k), s);
    return true;
  });
  return x;
}

}  // namespace

TEST_CASE("stable Lorenz equilibria") {
  const auto ode = lorenz_stable().ode;
  const std::vector<double> zeta(3, 0.0);
  std::vector<double> dx(3);
  // theta2 = 10, theta3 = 1: x = y, x^2 = theta3 (theta2 - 1) = 9.
  for (double s : {3.0, -3.0}) {
    const std::vector<double> x{s, s, 9.0};
    ode.rhs(x, zeta, dx);
    for (double v : dx) CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("stable Lorenz mean initial condition converges to (3, 3, 9)") {
  const auto ode = lorenz_stable().ode;
  const auto x = run(ode, {0.5, 0.5, 15.0}, 20.0, 1e-3);
  CHECK(x[0] == doctest::Approx(3.0).epsilon(0.02));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(0.02));
  CHECK(x[2] == doctest::Approx(9.0).epsilon(0.02));
}

TEST_CASE("chaotic Lorenz: sensitivity, boundedness, unstable origin") {
  const auto ode = lorenz_chaotic().ode;
  // A 1e-6 offset grows at roughly the leading Lyapunov rate (about 0.9) and
  // reaches O(1) near t = 13, so sensitivity is checked over 15 time units.
  double separation = 0.0, separation_by_10 = 0.0;
  std::vector<std::vector<double>> a, b;
  std::vector<double> times;
  run(ode, {0.5, 0.5, 15.0}, 15.0, 1e-3, [&](double t, const std::vector<double>& s) {
    a.push_back(s);
    times.push_back(t);
  });
  run(ode, {0.5 + 1e-6, 0.5, 15.0}, 15.0, 1e-3, [&](double, const std::vector<double>& s) { b.push_back(s); });
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double gap = std::hypot(a[k][0] - b[k][0], a[k][1] - b[k][1], a[k][2] - b[k][2]);
    separation = std::max(separation, gap);
    if (times[k] > 10.0) continue;
    separation_by_10 = std::max(separation_by_10, gap);
    CHECK(std::abs(a[k][0]) < 30.0);
    CHECK(std::abs(a[k][1]) < 30.0);
    CHECK(a[k][2] > 0.0);
    CHECK(a[k][2] < 60.0);
  }
  // Growth by four orders of magnitude within 10 time units.
  CHECK(separation_by_10 > 1e-2);
  CHECK(separation > 1.0);

  // Finite-difference Jacobian at the origin; a negative determinant of the
  // (x, y) block means one real positive eigenvalue.
  const std::vector<double> zeta(3, 0.0);
  const double h = 1e-7;
  double jac[3][3];
  for (int c = 0; c < 3; ++c) {
    std::vector<double> xp(3, 0.0), dx(3);
    xp[c] = h;
    ode.rhs(xp, zeta, dx);
    for (int r = 0; r < 3; ++r) jac[r][c] = dx[r] / h;
  }
  CHECK(jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0] < 0.0);
}

TEST_CASE("zero uncertainty gives zero output variance") {
  const auto p = lorenz_stable();
  const QoiModel model(p.ode.with_scaled_uncertainty(0.0), p.qoi);
  const auto grid = TimeGrid::over(1.0, 1e-3);
  const auto batch = SampleBatch::draw(3, 16, 3);
  const auto m = sample_qoi(model, batch, grid, grid.steps);
  const auto q = m.column(1);
  for (double v : q) CHECK(v == q[0]);

  // The degree-0 Galerkin run reproduces the deterministic path.
  auto basis = std::make_shared<const MultiIndexBasis>(MultiIndexBasis::build(3, 2, ExpansionScheme::TotalOrder));
  const auto sys = GalerkinSystem::project(model.system(), basis);
  const auto traj = integrate(sys, grid, grid.steps);
  const auto e = model.expansion(sys, traj.states.back(), 1.0);
  CHECK(std::abs(extract_moments(e).mean - q[0]) <= 1e-8 * std::abs(q[0]));
  CHECK(extract_moments(e).variance <= 1e-16);
}

TEST_CASE("linear benchmark analytic moments by sampling") {
  const auto p = linear_benchmark();
  const QoiModel model(p.ode, p.qoi);
  const auto batch = SampleBatch::draw(5, 200000, 1);
  const auto r = mc_estimate(model, batch, 1.0, 1e-2);
  const double se = std::sqrt(*r.variance / 200000.0);
  CHECK(std::abs(r.mean - std::exp(-1.0)) <= 4.0 * se);
  CHECK(*r.variance == doctest::Approx(0.01 * std::exp(-2.0)).epsilon(0.02));
}

TEST_CASE("quadratic integral quantity") {
  // x constant at c: Q(t) = c^2 for every t.
  const StochasticOde still{"still", 1, 1, {{1.7, {}}}, {}};
  const QoiModel constant(still, {QoiKind::TimeNormalizedQuadraticIntegral, 0, {1.0}, 2.0});
  const auto grid = TimeGrid::over(2.0, 1e-2);
  const auto batch = SampleBatch::draw(1, 2, 1);
  const auto m = sample_qoi(constant, batch, grid, 50);
  for (std::size_t j = 0; j < m.cols; ++j) CHECK(m.at(0, j) == doctest::Approx(1.7 * 1.7).epsilon(1e-12));

  // dx/dt = -x from x = 1: Q(t) = (1 - e^-2t) / (2t).
  const StochasticOde decay{"decay", 1, 1, {{1.0, {}}}, {{0, {0}, {-1.0, {}}}}};
  const QoiModel integral(decay, {QoiKind::TimeNormalizedQuadraticIntegral, 0, {1.0}, 1.0});
  const auto g2 = TimeGrid::over(3.0, 1e-3);
  const auto m2 = sample_qoi(integral, batch, g2, 500);
  const auto idx = report_indices(g2, 500);
  CHECK(m2.at(0, 0) == doctest::Approx(1.0));
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const double t = g2.time(idx[j]);
    CHECK(m2.at(0, j) == doctest::Approx((1.0 - std::exp(-2.0 * t)) / (2.0 * t)).epsilon(1e-10));
  }
}

TEST_CASE("accumulated integral agrees with Simpson quadrature of the integrand") {
  const auto p = lorenz_stable();
  const QoiModel model(p.ode, p.qoi);
  const auto& sys = model.system();
  const std::vector<double> zeta{0.3, -1.1, 0.7};
  std::vector<double> x(sys.n_states());
  sys.initial_state(zeta, x);
  const double step = 1e-3;
  std::vector<double> integrand;
  auto f = [&](std::span<const double> s, std::span<double> ds) { sys.rhs(s, zeta, ds); };
  rk4_integrate(f, x, step, 3000, [&](std::size_t, const std::vector<double>& s) {
    integrand.push_back(model.integrand(s));
    return true;
  });
  double simpson = integrand.front() + integrand.back();
  for (std::size_t k = 1; k + 1 < integrand.size(); ++k) simpson += (k % 2 ? 4.0 : 2.0) * integrand[k];
  simpson *= step / 3.0;
  CHECK(model.value(x, 3.0) == doctest::Approx(simpson / 3.0).epsilon(1e-9));
}

TEST_CASE("step halving leaves the quantity unchanged") {
  const auto p = lorenz_stable();
  const QoiModel model(p.ode, p.qoi);
  const auto batch = SampleBatch::draw(9, 4, 3);
  const auto a = mc_estimate(model, batch, 3.0, 1e-3, Execution::Serial);
  const auto b = mc_estimate(model, batch, 3.0, 5e-4, Execution::Serial);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-8));
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) CHECK(preset(name).name == name);
  CHECK_THROWS(preset("nope"));
  CHECK(lorenz_stable().qoi.time == 3.0);
  CHECK(lorenz_chaotic().ode.n_zeta() == 3);
}
