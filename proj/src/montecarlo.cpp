#include "cvpc/montecarlo.hpp"

#include <stdexcept>
#include <string>

#include "cvpc/error.hpp"
#include "cvpc/rng.hpp"

namespace cvpc {

namespace {

// Flattened term list with coefficients realized for one sample.
struct RealizedSystem {
  std::size_t n_states = 0;
  std::vector<std::size_t> target;
  std::vector<std::size_t> offsets;  // into states
  std::vector<std::size_t> states;
  std::vector<double> coefficient;

  explicit RealizedSystem(const StochasticOde& ode) : n_states(ode.n_states()) {
    offsets.push_back(0);
    for (const auto& t : ode.terms()) {
      target.push_back(t.target);
      states.insert(states.end(), t.states.begin(), t.states.end());
      offsets.push_back(states.size());
    }
    coefficient.resize(target.size());
  }

  void realize(const StochasticOde& ode, std::span<const double> zeta) {
    const auto& terms = ode.terms();
    for (std::size_t t = 0; t < terms.size(); ++t) coefficient[t] = terms[t].coefficient.evaluate(zeta);
  }

  void rhs(std::span<const double> x, std::span<double> dx) const {
    for (std::size_t k = 0; k < n_states; ++k) dx[k] = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
      double v = coefficient[t];
      for (std::size_t s = offsets[t]; s < offsets[t + 1]; ++s) v *= x[states[s]];
      dx[target[t]] += v;
    }
  }
};

template <class Rhs>
void run_sample(const QoiModel& model, std::span<const double> zeta, const TimeGrid& grid,
                std::span<const std::size_t> report, Rhs&& f, SampleMatrix& out, std::size_t i) {
  const auto& ode = model.system();
  std::vector<double> x(ode.n_states());
  ode.initial_state(zeta, x);
  std::size_t next = 0;
  rk4_integrate(f, x, grid.step, grid.steps, [&](std::size_t k, const std::vector<double>& s) {
    if (next < report.size() && report[next] == k) {
      out.at(i, next) = model.value(s, grid.time(k));
      ++next;
    }
    return next < report.size();
  });
}

}  // namespace

SampleBatch SampleBatch::draw(std::uint64_t seed, std::size_t n, std::size_t n_zeta, std::uint64_t stream,
                              std::size_t first) {
  if (n == 0) throw std::invalid_argument("sample batch needs at least one sample");
  SampleBatch b{seed, stream, first, n, n_zeta, std::vector<double>(n * n_zeta)};
  const std::uint64_t base = static_cast<std::uint64_t>(first) * n_zeta;
  for (std::size_t c = 0; c < b.values.size(); ++c) b.values[c] = standard_normal(seed, stream, base + c);
  return b;
}

std::uint64_t SampleBatch::fingerprint() const noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ static_cast<std::uint64_t>(first));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  return splitmix64(h ^ static_cast<std::uint64_t>(n_zeta));
}

EstimatorResult summarize(std::vector<double> values, double cost, std::uint64_t fingerprint) {
  EstimatorResult r;
  const auto n = values.size();
  if (n == 0) throw std::invalid_argument("cannot summarize an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.variance = ss / static_cast<double>(n - 1);
  }
  r.values = std::move(values);
  r.cost = cost;
  r.fingerprint = fingerprint;
  return r;
}

std::vector<std::size_t> report_indices(const TimeGrid& grid, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k <= grid.steps; k += stride) idx.push_back(k);
  if (idx.back() != grid.steps) idx.push_back(grid.steps);
  return idx;
}

SampleMatrix sample_qoi(const QoiModel& model, const SampleBatch& batch, const TimeGrid& grid,
                        std::size_t stride, Execution exec) {
  const auto& ode = model.system();
  if (batch.n_zeta != ode.n_zeta()) {
    throw DimensionMismatch("batch has " + std::to_string(batch.n_zeta) + " inputs, model expects " +
                            std::to_string(ode.n_zeta()));
  }
  const auto report = report_indices(grid, stride);
  SampleMatrix out(batch.n, report.size());
  const auto n = static_cast<std::ptrdiff_t>(batch.n);

  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto zeta = batch.row(static_cast<std::size_t>(i));
      auto f = [&](std::span<const double> x, std::span<double> dx) { ode.rhs(x, zeta, dx); };
      run_sample(model, zeta, grid, report, f, out, static_cast<std::size_t>(i));
    }
    return out;
  }

  const RealizedSystem prototype(ode);
#pragma omp parallel
  {
    RealizedSystem sys = prototype;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto zeta = batch.row(static_cast<std::size_t>(i));
      sys.realize(ode, zeta);
      auto f = [&](std::span<const double> x, std::span<double> dx) { sys.rhs(x, dx); };
      run_sample(model, zeta, grid, report, f, out, static_cast<std::size_t>(i));
    }
  }
  return out;
}

SampleMatrix sample_surrogate(std::span<const PcExpansion> expansions, const SampleBatch& batch,
                              Execution exec) {
  SampleMatrix out(batch.n, expansions.size());
  if (expansions.empty()) return out;
  const auto& basis = *expansions.front().basis;
  if (basis.n_zeta() != batch.n_zeta) throw DimensionMismatch("surrogate and batch dimensions differ");
  for (const auto& e : expansions) {
    if (e.coefficients.size() != basis.size()) throw DimensionMismatch("expansion length does not match basis");
  }
  const auto n = static_cast<std::ptrdiff_t>(batch.n);
  auto body = [&](std::ptrdiff_t i, std::vector<double>& phi) {
    basis.evaluate(batch.row(static_cast<std::size_t>(i)), phi);
    for (std::size_t j = 0; j < expansions.size(); ++j) {
      const auto& c = expansions[j].coefficients;
      double v = 0.0;
      for (std::size_t m = 0; m < phi.size(); ++m) v += c[m] * phi[m];
      out.at(static_cast<std::size_t>(i), j) = v;
    }
  };
  if (exec == Execution::Serial) {
    std::vector<double> phi(basis.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i, phi);
    return out;
  }
#pragma omp parallel
  {
    std::vector<double> phi(basis.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i, phi);
  }
  return out;
}

EstimatorResult mc_estimate(const QoiModel& model, const SampleBatch& batch, double t, double step,
                            Execution exec) {
  std::vector<double> values;
  if (t == 0.0) {
    values.resize(batch.n);
    std::vector<double> x(model.system().n_states());
    for (std::size_t i = 0; i < batch.n; ++i) {
      model.system().initial_state(batch.row(i), x);
      values[i] = model.value(x, 0.0);
    }
  } else {
    const auto grid = TimeGrid::over(t, step);
    const auto m = sample_qoi(model, batch, grid, grid.steps, exec);
    const auto col = m.column(m.cols - 1);
    values.assign(col.begin(), col.end());
  }
  return summarize(std::move(values), static_cast<double>(batch.n), batch.fingerprint());
}

EstimatorResult cme_estimate(const PcExpansion& expansion, const SampleBatch& batch) {
  const auto m = sample_surrogate(std::span<const PcExpansion>(&expansion, 1), batch);
  const auto col = m.column(0);
  return summarize(std::vector<double>(col.begin(), col.end()), 0.0, batch.fingerprint());
}

}  // namespace cvpc
