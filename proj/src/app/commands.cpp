#include "cvpc/app/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "cvpc/cv.hpp"
#include "cvpc/error.hpp"
#include "cvpc/galerkin.hpp"
#include "cvpc/montecarlo.hpp"
#include "cvpc/pilot.hpp"

namespace cvpc::app {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const std::vector<std::string> kEstimators{"MC", "gPC", "CVPC", "CVPC-suboptimal"};
const std::vector<std::string> kStats{"mean", "variance"};

struct Surrogate {
  std::shared_ptr<const MultiIndexBasis> basis;
  std::vector<PcExpansion> expansions;  // one per reported time reached before divergence
  bool diverged = false;
  double last_finite_time = 0.0;
};

Surrogate solve_surrogate(const QoiModel& model, unsigned degree, ExpansionScheme scheme, const TimeGrid& grid,
                          std::size_t stride) {
  Surrogate s;
  s.basis = std::make_shared<const MultiIndexBasis>(MultiIndexBasis::build(model.system().n_zeta(), degree, scheme));
  const auto system = GalerkinSystem::project(model.system(), s.basis);
  const auto traj = integrate(system, grid, stride);
  s.diverged = traj.diverged;
  s.last_finite_time = traj.last_finite_time;
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    auto e = model.expansion(system, traj.states[j], traj.times[j]);
    const bool finite = std::all_of(e.coefficients.begin(), e.coefficients.end(),
                                    [](double c) { return std::isfinite(c); });
    if (!finite) {
      s.diverged = true;
      break;
    }
    s.expansions.push_back(std::move(e));
  }
  return s;
}

std::size_t time_index(const std::vector<double>& times, double t) {
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (std::abs(times[j] - t) <= 1e-9 * std::max(1.0, t)) return j;
  }
  throw ConfigError("time " + format_double(t) + " is not on the reporting grid");
}

struct Accumulator {
  double sum = 0.0;
  double sq_err = 0.0;
  double sq_err2 = 0.0;
  double alpha = 0.0;
  double rho = 0.0;

  void add(double estimate, double reference, double a, double r) {
    const double e = (estimate - reference) * (estimate - reference);
    sum += estimate;
    sq_err += e;
    sq_err2 += e * e;
    alpha += a;
    rho += r;
  }
};

}  // namespace

DesignOutcome design_experiment(const ExperimentConfig& config) {
  DesignOutcome out;
  const auto model = config.qoi_model();
  PilotSettings ps;
  ps.p_pilot = config.pilot_max_degree;
  ps.n_pilot = config.pilot_samples;
  ps.seed = config.seed;
  ps.step = config.step;
  ps.time = config.qoi.time;
  ps.scheme = config.scheme;
  ps.rhs_weight = config.rhs_weight;
  out.pilot = run_pilot(model, ps);
  out.fit = fit_models(out.pilot, config.scheme);
  // A constant surrogate has rho = 0, so its variance factor is 1.
  out.degree_zero = DegreeZero{out.pilot.degrees.front().cost, 1.0};
  out.design = solve_discrete(out.fit.corr, out.fit.cost, config.budget, out.pilot.unit_cost, out.degree_zero);
  return out;
}

json design_to_json(const ExperimentConfig& config, const DesignOutcome& o) {
  const auto& d = o.design;
  json j;
  j["model"] = config.model_name;
  j["scheme"] = std::string(to_string(config.scheme));
  j["seed"] = config.seed;
  j["budget_hf_sample_units"] = d.budget;
  j["unit_cost_hf_sample_units"] = d.unit_cost;
  j["qoi_time_units"] = config.qoi.time;
  j["p_star"] = d.p_star;
  j["n_star"] = d.n_star;
  j["gpc_cost_hf_sample_units"] = d.gpc_cost;
  j["objective"] = d.objective;
  j["predicted_variance_factor"] = d.variance_factor;
  j["continuous"] = {{"feasible", d.continuous_feasible},
                     {"p_tilde", d.continuous.p_tilde},
                     {"shape", to_string(d.continuous.shape)},
                     {"lower", d.continuous.lower},
                     {"upper", d.continuous.upper}};
  j["fitted"] = {{"k1", d.corr.k1}, {"k2", d.corr.k2}, {"k3", d.cost.k3}, {"k4", d.cost.k4}};
  j["fit_flags"] = o.fit.flags;
  j["degree_zero"] = {{"cost_hf_sample_units", o.degree_zero.cost}, {"rho_factor", o.degree_zero.rho_factor}};
  json pilot;
  pilot["samples"] = o.pilot.n_pilot;
  pilot["max_degree"] = o.pilot.p_pilot;
  pilot["mean_q"] = o.pilot.mean_q;
  pilot["var_q"] = o.pilot.var_q;
  pilot["degrees"] = json::array();
  for (const auto& p : o.pilot.degrees) {
    pilot["degrees"].push_back({{"p", p.p},
                                {"terms", p.terms},
                                {"rho", p.rho},
                                {"cost_hf_sample_units", p.cost},
                                {"var_pc", p.var_pc},
                                {"cov_q_pc", p.cov_q_pc},
                                {"degenerate", p.degenerate},
                                {"diverged", p.diverged}});
  }
  j["pilot"] = pilot;
  std::vector<double> budgets;
  for (int i = 1; i <= 20; ++i) budgets.push_back(config.budget * 0.1 * i);
  j["curve"] = json::array();
  for (const auto& pt : design_curve(d.corr, d.cost, budgets, d.unit_cost, o.degree_zero)) {
    json c{{"budget_hf_sample_units", pt.budget}, {"feasible", pt.feasible}};
    if (pt.feasible) {
      c["p_star"] = pt.p_star;
      c["n_star"] = pt.n_star;
      c["predicted_variance_factor"] = pt.variance_factor;
    }
    j["curve"].push_back(c);
  }
  return j;
}

json run_estimate(const ExperimentConfig& config, const json& design, const EstimateOptions& options) {
  unsigned p = 0;
  std::size_t n = 0;
  try {
    p = design.at("p_star").get<unsigned>();
    n = design.at("n_star").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("design file: ") + e.what());
  }
  double gpc_cost = 0.0;
  try {
    gpc_cost = design.at("gpc_cost_hf_sample_units").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("design file: ") + e.what());
  }
  if (n < 1 || static_cast<double>(n) + gpc_cost > config.budget + 1e-9) {
    throw InfeasibleBudget("design (p=" + std::to_string(p) + ", N=" + std::to_string(n) + ") costs " +
                           format_double(static_cast<double>(n) + gpc_cost) + " > budget " +
                           format_double(config.budget));
  }

  const auto model = config.qoi_model();
  const double t = config.qoi.time;
  const auto grid = TimeGrid::over(t, config.step);
  const auto surrogate = solve_surrogate(model, p, config.scheme, grid, grid.steps);
  const auto batch = SampleBatch::draw(config.seed, n, model.system().n_zeta(), 0);
  const auto mc = mc_estimate(model, batch, t, config.step);

  double mu = 0.0;
  if (config.weight_mode == WeightMode::Reference) {
    const auto ref = obtain_reference(config, options.force_reference);
    mu = ref.mean[time_index(ref.times, t)];
  } else {
    mu = design.at("pilot").at("mean_q").get<double>();
  }

  json j;
  j["model"] = config.model_name;
  j["qoi_time_units"] = t;
  j["p"] = p;
  j["n"] = n;
  j["seed"] = config.seed;
  j["weight_mode"] = to_string(config.weight_mode);
  j["cost_hf_sample_units"] = static_cast<double>(n) + gpc_cost;
  j["surrogate_diverged"] = surrogate.diverged;

  const bool reached = surrogate.expansions.size() == 2 && !surrogate.diverged;
  EstimatorResult cme;
  Moments pc_moments;
  CvWeights w;
  if (reached) {
    const auto& e = surrogate.expansions.back();
    cme = cme_estimate(e, batch);
    pc_moments = extract_moments(e);
    w = cv_weights(mc.values, cme.values, mu, pc_moments.mean);
  } else {
    cme = summarize(std::vector<double>(n, 0.0), 0.0, batch.fingerprint());
    w.degenerate = true;
  }
  if (options.alpha_zero) w.alpha_mean = w.alpha_variance = 0.0;
  const std::vector<double>& qpc = cme.values;

  j["alpha_forced_zero"] = options.alpha_zero;
  j["degenerate_surrogate"] = w.degenerate;
  j["rho"] = w.rho;
  j["rho_clamped"] = w.rho_clamped;
  j["mean"] = {{"cvpc", cvpc_mean(mc, cme, pc_moments.mean, w.alpha_mean)},
               {"mc", mc.mean},
               {"cme", cme.mean},
               {"cvm", pc_moments.mean},
               {"alpha", w.alpha_mean}};
  j["variance"] = {{"cvpc", cvpc_variance(mc.values, qpc, mu, pc_moments.mean, pc_moments.variance, w.alpha_variance)},
                   {"mc_sample_variance", mc.variance.value_or(kNaN)},
                   {"mu", mu},
                   {"gpc_analytic", pc_moments.variance},
                   {"alpha", w.alpha_variance}};
  return j;
}

unsigned comparator_degree(const ExperimentConfig& config) {
  const auto model = config.qoi_model();
  if (config.comparator_degree) {
    const double c = galerkin_cost(model, *config.comparator_degree, config.scheme, config.rhs_weight);
    if (c > config.budget) {
      throw InfeasibleBudget("gPC comparator degree " + std::to_string(*config.comparator_degree) + " costs " +
                             format_double(c) + " > budget");
    }
    return *config.comparator_degree;
  }
  unsigned best = 0;
  for (unsigned p = 0; p <= config.comparator_max_degree; ++p) {
    if (galerkin_cost(model, p, config.scheme, config.rhs_weight) > config.budget) break;
    best = p;
  }
  return best;
}

const BenchmarkRow& BenchmarkReport::row(double t, const std::string& estimator, const std::string& stat) const {
  for (const auto& r : rows) {
    if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, t) && r.estimator == estimator && r.stat == stat) return r;
  }
  throw std::out_of_range("no benchmark row for " + estimator + "/" + stat);
}

std::vector<double> BenchmarkReport::times() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (out.empty() || r.t != out.back()) out.push_back(r.t);
  }
  return out;
}

BenchmarkReport run_benchmark(const ExperimentConfig& config, const Reference& reference, std::size_t replications) {
  if (replications < 1) throw ConfigError("replications must be at least 1");
  BenchmarkReport rep;
  rep.replications = replications;
  rep.replication_mode = std::string("stream-per-replication;mu=") + to_string(config.weight_mode);
  rep.design = design_experiment(config);
  const auto& design = rep.design.design;

  const auto model = config.qoi_model();
  const auto grid = config.report_grid();
  const auto stride = config.report_stride();
  const auto idx = report_indices(grid, stride);
  const std::size_t nt = idx.size();
  if (reference.times.size() != nt) throw CacheConflict("reference does not match the reporting grid");

  const auto cvpc_pc = solve_surrogate(model, design.p_star, config.scheme, grid, stride);
  rep.surrogate_diverged = cvpc_pc.diverged;
  rep.surrogate_last_finite_time = cvpc_pc.last_finite_time;
  rep.gpc_degree = comparator_degree(config);
  const auto gpc = solve_surrogate(model, rep.gpc_degree, config.scheme, grid, stride);
  rep.comparator_diverged = gpc.diverged;
  rep.comparator_last_finite_time = gpc.last_finite_time;

  rep.n_mc = static_cast<std::size_t>(std::floor(config.budget / design.unit_cost));
  const std::size_t n_cv = design.n_star;
  if (n_cv > rep.n_mc || n_cv < 2) throw InfeasibleBudget("designed sample size is not usable for CVPC");
  const double mc_cost = static_cast<double>(rep.n_mc) * design.unit_cost;
  const double cv_cost = static_cast<double>(n_cv) * design.unit_cost + design.gpc_cost;
  const double gpc_cost = galerkin_cost(model, rep.gpc_degree, config.scheme, config.rhs_weight);

  // Surrogate moments are only available up to the last finite time.
  const std::size_t n_avail = cvpc_pc.expansions.size();
  std::vector<Moments> pc_moments(n_avail);
  for (std::size_t j = 0; j < n_avail; ++j) pc_moments[j] = extract_moments(cvpc_pc.expansions[j]);

  std::vector<double> mu(nt);
  if (config.weight_mode == WeightMode::Reference) {
    mu = reference.mean;
  } else {
    const auto pilot_batch = SampleBatch::draw(config.seed, config.pilot_samples, model.system().n_zeta(), kPilotStream);
    const auto pm = sample_qoi(model, pilot_batch, grid, stride);
    for (std::size_t j = 0; j < nt; ++j) mu[j] = summarize({pm.column(j).begin(), pm.column(j).end()}, 0, 0).mean;
  }

  // acc[(estimator * 2 + stat) * nt + j]
  std::vector<Accumulator> acc(kEstimators.size() * kStats.size() * nt);
  auto slot = [&](std::size_t e, std::size_t s, std::size_t j) -> Accumulator& { return acc[(e * 2 + s) * nt + j]; };

  const auto nz = model.system().n_zeta();
  for (std::size_t r = 0; r < replications; ++r) {
    const auto batch = SampleBatch::draw(config.seed, rep.n_mc, nz, r);
    const auto hf = sample_qoi(model, batch, grid, stride);
    const auto cv_batch = SampleBatch::draw(config.seed, n_cv, nz, r);
    const auto lf = sample_surrogate(cvpc_pc.expansions, cv_batch);

    for (std::size_t j = 0; j < nt; ++j) {
      const auto q_all = hf.column(j);
      const auto mc = summarize({q_all.begin(), q_all.end()}, mc_cost, batch.fingerprint());
      slot(0, 0, j).add(mc.mean, reference.mean[j], kNaN, kNaN);
      slot(0, 1, j).add(mc.variance.value_or(kNaN), reference.variance[j], kNaN, kNaN);

      const auto q = q_all.subspan(0, n_cv);
      const auto hf_cv = summarize({q.begin(), q.end()}, 0.0, cv_batch.fingerprint());
      CvWeights w;
      EstimatorResult cme;
      Moments m;
      if (j < n_avail) {
        const auto qpc = lf.column(j);
        cme = summarize({qpc.begin(), qpc.end()}, 0.0, cv_batch.fingerprint());
        m = pc_moments[j];
        w = cv_weights(q, cme.values, mu[j], m.mean);
      } else {
        cme = summarize(std::vector<double>(n_cv, 0.0), 0.0, cv_batch.fingerprint());
        w.degenerate = true;
      }
      const auto& qpc = cme.values;
      slot(2, 0, j).add(cvpc_mean(hf_cv, cme, m.mean, w.alpha_mean), reference.mean[j], w.alpha_mean, w.rho);
      slot(2, 1, j).add(cvpc_variance(q, qpc, mu[j], m.mean, m.variance, w.alpha_variance), reference.variance[j],
                        w.alpha_variance, w.rho);
      slot(3, 0, j).add(cvpc_mean(hf_cv, cme, m.mean, w.alpha_variance), reference.mean[j], w.alpha_variance, w.rho);
      slot(3, 1, j).add(cvpc_variance(q, qpc, mu[j], m.mean, m.variance, w.alpha_mean), reference.variance[j],
                        w.alpha_mean, w.rho);
    }
  }

  for (std::size_t j = 0; j < nt; ++j) {
    Moments g{kNaN, kNaN};
    if (j < gpc.expansions.size()) g = extract_moments(gpc.expansions[j]);
    for (int k = 0; k < 2; ++k) {
      const double est = k == 0 ? g.mean : g.variance;
      const double ref = k == 0 ? reference.mean[j] : reference.variance[j];
      auto& a = slot(1, k, j);
      for (std::size_t r = 0; r < replications; ++r) a.add(est, ref, kNaN, kNaN);
    }
  }

  const double R = static_cast<double>(replications);
  const double costs[] = {mc_cost, gpc_cost, cv_cost, cv_cost};
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t e = 0; e < kEstimators.size(); ++e) {
      for (std::size_t s = 0; s < kStats.size(); ++s) {
        const auto& a = slot(e, s, j);
        BenchmarkRow row;
        row.t = reference.times[j];
        row.estimator = kEstimators[e];
        row.stat = kStats[s];
        row.estimate = a.sum / R;
        const double mse = a.sq_err / R;
        row.rmse = std::sqrt(mse);
        if (replications > 1 && row.rmse > 0.0) {
          const double var_e = std::max(0.0, (a.sq_err2 / R - mse * mse) * R / (R - 1.0));
          row.rmse_std_error = std::sqrt(var_e / R) / (2.0 * row.rmse);
        }
        row.alpha = a.alpha / R;
        row.rho = a.rho / R;
        row.cost = costs[e];
        row.reference = s == 0 ? reference.mean[j] : reference.variance[j];
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

void write_benchmark(const BenchmarkReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "benchmark.csv", std::ios::trunc);
  std::ofstream rel(dir / "benchmark_relative.csv", std::ios::trunc);
  if (!csv || !rel) throw std::runtime_error("cannot write benchmark output in '" + dir.string() + "'");
  csv << "t,estimator,stat,estimate,rmse,alpha,rho,cost,replication_mode\n";
  rel << "t,estimator,stat,reference,relative_rmse,rmse_std_error\n";
  for (const auto& r : report.rows) {
    csv << format_double(r.t) << ',' << r.estimator << ',' << r.stat << ',' << format_double(r.estimate) << ','
        << format_double(r.rmse) << ',' << format_double(r.alpha) << ',' << format_double(r.rho) << ','
        << format_double(r.cost) << ',' << report.replication_mode << '\n';
    const double relative = r.reference != 0.0 ? r.rmse / std::abs(r.reference) : kNaN;
    rel << format_double(r.t) << ',' << r.estimator << ',' << r.stat << ',' << format_double(r.reference) << ','
        << format_double(relative) << ',' << format_double(r.rmse_std_error) << '\n';
  }
  const auto& d = report.design.design;
  json meta;
  meta["replications"] = report.replications;
  meta["replication_mode"] = report.replication_mode;
  meta["mc_samples"] = report.n_mc;
  meta["cvpc"] = {{"p_star", d.p_star},
                  {"n_star", d.n_star},
                  {"surrogate_diverged", report.surrogate_diverged},
                  {"surrogate_last_finite_time", report.surrogate_last_finite_time}};
  meta["gpc"] = {{"degree", report.gpc_degree},
                 {"diverged", report.comparator_diverged},
                 {"last_finite_time", report.comparator_last_finite_time}};
  std::ofstream(dir / "benchmark_meta.json", std::ios::trunc) << meta.dump(2) << '\n';
}

}  // namespace cvpc::app
