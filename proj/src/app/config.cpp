#include "cvpc/app/config.hpp"

#include <cmath>
#include <fstream>

#include "cvpc/error.hpp"

namespace cvpc::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

template <class T>
T get(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key)) fail(path + key, "missing");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + key, e.what());
  }
}

template <class T>
T get_or(const json& doc, const std::string& key, T fallback, const std::string& path) {
  if (!doc.contains(key)) return fallback;
  return get<T>(doc, key, path);
}

AffineExpr parse_affine(const json& j, const std::string& path, const char* constant_key) {
  AffineExpr e;
  e.constant = get<double>(j, constant_key, path);
  e.slopes = get_or<std::vector<double>>(j, "slopes", {}, path);
  return e;
}

StochasticOde parse_inline_model(const json& m) {
  const std::string path = "model.";
  const auto name = get_or<std::string>(m, "name", "inline", path);
  const auto n_states = get<std::size_t>(m, "n_states", path);
  const auto n_zeta = get<std::size_t>(m, "n_zeta", path);
  std::vector<AffineExpr> initial;
  if (!m.contains("initial") || !m["initial"].is_array()) fail(path + "initial", "expected an array");
  for (std::size_t k = 0; k < m["initial"].size(); ++k) {
    initial.push_back(parse_affine(m["initial"][k], path + "initial[" + std::to_string(k) + "].", "mean"));
  }
  std::vector<PolynomialTerm> terms;
  if (m.contains("terms")) {
    if (!m["terms"].is_array()) fail(path + "terms", "expected an array");
    for (std::size_t t = 0; t < m["terms"].size(); ++t) {
      const auto& j = m["terms"][t];
      const std::string tp = path + "terms[" + std::to_string(t) + "].";
      terms.push_back({get<std::size_t>(j, "target", tp), get_or<std::vector<std::size_t>>(j, "states", {}, tp),
                       parse_affine(j, tp, "constant")});
    }
  }
  try {
    return {name, n_states, n_zeta, std::move(initial), std::move(terms)};
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
}

QoiSpec parse_qoi(const json& q, QoiSpec fallback) {
  const std::string path = "qoi.";
  QoiSpec s = fallback;
  if (q.contains("kind")) {
    const auto kind = get<std::string>(q, "kind", path);
    if (kind == "state_moment") {
      s.kind = QoiKind::StateMoment;
    } else if (kind == "time_normalized_quadratic_integral") {
      s.kind = QoiKind::TimeNormalizedQuadraticIntegral;
    } else {
      fail(path + "kind", "expected 'state_moment' or 'time_normalized_quadratic_integral'");
    }
  }
  s.state = get_or<std::size_t>(q, "state", s.state, path);
  s.weights = get_or<std::vector<double>>(q, "weights", s.weights, path);
  s.time = get_or<double>(q, "time_units", s.time, path);
  return s;
}

bool is_multiple(double value, double step) {
  const double r = value / step;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

const char* to_string(WeightMode mode) { return mode == WeightMode::Pilot ? "pilot" : "reference"; }

TimeGrid ExperimentConfig::report_grid() const { return TimeGrid::over(t_end, step); }

std::size_t ExperimentConfig::report_stride() const {
  return static_cast<std::size_t>(std::llround(report_every / step));
}

json describe_model(const StochasticOde& ode) {
  json m;
  m["name"] = ode.name();
  m["n_states"] = ode.n_states();
  m["n_zeta"] = ode.n_zeta();
  m["initial"] = json::array();
  for (const auto& ic : ode.initial_conditions()) m["initial"].push_back({{"mean", ic.constant}, {"slopes", ic.slopes}});
  m["terms"] = json::array();
  for (const auto& t : ode.terms()) {
    m["terms"].push_back({{"target", t.target},
                          {"states", t.states},
                          {"constant", t.coefficient.constant},
                          {"slopes", t.coefficient.slopes}});
  }
  return m;
}

json describe_qoi(const QoiSpec& qoi) {
  json q;
  q["kind"] = qoi.kind == QoiKind::StateMoment ? "state_moment" : "time_normalized_quadratic_integral";
  q["state"] = qoi.state;
  q["weights"] = qoi.weights;
  q["time_units"] = qoi.time;
  return q;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;

  if (!doc.contains("model")) fail("model", "missing");
  const auto& m = doc["model"];
  if (m.is_string()) {
    try {
      auto p = preset(m.get<std::string>());
      c.model_name = p.name;
      c.ode = std::move(p.ode);
      c.qoi = p.qoi;
    } catch (const std::invalid_argument& e) {
      fail("model", e.what());
    }
  } else if (m.is_object()) {
    c.ode = parse_inline_model(m);
    c.model_name = c.ode.name();
    c.qoi = QoiSpec{QoiKind::StateMoment, 0, {}, 1.0};
  } else {
    fail("model", "expected a preset name or an inline model object");
  }
  c.model_json = describe_model(c.ode);
  if (doc.contains("qoi")) c.qoi = parse_qoi(doc["qoi"], c.qoi);
  try {
    (void)QoiModel(c.ode, c.qoi);
  } catch (const std::exception& e) {
    fail("qoi", e.what());
  }

  c.budget = get<double>(doc, "budget_hf_sample_units", "");
  if (!(c.budget > 0.0)) fail("budget_hf_sample_units", "must be positive");

  if (doc.contains("pilot")) {
    const auto& p = doc["pilot"];
    c.pilot_max_degree = get_or<unsigned>(p, "max_degree", c.pilot_max_degree, "pilot.");
    c.pilot_samples = get_or<std::size_t>(p, "samples", c.pilot_samples, "pilot.");
  }
  if (c.pilot_max_degree < 1) fail("pilot.max_degree", "must be at least 1");
  if (c.pilot_samples < 2) fail("pilot.samples", "must be at least 2");

  try {
    c.scheme = parse_scheme(get_or<std::string>(doc, "scheme", "total_order", ""));
  } catch (const std::invalid_argument& e) {
    fail("scheme", e.what());
  }
  if (!doc.contains("seed")) fail("seed", "missing (seeds must be explicit)");
  c.seed = get<std::uint64_t>(doc, "seed", "");
  c.replications = get_or<std::size_t>(doc, "replications", 1, "");
  if (c.replications < 1) fail("replications", "must be at least 1");

  c.step = get_or<double>(doc, "step_time_units", 1e-3, "");
  if (!(c.step > 0.0)) fail("step_time_units", "must be positive");
  c.t_end = get_or<double>(doc, "t_end_time_units", c.qoi.time, "");
  c.report_every = get_or<double>(doc, "report_every_time_units", c.t_end, "");
  if (!(c.t_end > 0.0) || !is_multiple(c.t_end, c.step)) fail("t_end_time_units", "must be a positive multiple of the step");
  if (!(c.report_every > 0.0) || !is_multiple(c.report_every, c.step)) {
    fail("report_every_time_units", "must be a positive multiple of the step");
  }
  if (!(c.qoi.time > 0.0) || !is_multiple(c.qoi.time, c.step)) fail("qoi.time_units", "must be a positive multiple of the step");

  if (doc.contains("reference")) {
    const auto& r = doc["reference"];
    c.reference_samples = get_or<std::size_t>(r, "samples", c.reference_samples, "reference.");
    const auto cache = get_or<std::string>(r, "cache_path", "", "reference.");
    if (!cache.empty()) c.reference_cache = base_dir / cache;
  }
  if (c.reference_samples < 2) fail("reference.samples", "must be at least 2");
  if (c.reference_cache.empty()) c.reference_cache = base_dir / (c.model_name + ".reference.csv");

  const auto mode = get_or<std::string>(doc, "weight_mode", "reference", "");
  if (mode == "pilot") {
    c.weight_mode = WeightMode::Pilot;
  } else if (mode == "reference") {
    c.weight_mode = WeightMode::Reference;
  } else {
    fail("weight_mode", "expected 'pilot' or 'reference'");
  }
  if (doc.contains("gpc_relative_rhs_weight")) {
    c.rhs_weight = get<double>(doc, "gpc_relative_rhs_weight", "");
    if (!(*c.rhs_weight > 0.0)) fail("gpc_relative_rhs_weight", "must be positive");
  }
  c.comparator_max_degree = get_or<unsigned>(doc, "gpc_comparator_max_degree", 5, "");
  if (doc.contains("gpc_comparator_degree")) c.comparator_degree = get<unsigned>(doc, "gpc_comparator_degree", "");
  c.threads = get_or<int>(doc, "threads", 0, "");
  if (c.threads < 0) fail("threads", "must be non-negative");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace cvpc::app
