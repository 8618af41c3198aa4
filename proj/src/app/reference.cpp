#include "cvpc/app/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cvpc/error.hpp"
#include "cvpc/montecarlo.hpp"

namespace cvpc::app {

using nlohmann::json;

namespace {

constexpr std::size_t kChunk = 10000;

struct Running {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void merge(double nb, double mean_b, double m2_b) {
    const double total = n + nb;
    const double delta = mean_b - mean;
    mean += delta * nb / total;
    m2 += m2_b + delta * delta * n * nb / total;
    n = total;
  }
};

std::vector<double> split_csv(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* to_string(CacheStatus status) {
  switch (status) {
    case CacheStatus::Hit:
      return "hit";
    case CacheStatus::Built:
      return "built";
    case CacheStatus::Rebuilt:
      return "rebuilt";
  }
  return "unknown";
}

json reference_header(const ExperimentConfig& config) {
  json h;
  h["format"] = "cvpc-reference-v1";
  h["model"] = config.model_json;
  h["qoi"] = describe_qoi(config.qoi);
  h["seed"] = config.seed;
  h["stream"] = kReferenceStream;
  h["samples"] = config.reference_samples;
  h["step_time_units"] = config.step;
  h["t_end_time_units"] = config.t_end;
  h["report_every_time_units"] = config.report_every;
  return h;
}

Reference build_reference(const ExperimentConfig& config) {
  const auto model = config.qoi_model();
  const auto grid = config.report_grid();
  const auto stride = config.report_stride();
  const auto idx = report_indices(grid, stride);
  std::vector<Running> acc(idx.size());

  for (std::size_t first = 0; first < config.reference_samples; first += kChunk) {
    const std::size_t n = std::min(kChunk, config.reference_samples - first);
    const auto batch = SampleBatch::draw(config.seed, n, model.system().n_zeta(), kReferenceStream, first);
    const auto m = sample_qoi(model, batch, grid, stride);
    for (std::size_t j = 0; j < m.cols; ++j) {
      const auto col = m.column(j);
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(n);
      double m2 = 0.0;
      for (double v : col) m2 += (v - mean) * (v - mean);
      acc[j].merge(static_cast<double>(n), mean, m2);
    }
  }

  Reference ref;
  ref.samples = config.reference_samples;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double var = acc[j].m2 / (acc[j].n - 1.0);
    ref.times.push_back(grid.time(idx[j]));
    ref.mean.push_back(acc[j].mean);
    ref.variance.push_back(var);
    ref.std_error_mean.push_back(std::sqrt(var / acc[j].n));
  }
  return ref;
}

void write_reference(const std::filesystem::path& path, const json& header, const Reference& ref) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write reference cache '" + path.string() + "'");
  out << header.dump() << '\n';
  out << "t,mean,variance,std_error_mean\n";
  for (std::size_t j = 0; j < ref.times.size(); ++j) {
    out << format_double(ref.times[j]) << ',' << format_double(ref.mean[j]) << ','
        << format_double(ref.variance[j]) << ',' << format_double(ref.std_error_mean[j]) << '\n';
  }
}

Reference obtain_reference(const ExperimentConfig& config, bool force, CacheStatus* status) {
  const auto header = reference_header(config);
  const auto& path = config.reference_cache;
  bool existed = std::filesystem::exists(path);
  if (existed) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    json found;
    try {
      found = json::parse(line);
    } catch (const json::exception&) {
      found = json();
    }
    if (found == header && !force) {
      Reference ref;
      ref.samples = config.reference_samples;
      std::getline(in, line);  // column names
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw CacheConflict("reference cache '" + path.string() + "' is corrupt");
        ref.times.push_back(cells[0]);
        ref.mean.push_back(cells[1]);
        ref.variance.push_back(cells[2]);
        ref.std_error_mean.push_back(cells[3]);
      }
      if (status) *status = CacheStatus::Hit;
      return ref;
    }
    if (found != header && !force) {
      throw CacheConflict("reference cache '" + path.string() +
                          "' was built with different parameters; pass --force to overwrite");
    }
  }
  auto ref = build_reference(config);
  write_reference(path, header, ref);
  if (status) *status = existed ? CacheStatus::Rebuilt : CacheStatus::Built;
  return ref;
}

}  // namespace cvpc::app
