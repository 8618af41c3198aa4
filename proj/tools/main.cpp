#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "cvpc/app/commands.hpp"
#include "cvpc/app/config.hpp"
#include "cvpc/app/reference.hpp"
#include "cvpc/error.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kInfeasible = 2, kConfig = 3, kCache = 4 };

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control-variate polynomial chaos: estimator design and benchmarking"};
  app.require_subcommand(1);

  std::string config_path, out, design_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<int> threads;
  bool force = false, alpha_zero = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "OpenMP worker count");
  };

  auto* design = app.add_subcommand("design", "run the pilot and solve for (p*, N*)");
  add_common(design);
  design->add_option("--out", out, "write the design JSON here instead of stdout");

  auto* estimate = app.add_subcommand("estimate", "run one CVPC estimate for a design");
  add_common(estimate);
  estimate->add_option("--design", design_path, "design JSON from `design`")->required();
  estimate->add_option("--out", out, "write the result JSON here instead of stdout");
  estimate->add_flag("--alpha-zero", alpha_zero, "disable the control variate (plain MC)");
  estimate->add_flag("--force", force, "rebuild a conflicting reference cache");

  auto* benchmark = app.add_subcommand("benchmark", "equal-budget RMSE comparison against the reference");
  add_common(benchmark);
  benchmark->add_option("--out", out, "output directory")->required();
  benchmark->add_option("--reps", reps, "override the replication count");
  benchmark->add_flag("--force", force, "rebuild a conflicting reference cache");

  auto* reference = app.add_subcommand("reference", "build or verify the cached reference solution");
  add_common(reference);
  reference->add_flag("--force", force, "overwrite a conflicting cache");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = cvpc::app::load_config(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (config.threads > 0) omp_set_num_threads(config.threads);

    if (design->parsed()) {
      emit(cvpc::app::design_to_json(config, cvpc::app::design_experiment(config)), out);
    } else if (estimate->parsed()) {
      std::ifstream in(design_path);
      if (!in) throw cvpc::ConfigError("cannot open design '" + design_path + "'");
      nlohmann::json d;
      try {
        in >> d;
      } catch (const nlohmann::json::exception& e) {
        throw cvpc::ConfigError("design file is not valid JSON: " + std::string(e.what()));
      }
      emit(cvpc::app::run_estimate(config, d, {alpha_zero, force}), out);
    } else if (benchmark->parsed()) {
      cvpc::app::CacheStatus status{};
      const auto ref = cvpc::app::obtain_reference(config, force, &status);
      std::cerr << "reference " << to_string(status) << ": " << config.reference_cache.string() << '\n';
      const auto report = cvpc::app::run_benchmark(config, ref, reps.value_or(config.replications));
      cvpc::app::write_benchmark(report, out);
    } else if (reference->parsed()) {
      cvpc::app::CacheStatus status{};
      const auto ref = cvpc::app::obtain_reference(config, force, &status);
      std::cout << "reference " << to_string(status) << ": " << config.reference_cache.string() << " ("
                << ref.samples << " samples, " << ref.times.size() << " times)\n";
      std::cout << "t=" << cvpc::app::format_double(ref.times.back())
                << " mean=" << cvpc::app::format_double(ref.mean.back())
                << " std_error_mean=" << cvpc::app::format_double(ref.std_error_mean.back()) << '\n';
    }
  } catch (const cvpc::InfeasibleBudget& e) {
    std::cerr << "infeasible budget: " << e.what() << '\n';
    return kInfeasible;
  } catch (const cvpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const cvpc::CacheConflict& e) {
    std::cerr << "cache conflict: " << e.what() << '\n';
    return kCache;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
