// stable-exit: run, validate and predict for exit-problem experiments.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "stable_exit/experiments.hpp"
#include "stable_exit/parallel.hpp"

namespace se = stable_exit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo exit problems for isotropic stable processes in parabola-shaped regions"};
  app.set_version_flag("--version", std::string(se::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run an experiment and write results.json, curves.csv, plot.svg");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--workers", workers, "Worker threads (default: STABLE_EXIT_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the config seed");

  int d = 2;
  double alpha = 1.0, beta = 0.5;
  auto* pred = app.add_subcommand("predict", "Print p0, alpha*beta*p0 and alpha*beta*(p0 - 1)");
  pred->add_option("--d", d, "Dimension")->required();
  pred->add_option("--alpha", alpha, "Stability index")->required();
  pred->add_option("--beta", beta, "Parabola exponent")->required();

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (pred->parsed()) {
    try {
      const auto p = se::predict(d, alpha, beta);
      std::cout << std::setprecision(12) << "p0 " << p.p0 << "\n"
                << "alpha_beta_p0 " << p.alpha_beta_p0 << "\n"
                << "alpha_beta_p0_minus_1 " << p.alpha_beta_p0_minus_1 << "\n";
      return 0;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  se::ExperimentConfig config;
  try {
    config = se::load_config(config_path);
    if (workers) config.workers = *workers;
    if (seed) config.seed = *seed;
    se::validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (validate->parsed()) {
    std::cout << "ok: " << se::to_string(config.kind) << "\n";
    return 0;
  }

  try {
    const auto record = se::run_experiment(config);
    se::emit_outputs(record, out_dir);
    std::cout << "wrote " << out_dir << " (" << std::fixed << std::setprecision(1)
              << record.wall_time_s << " s, " << record.workers << " workers)\n";
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kExitAborted;
  }
  return 0;
}
