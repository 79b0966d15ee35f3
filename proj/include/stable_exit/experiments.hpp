#pragma once

// Config-driven experiment runner and its output writers.
//
// A run is fully determined by its config (seed included): walks draw from
// pre-assigned stream blocks, one block per scale point, so results do not
// depend on the worker count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stable_exit/estimators.hpp"
#include "stable_exit/geometry.hpp"

namespace stable_exit {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { HarmonicDecay, TailIndex, Survival, ScalingCheck, BoundCheck };

std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::HarmonicDecay;
  double beta = 0.5;
  double a = 1.0;
  int d = 2;
  double alpha = 1.0;
  /// Fixed start point; ignored when start_fraction is set.
  std::vector<double> start{1.0, 0.0};
  /// Start at (start_fraction * s, 0) for each scale s.
  std::optional<double> start_fraction;
  std::vector<double> scales;
  std::uint64_t n = 100000;
  double h = 1e-2;
  double t_max = 1e4;
  std::vector<double> time_grid;
  std::uint64_t seed = 1;
  int workers = 1;  // runtime only: never part of the echoed config
  double gamma = 1.0;
  std::int64_t max_steps = kDefaultMaxSteps;

  // tail_index
  std::vector<double> moments{1.5};
  std::uint64_t halving_n = 0;  // 0 disables the step-halving diagnostic
  double tail_quantile = 0.99;  // window starts where survival drops to 1 - q
  std::uint64_t min_exceedances = 200;

  // survival
  std::string domain = "region";  // "region" or "cylinder"
  std::optional<std::pair<double, double>> decay_window;
};

/// Parses and validates; throws ConfigError with the field name.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks parameter ranges and the consistency of lists.
void validate_config(const ExperimentConfig& config);

/// Canonical echo of every field that influences the numbers.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct Predictions {
  double p0;
  double alpha_beta_p0;          // escape decay exponent, fixed start
  double alpha_beta_p0_minus_1;  // escape decay exponent, start at s/2
};

Predictions predict(int d, double alpha, double beta);

struct CurveRow {
  double scale;
  double estimate;
  double ci_lo;
  double ci_hi;
  std::uint64_t n;
};

struct RunRecord {
  /// Everything except wall time and worker count; deterministic given the
  /// config.
  nlohmann::json result;
  std::vector<CurveRow> rows;
  /// Line overlays for the plot: slope through the geometric centre of
  /// the rows.
  std::optional<ExponentFit> fit;
  double wall_time_s = 0.0;
  int workers = 1;

  nlohmann::json to_json() const;
};

/// Inverse of RunRecord::to_json.
RunRecord run_record_from_json(const nlohmann::json& j);

/// Runs the experiment. Any worker failure aborts the whole run.
RunRecord run_experiment(const ExperimentConfig& config);

/// Writes results.json, curves.csv and plot.svg into out_dir.
void emit_outputs(const RunRecord& record, const std::filesystem::path& out_dir);

std::string curves_csv(const std::vector<CurveRow>& rows);
std::string loglog_svg(const std::vector<CurveRow>& rows, const std::optional<ExponentFit>& fit,
                       const std::string& title);

}  // namespace stable_exit
