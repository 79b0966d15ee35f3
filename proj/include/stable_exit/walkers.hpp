#pragma once

// Raw Monte Carlo paths: exact exit positions by walk-on-balls and exit
// times by time discretization.

#include <cstdint>
#include <span>
#include <vector>

#include "stable_exit/geometry.hpp"
#include "stable_exit/rng.hpp"
#include "stable_exit/stable_sampling.hpp"
#include "stable_exit/statistics.hpp"

namespace stable_exit {

enum class WalkStatus { Exited, MaxStepsExceeded };

struct WalkResult {
  Point exit_point;
  std::int64_t steps = 0;
  /// Sum of centre-start mean exit times of the visited balls.
  double mean_time_accumulator = 0.0;
  WalkStatus status = WalkStatus::Exited;
};

inline constexpr std::int64_t kDefaultMaxSteps = 100000;

/// Walk-on-balls from x0 until the domain is left. Each step jumps to an
/// exact exit position of the ball of radius gamma * dist(y, complement)
/// centred at the current point y, so the final position is an exact draw
/// from the harmonic measure of the domain.
WalkResult walk_on_balls(const Domain& domain, const Point& x0, const StableParams& params,
                         RngStream& rng, double gamma = 1.0,
                         std::int64_t max_steps = kDefaultMaxSteps);

struct ExitTimeSample {
  double time = 0.0;
  Point exit_point;
  bool censored = false;
};

/// Euler scheme X_{(k+1)h} = X_{kh} + h^{1/alpha} xi_k. Exit is detected at
/// grid times only; walks still inside at t_max are censored there.
ExitTimeSample euler_exit_time(const Domain& domain, const Point& x0, const StableParams& params,
                               double h, double t_max, RngStream& rng);

struct CoupledExitTimes {
  ExitTimeSample fine;    // step h/2
  ExitTimeSample coarse;  // step h, built from pairs of fine increments
};

/// Step-halving pair on one path: the coarse walk is the fine walk observed
/// at every other grid time, so both discretizations share their noise.
CoupledExitTimes euler_exit_time_coupled(const Domain& domain, const Point& x0,
                                         const StableParams& params, double h, double t_max,
                                         RngStream& rng);

/// Identifies the streams used by a batch of walks: walk i draws from
/// RngStream(seed, first_stream + i).
struct StreamRange {
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  std::uint64_t count = 0;

  RngStream stream(std::uint64_t i) const noexcept { return {seed, first_stream + i}; }
};

/// Exit times of independent Euler walks, one per stream of the range.
std::vector<ExitTimeSample> simulate_exit_times(const Domain& domain, const Point& x0,
                                                const StableParams& params, double h,
                                                double t_max, const StreamRange& streams,
                                                int workers);

/// Kaplan-Meier-free survival table: censored walks count as alive.
/// Grid times must be ascending and at most t_max.
SurvivalCurve survival_from_samples(std::span<const ExitTimeSample> samples,
                                    std::span<const double> time_grid, double t_max,
                                    double confidence = kDefaultConfidence);

/// Survival estimates of tau at the grid times with Clopper-Pearson intervals.
SurvivalCurve survival_curve(const Domain& domain, const Point& x0, const StableParams& params,
                             double h, std::span<const double> time_grid, double t_max,
                             const StreamRange& streams, int workers);

}  // namespace stable_exit
