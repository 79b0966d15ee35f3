#include "stable_exit/walkers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stable_exit/ball_exit.hpp"
#include "stable_exit/parallel.hpp"

namespace stable_exit {

namespace {

void check_start(const Domain& domain, const Point& x0, const StableParams& params) {
  if (x0.dim() != params.d || domain_dim(domain) != params.d) {
    throw std::invalid_argument("walker: dimension mismatch between domain, start and process");
  }
  if (!domain_contains(domain, x0)) {
    throw std::invalid_argument("walker: start point is not interior to the domain");
  }
}

std::int64_t grid_steps(double h, double t_max) {
  if (!(h > 0.0)) throw std::invalid_argument("euler: step h must be positive");
  if (!(t_max > h)) throw std::invalid_argument("euler: t_max must exceed h");
  return static_cast<std::int64_t>(std::ceil(t_max / h - 1e-9));
}

}  // namespace

WalkResult walk_on_balls(const Domain& domain, const Point& x0, const StableParams& params,
                         RngStream& rng, double gamma, std::int64_t max_steps) {
  check_start(domain, x0, params);
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("walk_on_balls: gamma must lie in (0, 1]");
  }
  const double kappa = mean_exit_time_constant(params.d, params.alpha);
  WalkResult result;
  Point y = x0;
  while (result.steps < max_steps) {
    const double radius = gamma * domain_distance(domain, y);
    y += sample_ball_exit(radius, params, rng);
    result.mean_time_accumulator += kappa * std::pow(radius, params.alpha);
    ++result.steps;
    if (!domain_contains(domain, y)) {
      result.exit_point = y;
      return result;
    }
  }
  result.exit_point = y;
  result.status = WalkStatus::MaxStepsExceeded;
  return result;
}

ExitTimeSample euler_exit_time(const Domain& domain, const Point& x0, const StableParams& params,
                               double h, double t_max, RngStream& rng) {
  check_start(domain, x0, params);
  const std::int64_t n_steps = grid_steps(h, t_max);
  const double scale = std::pow(h, 1.0 / params.alpha);
  Point x = x0;
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    x += scale * sample_isotropic_increment(params, 1.0, rng);
    if (!domain_contains(domain, x)) {
      return {std::min(static_cast<double>(k) * h, t_max), x, false};
    }
  }
  return {t_max, x, true};
}

CoupledExitTimes euler_exit_time_coupled(const Domain& domain, const Point& x0,
                                         const StableParams& params, double h, double t_max,
                                         RngStream& rng) {
  check_start(domain, x0, params);
  const std::int64_t coarse_steps = grid_steps(h, t_max);
  const double half = 0.5 * h;
  const double scale = std::pow(half, 1.0 / params.alpha);
  CoupledExitTimes out;
  bool fine_done = false;
  Point x = x0;
  for (std::int64_t k = 1; k <= 2 * coarse_steps; ++k) {
    x += scale * sample_isotropic_increment(params, 1.0, rng);
    const bool inside = domain_contains(domain, x);
    if (!inside && !fine_done) {
      out.fine = {std::min(static_cast<double>(k) * half, t_max), x, false};
      fine_done = true;
    }
    if (!inside && k % 2 == 0) {
      out.coarse = {std::min(static_cast<double>(k / 2) * h, t_max), x, false};
      return out;
    }
  }
  if (!fine_done) out.fine = {t_max, x, true};
  out.coarse = {t_max, x, true};
  return out;
}

std::vector<ExitTimeSample> simulate_exit_times(const Domain& domain, const Point& x0,
                                                const StableParams& params, double h,
                                                double t_max, const StreamRange& streams,
                                                int workers) {
  check_start(domain, x0, params);
  grid_steps(h, t_max);
  std::vector<ExitTimeSample> samples(streams.count);
  parallel_chunks(streams.count, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng = streams.stream(i);
      samples[i] = euler_exit_time(domain, x0, params, h, t_max, rng);
    }
  });
  return samples;
}

SurvivalCurve survival_from_samples(std::span<const ExitTimeSample> samples,
                                    std::span<const double> time_grid, double t_max,
                                    double confidence) {
  if (samples.empty()) throw std::invalid_argument("survival: no samples");
  if (!std::is_sorted(time_grid.begin(), time_grid.end())) {
    throw std::invalid_argument("survival: time grid must be ascending");
  }
  if (!time_grid.empty() && (time_grid.front() < 0.0 || time_grid.back() > t_max)) {
    throw std::invalid_argument("survival: time grid must lie within [0, t_max]");
  }
  std::vector<double> times;
  times.reserve(samples.size());
  std::uint64_t censored = 0;
  for (const auto& s : samples) {
    if (s.censored) {
      ++censored;
    } else {
      times.push_back(s.time);
    }
  }
  std::sort(times.begin(), times.end());

  SurvivalCurve curve;
  curve.n = samples.size();
  curve.censored_fraction = static_cast<double>(censored) / static_cast<double>(curve.n);
  for (double t : time_grid) {
    // exits at or before t are dead; censored walks are alive at every t <= t_max
    const auto dead = static_cast<std::uint64_t>(
        std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const std::uint64_t alive = curve.n - dead;
    const Interval ci = clopper_pearson(alive, curve.n, confidence);
    curve.times.push_back(t);
    curve.survival.push_back(static_cast<double>(alive) / static_cast<double>(curve.n));
    curve.ci_lo.push_back(ci.lo);
    curve.ci_hi.push_back(ci.hi);
  }
  return curve;
}

SurvivalCurve survival_curve(const Domain& domain, const Point& x0, const StableParams& params,
                             double h, std::span<const double> time_grid, double t_max,
                             const StreamRange& streams, int workers) {
  const auto samples = simulate_exit_times(domain, x0, params, h, t_max, streams, workers);
  return survival_from_samples(samples, time_grid, t_max);
}

}  // namespace stable_exit
