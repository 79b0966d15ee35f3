#pragma once

// Post-processing of Monte Carlo output into exponents, rates and bound
// comparisons for parabola-shaped regions.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stable_exit/geometry.hpp"
#include "stable_exit/stable_sampling.hpp"
#include "stable_exit/statistics.hpp"
#include "stable_exit/walkers.hpp"

namespace stable_exit {

/// p0 = ((d - 1)(1 - beta) + alpha) / (alpha beta): E tau^p is finite
/// exactly for p < p0.
double critical_exponent(int d, double alpha, double beta);

/// s^{alpha beta} * integral_u^v t^{-alpha beta p0 - 1} dt, without the
/// unspecified constant. Requires s >= 1 and either u >= s + s^beta, or
/// u = s and v >= s + s^beta. v may be +infinity.
double lemma2_bound(double s, double u, double v, double alpha, double beta, int d);

/// Integral over the slice {u <= z1 < v, |z~| < z1^beta} of
///   s^{alpha beta} |z - x|^{-d-alpha} max(s^{alpha beta/2} (z1 - s)^{-alpha/2}, 1),
/// the cylinder exit density bound without its constant. Requires u >= s.
double cylinder_bound_integral(double s, double u, double v, const Point& x, double alpha,
                               double beta);

struct ProbabilityEstimate {
  std::uint64_t hits = 0;
  std::uint64_t n = 0;  // completed walks
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t max_steps_exceeded = 0;
  double mean_steps = 0.0;
};

struct WalkOptions {
  double gamma = 1.0;
  std::int64_t max_steps = kDefaultMaxSteps;
  int workers = 1;
};

/// Fractions of walk-on-balls exits from `domain` that land in each of the
/// targets, with Clopper-Pearson intervals. One batch of walks serves all
/// targets.
std::vector<ProbabilityEstimate> exit_probabilities(const Domain& domain,
                                                    std::span<const RegionSlice> targets,
                                                    const Point& x0, const StableParams& params,
                                                    const StreamRange& streams,
                                                    const WalkOptions& options);

ProbabilityEstimate exit_probability(const Domain& domain, const RegionSlice& target,
                                     const Point& x0, const StableParams& params,
                                     const StreamRange& streams, const WalkOptions& options);

/// P_x{X at the exit of P^{0,s} lies in P}, by walk-on-balls on P^{0,s}.
/// Requires x0 interior with x1 <= s/2.
ProbabilityEstimate harmonic_escape_probability(const ParabolaRegion& region, double s,
                                                const Point& x0, const StableParams& params,
                                                const StreamRange& streams,
                                                const WalkOptions& options);

struct ScalePoint {
  double scale;
  double estimate;
  double ci_lo;
  double ci_hi;
};

/// Weighted least squares of log(estimate) on log(scale). Weights come from
/// the interval widths through the delta method.
ExponentFit fit_log_log_exponent(std::span<const ScalePoint> points, double predicted,
                                 double confidence = kDefaultConfidence);

struct TailIndexFit {
  ExponentFit hill;        // slope holds the tail index q in P(tau > t) ~ t^{-q}
  ExponentFit regression;  // slope of log survival on log t, i.e. about -q
  std::uint64_t k = 0;
};

/// Default Hill order: ceil(n^0.6), capped at n / 10.
std::uint64_t default_hill_k(std::uint64_t n);

/// Largest t such that at least `min_exceedances` uncensored exit times
/// exceed it.
double tail_window_end(std::span<const double> uncensored, std::uint64_t min_exceedances);

/// Hill estimator on the top-k order statistics plus a log-log survival
/// regression on [t_lo, t_hi]. `uncensored` are exit times; `censored_count`
/// walks were stopped at `t_max`.
TailIndexFit fit_tail_index(std::span<const double> uncensored, std::uint64_t censored_count,
                            double t_max, std::uint64_t k, double t_lo, double t_hi,
                            double predicted, std::uint64_t bootstrap_seed = 0);

struct CylinderDecayFit {
  double lambda_hat = 0.0;
  double stderr = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double r_squared = 0.0;
  bool asymptotic = false;  // r_squared > 0.99
};

/// Negated slope of log survival against t on the window.
CylinderDecayFit fit_cylinder_decay(const SurvivalCurve& curve, double t_lo, double t_hi);

struct MomentEstimate {
  double estimate = 0.0;
  /// |m(n) - m(n/2)| / m(n) for the prefix means at the full and half size.
  double stability = 0.0;
  double censored_fraction = 0.0;
  /// Median over disjoint blocks of the block means, at doubling block sizes.
  std::vector<std::uint64_t> block_sizes;
  std::vector<double> block_medians;
  bool increasing_at_every_doubling = false;
};

/// Empirical p-th moment of the uncensored exit times with convergence
/// diagnostics. Samples are used in their given (stream) order.
MomentEstimate moment_estimate(std::span<const double> uncensored, double censored_fraction,
                               double p, std::uint64_t min_blocks = 64);

}  // namespace stable_exit
