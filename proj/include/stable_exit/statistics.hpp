#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace stable_exit {

inline constexpr double kDefaultConfidence = 0.99;

struct Interval {
  double lo;
  double hi;
};

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                         double confidence = kDefaultConfidence);

/// Two-sided standard normal quantile z with P(|Z| <= z) = confidence.
double normal_two_sided_quantile(double confidence);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double chi2 = 0.0;  // weighted residual sum of squares
};

/// Least squares y = intercept + slope x. With weights, the slope standard
/// error treats 1/w as known variances; without, it is residual based.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights = {});

/// Two-sample Kolmogorov-Smirnov statistic. Sorts copies of its inputs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ExponentFit {
  double slope = 0.0;
  double stderr = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double predicted = 0.0;
  int n_points = 0;
  double intercept = 0.0;
  double chi2_per_dof = 0.0;
};

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::uint64_t n = 0;
  double censored_fraction = 0.0;
};

}  // namespace stable_exit
