#include "stable_exit/ball_exit.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stable_exit {

double poisson_constant(int d, double alpha) {
  const StableParams params(alpha, d);
  constexpr double pi = std::numbers::pi;
  return std::tgamma(0.5 * params.d) * std::pow(pi, -0.5 * params.d - 1.0) *
         std::sin(0.5 * pi * params.alpha);
}

double poisson_density(double r, const Point& x, const Point& y, const StableParams& params) {
  const double y_norm2 = y.norm() * y.norm();
  const double r2 = r * r;
  if (y_norm2 <= r2) return 0.0;
  const double x_norm2 = x.norm() * x.norm();
  const double ratio = (r2 - x_norm2) / (y_norm2 - r2);
  return poisson_constant(params.d, params.alpha) * std::pow(ratio, 0.5 * params.alpha) *
         std::pow(distance(y, x), -params.d);
}

double ball_exit_radial_cdf(double q, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2)");
  if (q <= 1.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  // |Y| <= q r  <=>  V >= q^{-2}
  return boost::math::ibetac(0.5 * alpha, 1.0 - 0.5 * alpha, 1.0 / (q * q));
}

Point sample_ball_exit(double radius, const StableParams& params, RngStream& rng) {
  if (!(radius > 0.0)) throw std::invalid_argument("sample_ball_exit: radius must be positive");
  double v = 0.0;
  do {
    v = sample_beta(0.5 * params.alpha, 1.0 - 0.5 * params.alpha, rng);
  } while (!(v > 0.0 && v < 1.0));
  Point y = sample_unit_direction(params.d, rng);
  y *= radius / std::sqrt(v);
  return y;
}

double mean_exit_time_constant(int d, double alpha) {
  const StableParams params(alpha, d);
  return std::tgamma(0.5 * d) /
         (std::pow(2.0, alpha) * std::tgamma(1.0 + 0.5 * alpha) * std::tgamma(0.5 * (d + alpha)));
}

double mean_exit_time_ball(double radius, double start_offset, const StableParams& params) {
  if (!(radius > 0.0)) throw std::invalid_argument("mean_exit_time_ball: radius must be positive");
  if (!(start_offset >= 0.0 && start_offset < radius)) {
    throw std::invalid_argument("mean_exit_time_ball: start offset must lie in [0, radius)");
  }
  return mean_exit_time_constant(params.d, params.alpha) *
         std::pow(radius * radius - start_offset * start_offset, 0.5 * params.alpha);
}

}  // namespace stable_exit
