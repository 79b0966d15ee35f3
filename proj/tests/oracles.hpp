#pragma once

// Reference computations used by the tests. Nothing here calls the
// code under test.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "stable_exit/stable_sampling.hpp"

namespace oracle {

using stable_exit::StableParams;

inline double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Ball-exit kernel for the ball B(0, r), written with rho = r + t so that
/// |y|^2 - r^2 = t (2r + t) keeps full precision next to the sphere.
inline double kernel(const StableParams& p, double r, double x_norm, double t, double y_minus_x) {
  const double c = std::tgamma(0.5 * p.d) * std::pow(std::numbers::pi, -0.5 * p.d - 1.0) *
                   std::sin(0.5 * std::numbers::pi * p.alpha);
  return c * std::pow((r * r - x_norm * x_norm) / (t * (2.0 * r + t)), 0.5 * p.alpha) *
         std::pow(y_minus_x, -p.d);
}

/// Integral of g over (a, b), 0 <= a < b <= inf, with a possible integrable
/// singularity at t = 0.
template <class G>
double half_line(G g, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double split = 1.0;
  double total = 0.0;
  if (a < split) total += ts.integrate(g, a, std::min(b, split));
  if (b > split) total += std::isinf(b) ? es.integrate(g, std::max(a, split), b)
                                        : ts.integrate(g, std::max(a, split), b);
  return total;
}

/// Mass of the centred ball-exit law on {q_lo < |y|/r < q_hi}.
inline double radial_mass(const StableParams& p, double r, double q_lo, double q_hi) {
  auto g = [&](double t) {
    const double rho = r + t;
    return kernel(p, r, 0.0, t, rho) * sphere_area(p.d) * std::pow(rho, p.d - 1);
  };
  return half_line(g, r * (q_lo - 1.0), std::isinf(q_hi) ? q_hi : r * (q_hi - 1.0));
}

/// Total mass of the 2-D ball-exit density from the start (x0, 0).
inline double planar_mass(const StableParams& p, double r, double x0) {
  auto ring = [&](double t) {
    const double rho = r + t;
    auto g = [&](double th) {
      return kernel(p, r, std::abs(x0), t, std::hypot(rho * std::cos(th) - x0, rho * std::sin(th)));
    };
    return boost::math::quadrature::trapezoidal(g, 0.0, 2.0 * std::numbers::pi, 1e-13) * rho;
  };
  return half_line(ring, 0.0, INFINITY);
}

/// Distance from (x1, x2) to the curve |y2| = y1^beta by brute-force
/// evaluation on a fine grid, including the apex plane.
inline double grid_distance(double beta, double x1, double x2, double u_max, int n) {
  double best = x1;
  int best_i = 0;
  auto dist = [&](double u) { return std::hypot(x1 - u, std::abs(x2) - std::pow(u, beta)); };
  for (int i = 0; i <= n; ++i) {
    const double u = u_max * i / n;
    const double dd = dist(u);
    if (dd < best) {
      best = dd;
      best_i = i;
    }
  }
  // local refinement around the best grid cell
  double lo = u_max * std::max(0, best_i - 1) / n, hi = u_max * std::min(n, best_i + 1) / n;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (dist(a) < dist(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::min(best, dist(0.5 * (lo + hi)));
}

}  // namespace oracle
