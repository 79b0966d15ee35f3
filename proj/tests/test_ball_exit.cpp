#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "stable_exit/ball_exit.hpp"

using namespace stable_exit;
using std::numbers::pi;

TEST_CASE("kernel constant") {
  CHECK(poisson_constant(2, 1.0) == doctest::Approx(1.0 / (pi * pi)).epsilon(1e-14));
  CHECK(poisson_constant(3, 1.0) == doctest::Approx(1.0 / (2 * pi * pi)).epsilon(1e-14));
  CHECK(poisson_constant(2, 1e-9) < 1e-8);
}

TEST_CASE("kernel values") {
  const StableParams p(1.0, 2);
  const Point origin(2);
  CHECK(poisson_density(1.0, origin, Point(2, {0}), p) ==
        doctest::Approx(1.0 / (pi * pi) * std::sqrt(1.0 / 3.0) / 4.0).epsilon(1e-12));
  CHECK(poisson_density(1.0, origin, Point(0.9, {0}), p) == 0.0);
  CHECK(poisson_density(1.0, origin, Point(0, {2}), p) ==
        doctest::Approx(poisson_density(1.0, origin, Point(std::sqrt(2.0), {std::sqrt(2.0)}), p)));
}

TEST_CASE("kernel matches the reference formula") {
  RngStream rng(20, 0);
  for (int d : {2, 3}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const StableParams p(alpha, d);
      for (int i = 0; i < 200; ++i) {
        const double r = 0.5 + 2.0 * rng.uniform();
        const Point x = (0.9 * r * rng.uniform()) * sample_unit_direction(d, rng);
        const double t = r * (1e-3 + 10.0 * rng.uniform());
        const Point y = (r + t) * sample_unit_direction(d, rng);
        CHECK(poisson_density(r, x, y, p) ==
              doctest::Approx(oracle::kernel(p, r, x.norm(), t, distance(y, x))).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("kernel integrates to one") {
  for (int d : {2, 3}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const StableParams p(alpha, d);
      CHECK(oracle::radial_mass(p, 1.7, 1.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  for (double alpha : {0.5, 1.0, 1.5}) {
    const StableParams p(alpha, 2);
    CHECK(oracle::planar_mass(p, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("radial CDF agrees with quadrature") {
  for (int d : {2, 3}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const StableParams p(alpha, d);
      for (double q : {1.01, 1.3, 2.0, 5.0}) {
        CHECK(ball_exit_radial_cdf(q, alpha) ==
              doctest::Approx(oracle::radial_mass(p, 1.0, 1.0, q)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("sampled exit positions") {
  const StableParams p(1.0, 2);
  RngStream rng(21, 0);
  const int n = 1000000;
  int far = 0;
  Point sum(2);
  for (int i = 0; i < n; ++i) {
    const Point y = sample_ball_exit(1.0, p, rng);
    REQUIRE(y.norm() > 1.0);
    far += y.norm() > 2.0;
    sum += (1.0 / y.norm()) * y;
  }
  const double want = oracle::radial_mass(p, 1.0, 2.0, INFINITY);
  CHECK(std::abs(static_cast<double>(far) / n - want) < 3.0 / std::sqrt(n));
  CHECK(std::abs(sum[0] / n) < 3.0 / std::sqrt(n));
  CHECK(std::abs(sum[1] / n) < 3.0 / std::sqrt(n));
  CHECK_THROWS_AS(sample_ball_exit(0.0, p, rng), std::invalid_argument);
}

TEST_CASE("mean exit time of a ball") {
  const StableParams p(1.0, 2);
  CHECK(mean_exit_time_ball(1.0, 0.0, p) == doctest::Approx(2.0 / pi).epsilon(1e-12));
  CHECK(mean_exit_time_constant(2, 1.0) == doctest::Approx(2.0 / pi).epsilon(1e-12));
  const StableParams q(1.4, 3);
  CHECK(mean_exit_time_ball(3.0, 0.0, q) / mean_exit_time_ball(1.0, 0.0, q) ==
        doctest::Approx(std::pow(3.0, 1.4)).epsilon(1e-13));
  CHECK(mean_exit_time_ball(1.0, 1.0 - 1e-9, p) < 1e-4);
  CHECK_THROWS_AS(mean_exit_time_ball(1.0, 1.0, p), std::invalid_argument);
}
