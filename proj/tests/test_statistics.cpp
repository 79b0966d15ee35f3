#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stable_exit/parallel.hpp"
#include "stable_exit/statistics.hpp"

using namespace stable_exit;

TEST_CASE("Clopper-Pearson interval") {
  const Interval ci = clopper_pearson(20, 100);
  // the endpoints are where the binomial tail probabilities equal 0.005
  using boost::math::binomial;
  CHECK(boost::math::cdf(boost::math::complement(binomial(100, ci.lo), 19)) ==
        doctest::Approx(0.005).epsilon(1e-6));
  CHECK(boost::math::cdf(binomial(100, ci.hi), 20) == doctest::Approx(0.005).epsilon(1e-6));
  CHECK(clopper_pearson(0, 50).lo == 0.0);
  CHECK(clopper_pearson(50, 50).hi == 1.0);
  CHECK_THROWS(clopper_pearson(3, 2));
  CHECK_THROWS(clopper_pearson(0, 0));
}

TEST_CASE("normal quantile") {
  CHECK(normal_two_sided_quantile(0.95) == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK(normal_two_sided_quantile(0.99) == doctest::Approx(2.575829304).epsilon(1e-9));
}

TEST_CASE("linear fits") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const std::vector<double> w{1, 1, 1, 1};
  CHECK(linear_fit(x, y, w).slope_stderr == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK_THROWS(linear_fit(std::vector<double>{1}, std::vector<double>{1}));
  CHECK_THROWS(linear_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}));
}

TEST_CASE("KS statistic") {
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2, 3}, {4, 5, 6}) == 1.0);
  CHECK(ks_two_sample({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
}

TEST_CASE("parallel chunks cover every index once and propagate errors") {
  for (int workers : {1, 3, 8}) {
    std::vector<int> hit(10000, 0);
    parallel_chunks(hit.size(), workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hit[i];
    });
    for (int h : hit) REQUIRE(h == 1);
    CHECK_THROWS_AS(parallel_chunks(5000, workers,
                                    [&](std::size_t b, std::size_t) {
                                      if (b >= 2048) throw std::runtime_error("boom");
                                    }),
                    std::runtime_error);
  }
}
