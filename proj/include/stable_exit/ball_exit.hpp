#pragma once

// Harmonic measure of a ball for the isotropic stable process: the Poisson
// kernel, an exact sampler for exits from the centre, and the mean exit
// time used for time accumulation along walk-on-balls paths.

#include "stable_exit/geometry.hpp"
#include "stable_exit/rng.hpp"
#include "stable_exit/stable_sampling.hpp"

namespace stable_exit {

/// Gamma(d/2) pi^{-d/2-1} sin(pi alpha/2).
double poisson_constant(int d, double alpha);

/// Density at y of the exit position from B(0, r) started at x, |x| < r.
/// Zero for |y| <= r.
double poisson_density(double r, const Point& x, const Point& y, const StableParams& params);

/// P(|Y| <= q r) for the exit position Y from B(0, r) started at the
/// centre, q >= 1. Closed form through the regularized incomplete Beta.
double ball_exit_radial_cdf(double q, double alpha);

/// Exit displacement from the centre of a ball of the given radius. The
/// radius of the result is radius * V^{-1/2}, V ~ Beta(alpha/2, 1 - alpha/2),
/// and its direction is uniform.
Point sample_ball_exit(double radius, const StableParams& params, RngStream& rng);

/// kappa(d, alpha) = Gamma(d/2) / (2^alpha Gamma(1 + alpha/2) Gamma((d + alpha)/2)).
double mean_exit_time_constant(int d, double alpha);

/// E tau for the ball B(0, radius) started at distance start_offset from
/// the centre: kappa (radius^2 - start_offset^2)^{alpha/2}.
double mean_exit_time_ball(double radius, double start_offset, const StableParams& params);

}  // namespace stable_exit
