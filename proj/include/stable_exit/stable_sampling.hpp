#pragma once

// Samplers for the isotropic alpha-stable law with characteristic function
// E exp(i xi . X_t) = exp(-t |xi|^alpha), and the scalar variates they are
// built from. Every sampler is a pure function of the stream it consumes.

#include <span>

#include "stable_exit/geometry.hpp"
#include "stable_exit/rng.hpp"

namespace stable_exit {

struct StableParams {
  /// Throws std::invalid_argument unless 0 < alpha < 2 and 2 <= d <= kMaxDim.
  StableParams(double alpha, int d);

  double alpha;
  int d;
};

double sample_exponential(RngStream& rng) noexcept;

/// Fills `out` with independent N(0, 1) draws (Box-Muller, pairs).
void fill_standard_normals(std::span<double> out, RngStream& rng) noexcept;

/// Gamma(shape, 1) in log space, so tiny shapes do not underflow.
double sample_log_gamma(double shape, RngStream& rng);

/// Beta(a, b) as a ratio of Gammas.
double sample_beta(double a, double b, RngStream& rng);

/// Uniform direction on the unit sphere of R^d.
Point sample_unit_direction(int d, RngStream& rng);

/// Standard symmetric alpha-stable variate, E exp(i xi X) = exp(-|xi|^alpha),
/// by the Chambers-Mallows-Stuck transform.
double sample_sym_stable_1d(double alpha, RngStream& rng);

/// Positive stable variate with E exp(-lambda S) = exp(-lambda^rho),
/// 0 < rho < 1, by Kanter's representation.
double sample_positive_stable(double rho, RngStream& rng);

/// Increment X_t - X_0 of the isotropic process over time t > 0: the
/// Gaussian vector sqrt(2 S) Z subordinated by an (alpha/2)-stable S.
Point sample_isotropic_increment(const StableParams& params, double t, RngStream& rng);

}  // namespace stable_exit
