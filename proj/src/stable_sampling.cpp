#include "stable_exit/stable_sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stable_exit {

StableParams::StableParams(double alpha_, int d_) : alpha(alpha_), d(d_) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("alpha must lie in (0, 2), got " + std::to_string(alpha));
  }
  if (d < 2 || d > kMaxDim) {
    throw std::invalid_argument("dimension d must lie in [2, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(d));
  }
}

double sample_exponential(RngStream& rng) noexcept { return -std::log(rng.uniform_open()); }

void fill_standard_normals(std::span<double> out, RngStream& rng) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const double radius = std::sqrt(-2.0 * std::log(rng.uniform_open()));
    const double angle = kTwoPi * rng.uniform();
    out[i] = radius * std::cos(angle);
    if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
  }
}

namespace {

// Marsaglia-Tsang for shape >= 1, returns log of the draw.
double log_gamma_large_shape(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  std::array<double, 2> z{};
  for (;;) {
    fill_standard_normals(std::span<double>(z.data(), 1), rng);
    const double v0 = 1.0 + c * z[0];
    if (v0 <= 0.0) continue;
    const double v = v0 * v0 * v0;
    const double u = rng.uniform_open();
    const double x2 = z[0] * z[0];
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v);
    }
  }
}

}  // namespace

double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape >= 1.0) return log_gamma_large_shape(shape, rng);
  // G(shape) = G(shape + 1) * U^{1/shape}
  const double base = log_gamma_large_shape(shape + 1.0, rng);
  return base + std::log(rng.uniform_open()) / shape;
}

double sample_beta(double a, double b, RngStream& rng) {
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  return 1.0 / (1.0 + std::exp(lb - la));
}

Point sample_unit_direction(int d, RngStream& rng) {
  std::array<double, kMaxDim> z{};
  Point dir(d);
  for (;;) {
    fill_standard_normals(std::span<double>(z.data(), static_cast<std::size_t>(d)), rng);
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += z[i] * z[i];
    if (norm2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < d; ++i) dir[i] = z[i] * inv;
    return dir;
  }
}

double sample_sym_stable_1d(double alpha, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("sample_sym_stable_1d: alpha must lie in (0, 2)");
  }
  const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
  if (alpha == 1.0) return std::tan(v);
  const double w = sample_exponential(rng);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double rho, RngStream& rng) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("sample_positive_stable: rho must lie in (0, 1)");
  }
  const double u = std::numbers::pi * rng.uniform_open();
  const double e = sample_exponential(rng);
  // Computed in logs; the factors overflow separately for small rho.
  const double log_s = std::log(std::sin(rho * u)) - std::log(std::sin(u)) / rho +
                       (1.0 - rho) / rho * (std::log(std::sin((1.0 - rho) * u)) - std::log(e));
  return std::exp(log_s);
}

Point sample_isotropic_increment(const StableParams& params, double t, RngStream& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_isotropic_increment: t must be positive");
  const double s = sample_positive_stable(0.5 * params.alpha, rng);
  const double scale = std::pow(t, 1.0 / params.alpha) * std::sqrt(2.0 * s);
  std::array<double, kMaxDim> z{};
  fill_standard_normals(std::span<double>(z.data(), static_cast<std::size_t>(params.d)), rng);
  Point step(params.d);
  for (int i = 0; i < params.d; ++i) step[i] = scale * z[i];
  return step;
}

}  // namespace stable_exit
