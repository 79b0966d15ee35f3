#include "stable_exit/estimators.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stable_exit/parallel.hpp"

namespace stable_exit {

namespace {

void check_parameters(int d, double alpha, double beta) {
  if (d < 2) {
    throw std::invalid_argument("d must be at least 2 (got " + std::to_string(d) + ")");
  }
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("alpha must lie in (0, 2) (got " + std::to_string(alpha) + ")");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1) (got " + std::to_string(beta) + ")");
  }
}

double sphere_area(int k) {  // |S^k| in R^{k+1}
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

double critical_exponent(int d, double alpha, double beta) {
  check_parameters(d, alpha, beta);
  return ((d - 1) * (1.0 - beta) + alpha) / (alpha * beta);
}

double lemma2_bound(double s, double u, double v, double alpha, double beta, int d) {
  check_parameters(d, alpha, beta);
  if (!(s >= 1.0)) throw std::invalid_argument("lemma2_bound: requires s >= 1");
  if (!(v >= u)) throw std::invalid_argument("lemma2_bound: requires u <= v");
  const double edge = s + std::pow(s, beta);
  const bool far_slice = u >= edge;
  const bool adjacent_slice = u == s && v >= edge;
  if (!far_slice && !adjacent_slice) {
    throw std::invalid_argument(
        "lemma2_bound: requires u >= s + s^beta, or u = s and v >= s + s^beta");
  }
  const double q = alpha * beta * critical_exponent(d, alpha, beta);
  const double tail_v = std::isinf(v) ? 0.0 : std::pow(v, -q);
  return std::pow(s, alpha * beta) * (std::pow(u, -q) - tail_v) / q;
}

double cylinder_bound_integral(double s, double u, double v, const Point& x, double alpha,
                               double beta) {
  const int d = x.dim();
  check_parameters(d, alpha, beta);
  if (!(u >= s) || !(v > u)) throw std::invalid_argument("cylinder_bound_integral: need s <= u < v");
  const double sab = std::pow(s, alpha * beta);
  const double xt = x.transverse_norm();
  const double power = -0.5 * (d + alpha);

  // Integral over the transverse disc of |z - x|^{-d-alpha} at axial z1.
  auto transverse = [&](double z1) {
    const double dz1 = z1 - x.x1();
    const double rad = std::pow(z1, beta);
    using boost::math::quadrature::gauss_kronrod;
    if (d == 2) {
      auto f = [&](double z2) { return std::pow(dz1 * dz1 + (z2 - xt) * (z2 - xt), power); };
      return gauss_kronrod<double, 61>::integrate(f, -rad, rad, 8, 1e-10);
    }
    const double shell = sphere_area(d - 3);
    auto radial = [&](double rho) {
      if (xt == 0.0) {
        return sphere_area(d - 2) * std::pow(rho, d - 2) *
               std::pow(dz1 * dz1 + rho * rho, power);
      }
      auto angular = [&](double theta) {
        const double r2 = dz1 * dz1 + rho * rho + xt * xt - 2.0 * rho * xt * std::cos(theta);
        return std::pow(std::sin(theta), d - 3) * std::pow(r2, power);
      };
      return shell * std::pow(rho, d - 2) *
             gauss_kronrod<double, 31>::integrate(angular, 0.0, std::numbers::pi, 6, 1e-10);
    };
    return gauss_kronrod<double, 31>::integrate(radial, 0.0, rad, 6, 1e-10);
  };

  auto axial = [&](double z1) {
    const double gap = z1 - s;
    const double boost_factor = gap > 0.0 ? std::sqrt(sab) * std::pow(gap, -0.5 * alpha) :
                                            std::numeric_limits<double>::infinity();
    return sab * std::max(boost_factor, 1.0) * transverse(z1);
  };

  // Split at the kink where the bracket switches to 1.
  const double kink = s + std::pow(s, beta);
  std::vector<double> cuts{u};
  if (kink > u && kink < v) cuts.push_back(kink);
  double total = 0.0;
  boost::math::quadrature::tanh_sinh<double> finite;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = i + 1 < cuts.size() ? cuts[i + 1] : v;
    if (std::isinf(hi)) {
      boost::math::quadrature::exp_sinh<double> half_line;
      total += half_line.integrate([&](double t) { return axial(lo + t); }, 1e-9);
    } else {
      total += finite.integrate(axial, lo, hi, 1e-9);
    }
  }
  return total;
}

std::vector<ProbabilityEstimate> exit_probabilities(const Domain& domain,
                                                    std::span<const RegionSlice> targets,
                                                    const Point& x0, const StableParams& params,
                                                    const StreamRange& streams,
                                                    const WalkOptions& options) {
  if (streams.count == 0) throw std::invalid_argument("exit_probability: N must be positive");
  if (targets.size() > 30) throw std::invalid_argument("exit_probability: at most 30 targets");
  // Bit t of hit_mask[i] marks walk i landing in target t; the top bit marks
  // a walk cut off at max_steps.
  constexpr std::uint32_t kStuck = 1u << 31;
  std::vector<std::uint32_t> hit_mask(streams.count);
  std::vector<std::int64_t> steps(streams.count);
  parallel_chunks(streams.count, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng = streams.stream(i);
      const WalkResult walk =
          walk_on_balls(domain, x0, params, rng, options.gamma, options.max_steps);
      steps[i] = walk.steps;
      if (walk.status == WalkStatus::MaxStepsExceeded) {
        hit_mask[i] = kStuck;
        continue;
      }
      std::uint32_t mask = 0;
      for (std::size_t t = 0; t < targets.size(); ++t) {
        if (slice_contains(targets[t], walk.exit_point)) mask |= 1u << t;
      }
      hit_mask[i] = mask;
    }
  });

  std::vector<ProbabilityEstimate> out(targets.size());
  std::uint64_t stuck = 0;
  std::int64_t total_steps = 0;
  for (std::size_t i = 0; i < hit_mask.size(); ++i) {
    total_steps += steps[i];
    if (hit_mask[i] == kStuck) {
      ++stuck;
      continue;
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (hit_mask[i] & (1u << t)) ++out[t].hits;
    }
  }
  const std::uint64_t completed = streams.count - stuck;
  if (completed == 0) throw std::runtime_error("exit_probability: every walk exceeded max_steps");
  for (auto& est : out) {
    est.n = completed;
    est.max_steps_exceeded = stuck;
    est.estimate = static_cast<double>(est.hits) / static_cast<double>(est.n);
    const Interval ci = clopper_pearson(est.hits, est.n);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    est.mean_steps = static_cast<double>(total_steps) / static_cast<double>(streams.count);
  }
  return out;
}

ProbabilityEstimate exit_probability(const Domain& domain, const RegionSlice& target,
                                     const Point& x0, const StableParams& params,
                                     const StreamRange& streams, const WalkOptions& options) {
  return exit_probabilities(domain, std::span<const RegionSlice>(&target, 1), x0, params,
                            streams, options)
      .front();
}

ProbabilityEstimate harmonic_escape_probability(const ParabolaRegion& region, double s,
                                                const Point& x0, const StableParams& params,
                                                const StreamRange& streams,
                                                const WalkOptions& options) {
  if (!(x0.x1() <= 0.5 * s)) {
    throw std::invalid_argument("harmonic_escape_probability: start must satisfy x1 <= s/2");
  }
  const RegionSlice cutoff(region, 0.0, s);
  // Exits of P^{0,s} that stay in P necessarily land in P^{s,inf}.
  const RegionSlice beyond(region, s, std::numeric_limits<double>::infinity());
  return exit_probability(Domain{cutoff}, beyond, x0, params, streams, options);
}

ExponentFit fit_log_log_exponent(std::span<const ScalePoint> points, double predicted,
                                 double confidence) {
  if (points.size() < 3) throw std::invalid_argument("fit_log_log_exponent: need >= 3 points");
  const double z = normal_two_sided_quantile(confidence);
  std::vector<double> lx, ly, w;
  for (const auto& p : points) {
    if (!(p.estimate > 0.0) || !(p.scale > 0.0)) {
      throw std::invalid_argument("fit_log_log_exponent: estimates and scales must be positive");
    }
    const double sigma = (p.ci_hi - p.ci_lo) / (2.0 * z * p.estimate);
    if (!(sigma > 0.0)) throw std::invalid_argument("fit_log_log_exponent: degenerate interval");
    lx.push_back(std::log(p.scale));
    ly.push_back(std::log(p.estimate));
    w.push_back(1.0 / (sigma * sigma));
  }
  const LinearFit lf = linear_fit(lx, ly, w);
  ExponentFit fit;
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.stderr = lf.slope_stderr;
  fit.predicted = predicted;
  fit.n_points = static_cast<int>(points.size());
  fit.window = {points.front().scale, points.back().scale};
  fit.chi2_per_dof = lf.chi2 / static_cast<double>(points.size() - 2);
  return fit;
}

std::uint64_t default_hill_k(std::uint64_t n) {
  const auto k = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(n), 0.6)));
  return std::max<std::uint64_t>(1, std::min(k, n / 10));
}

double tail_window_end(std::span<const double> uncensored, std::uint64_t min_exceedances) {
  if (uncensored.size() <= min_exceedances) {
    throw std::invalid_argument("tail_window_end: fewer samples than required exceedances");
  }
  std::vector<double> sorted(uncensored.begin(), uncensored.end());
  const auto nth = sorted.end() - static_cast<std::ptrdiff_t>(min_exceedances) - 1;
  std::nth_element(sorted.begin(), nth, sorted.end());
  // Exactly min_exceedances values lie strictly above unless ties remain.
  return *nth;
}

TailIndexFit fit_tail_index(std::span<const double> uncensored, std::uint64_t censored_count,
                            double t_max, std::uint64_t k, double t_lo, double t_hi,
                            double predicted, std::uint64_t bootstrap_seed) {
  const std::uint64_t m = uncensored.size();
  const std::uint64_t n = m + censored_count;
  if (k == 0 || k >= m) throw std::invalid_argument("fit_tail_index: k must lie in [1, uncensored)");
  if (censored_count >= k) {
    throw std::invalid_argument("fit_tail_index: censored walks fill the top-k order statistics");
  }
  std::vector<double> sorted(uncensored.begin(), uncensored.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (sorted.front() > t_max) throw std::invalid_argument("fit_tail_index: exit time beyond t_max");

  TailIndexFit out;
  out.k = k;

  // Hill on the combined top-k; censored walks sit at t_max above every exit
  // and the estimate is corrected by the uncensored share of the top k.
  {
    const std::uint64_t top_uncensored = k - censored_count;
    const double threshold = sorted[top_uncensored];
    double sum = static_cast<double>(censored_count) * std::log(t_max / threshold);
    for (std::uint64_t i = 0; i < top_uncensored; ++i) sum += std::log(sorted[i] / threshold);
    const double share = static_cast<double>(top_uncensored) / static_cast<double>(k);
    const double gamma = sum / static_cast<double>(k) / share;
    out.hill.slope = 1.0 / gamma;
    out.hill.stderr = out.hill.slope / std::sqrt(static_cast<double>(top_uncensored));
    out.hill.window = {threshold, t_max};
    out.hill.predicted = predicted;
    out.hill.n_points = static_cast<int>(k);
  }

  // Survival regression on a log-spaced grid of the window.
  if (!(t_lo > 0.0 && t_hi > t_lo && t_hi <= t_max)) {
    throw std::invalid_argument("fit_tail_index: need 0 < t_lo < t_hi <= t_max");
  }
  constexpr int kGrid = 16;
  std::vector<double> grid(kGrid), lx(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    lx[i] = std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * i / (kGrid - 1);
    grid[i] = std::exp(lx[i]);
  }
  // exceedances of t_lo, ascending
  std::vector<double> tail;
  for (double t : sorted) {
    if (t <= t_lo) break;
    tail.push_back(t);
  }
  std::reverse(tail.begin(), tail.end());

  auto regress = [&](const std::vector<double>& exceed, std::uint64_t alive_beyond_max,
                     std::uint64_t total, LinearFit* fit_out) {
    std::vector<double> ly(kGrid), w(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      const auto dead = static_cast<std::uint64_t>(
          std::upper_bound(exceed.begin(), exceed.end(), grid[i]) - exceed.begin());
      const std::uint64_t alive = exceed.size() - dead + alive_beyond_max;
      if (alive == 0) return false;
      const double surv = static_cast<double>(alive) / static_cast<double>(total);
      ly[i] = std::log(surv);
      w[i] = static_cast<double>(alive) / (1.0 - surv);
    }
    *fit_out = linear_fit(lx, ly, w);
    return true;
  };

  LinearFit base;
  if (!regress(tail, censored_count, n, &base)) {
    throw std::invalid_argument("fit_tail_index: window end has no surviving walks");
  }

  // Bootstrap standard error: survival values at different grid times share
  // their walks, so the per-point binomial weights understate the spread.
  constexpr int kBootstrap = 200;
  RngStream rng(bootstrap_seed, 0x7a11'0000'0000'0000ULL);
  const std::uint64_t pool = tail.size() + censored_count;
  const double p_pool = static_cast<double>(pool) / static_cast<double>(n);
  std::vector<double> slopes;
  std::vector<double> resampled;
  for (int b = 0; b < kBootstrap; ++b) {
    double z[1];
    fill_standard_normals(z, rng);
    const double drawn = std::round(static_cast<double>(pool) +
                                    std::sqrt(static_cast<double>(n) * p_pool * (1.0 - p_pool)) *
                                        z[0]);
    const auto count = static_cast<std::uint64_t>(std::max(0.0, drawn));
    resampled.clear();
    std::uint64_t censored_draws = 0;
    for (std::uint64_t j = 0; j < count; ++j) {
      const std::uint64_t idx = rng() % pool;
      if (idx < tail.size()) {
        resampled.push_back(tail[idx]);
      } else {
        ++censored_draws;
      }
    }
    std::sort(resampled.begin(), resampled.end());
    LinearFit lf;
    if (regress(resampled, censored_draws, n, &lf)) slopes.push_back(lf.slope);
  }
  double mean = 0.0;
  for (double sl : slopes) mean += sl;
  mean /= static_cast<double>(std::max<std::size_t>(slopes.size(), 1));
  double var = 0.0;
  for (double sl : slopes) var += (sl - mean) * (sl - mean);
  var /= static_cast<double>(std::max<std::size_t>(slopes.size(), 2) - 1);

  out.regression.slope = base.slope;
  out.regression.intercept = base.intercept;
  out.regression.stderr = std::sqrt(var);
  out.regression.window = {t_lo, t_hi};
  out.regression.predicted = -predicted;
  out.regression.n_points = kGrid;
  out.regression.chi2_per_dof = base.chi2 / (kGrid - 2);
  return out;
}

CylinderDecayFit fit_cylinder_decay(const SurvivalCurve& curve, double t_lo, double t_hi) {
  if (curve.times.empty() || t_lo < curve.times.front() || t_hi > curve.times.back() ||
      !(t_hi > t_lo)) {
    throw std::invalid_argument("fit_cylinder_decay: window must lie within the time grid");
  }
  std::vector<double> t, ly;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] < t_lo || curve.times[i] > t_hi) continue;
    if (!(curve.survival[i] > 0.0)) {
      throw std::invalid_argument("fit_cylinder_decay: zero survival inside the window");
    }
    t.push_back(curve.times[i]);
    ly.push_back(std::log(curve.survival[i]));
  }
  if (t.size() < 3) throw std::invalid_argument("fit_cylinder_decay: need >= 3 grid points");
  const LinearFit lf = linear_fit(t, ly);
  CylinderDecayFit fit;
  fit.lambda_hat = -lf.slope;
  fit.stderr = lf.slope_stderr;
  fit.window = {t_lo, t_hi};
  fit.r_squared = lf.r_squared;
  fit.asymptotic = lf.r_squared > 0.99;
  if (!(fit.lambda_hat > 0.0)) throw std::runtime_error("fit_cylinder_decay: survival not decaying");
  return fit;
}

MomentEstimate moment_estimate(std::span<const double> uncensored, double censored_fraction,
                               double p, std::uint64_t min_blocks) {
  if (!(p >= 0.0)) throw std::invalid_argument("moment_estimate: p must be nonnegative");
  MomentEstimate out;
  out.censored_fraction = censored_fraction;
  const std::size_t n = uncensored.size();
  if (n == 0) return out;

  std::vector<double> powered(n);
  for (std::size_t i = 0; i < n; ++i) powered[i] = std::pow(uncensored[i], p);

  double half_sum = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += powered[i];
    if (i + 1 == n / 2) half_sum = sum;
  }
  out.estimate = sum / static_cast<double>(n);
  if (n >= 2) {
    const double half_mean = half_sum / static_cast<double>(n / 2);
    out.stability = std::abs(out.estimate - half_mean) / out.estimate;
  }

  for (std::uint64_t size = 16; n / size >= min_blocks; size *= 2) {
    const std::size_t blocks = n / size;
    std::vector<double> means(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      double acc = 0.0;
      for (std::size_t i = b * size; i < (b + 1) * size; ++i) acc += powered[i];
      means[b] = acc / static_cast<double>(size);
    }
    out.block_sizes.push_back(size);
    out.block_medians.push_back(median(std::move(means)));
  }
  out.increasing_at_every_doubling = out.block_medians.size() >= 2;
  for (std::size_t i = 1; i < out.block_medians.size(); ++i) {
    if (!(out.block_medians[i] > out.block_medians[i - 1])) out.increasing_at_every_doubling = false;
  }
  return out;
}

}  // namespace stable_exit
