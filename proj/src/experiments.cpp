#include "stable_exit/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stable_exit/ball_exit.hpp"
#include "stable_exit/parallel.hpp"
#include "stable_exit/walkers.hpp"

namespace stable_exit {

using nlohmann::json;

namespace {

constexpr int kStreamBlockShift = 40;

StreamRange block(std::uint64_t seed, std::uint64_t index, std::uint64_t count) {
  return {seed, index << kStreamBlockShift, count};
}

json stream_json(const std::string& label, const StreamRange& r) {
  return {{"label", label}, {"seed", r.seed}, {"first_stream", r.first_stream}, {"count", r.count}};
}

json fit_json(const ExponentFit& f) {
  return {{"slope", f.slope},
          {"stderr", f.stderr},
          {"window", {f.window.first, f.window.second}},
          {"predicted", f.predicted},
          {"n_points", f.n_points},
          {"intercept", f.intercept},
          {"chi2_per_dof", f.chi2_per_dof}};
}

ExponentFit fit_from_json(const json& j) {
  ExponentFit f;
  f.slope = j.at("slope").get<double>();
  f.stderr = j.at("stderr").get<double>();
  f.window = {j.at("window").at(0).get<double>(), j.at("window").at(1).get<double>()};
  f.predicted = j.at("predicted").get<double>();
  f.n_points = j.at("n_points").get<int>();
  f.intercept = j.at("intercept").get<double>();
  f.chi2_per_dof = j.at("chi2_per_dof").get<double>();
  return f;
}

json estimate_json(const ProbabilityEstimate& e) {
  return {{"estimate", e.estimate}, {"ci_lo", e.ci_lo},     {"ci_hi", e.ci_hi},
          {"hits", e.hits},         {"n", e.n},             {"max_steps_exceeded", e.max_steps_exceeded},
          {"mean_steps", e.mean_steps}};
}

CurveRow row_from(double scale, const ProbabilityEstimate& e) {
  return {scale, e.estimate, e.ci_lo, e.ci_hi, e.n};
}

template <class T>
T field(const json& j, const char* name, T fallback) {
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + name + "': " + e.what());
  }
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "harmonic_decay") return ExperimentKind::HarmonicDecay;
  if (s == "tail_index") return ExperimentKind::TailIndex;
  if (s == "survival") return ExperimentKind::Survival;
  if (s == "scaling_check") return ExperimentKind::ScalingCheck;
  if (s == "bound_check") return ExperimentKind::BoundCheck;
  throw ConfigError("field 'kind': unknown experiment kind '" + s + "'");
}

Point start_point(const ExperimentConfig& c, double scale) {
  if (c.start_fraction) return Point::axial(c.d, *c.start_fraction * scale);
  Point x(c.d);
  for (int i = 0; i < c.d; ++i) x[i] = c.start[static_cast<std::size_t>(i)];
  return x;
}

void require_ascending(const std::vector<double>& v, const char* name, bool nonempty) {
  if (nonempty && v.empty()) throw ConfigError(std::string("field '") + name + "' must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ConfigError(std::string("field '") + name + "' must hold positive finite values");
    }
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw ConfigError(std::string("field '") + name + "' must be strictly ascending");
    }
  }
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

// ---------------------------------------------------------------------------

json run_harmonic_decay(const ExperimentConfig& c, RunRecord& rec) {
  const ParabolaRegion region(c.beta, c.d, c.a);
  const StableParams params(c.alpha, c.d);
  const WalkOptions opts{c.gamma, c.max_steps, c.workers};
  const Predictions pred = predict(c.d, c.alpha, c.beta);
  const double predicted =
      c.start_fraction ? -pred.alpha_beta_p0_minus_1 : -pred.alpha_beta_p0;

  json points = json::array();
  json streams = json::array();
  std::vector<ScalePoint> fit_points;
  std::uint64_t stuck = 0;
  for (std::size_t i = 0; i < c.scales.size(); ++i) {
    const double s = c.scales[i];
    const StreamRange range = block(c.seed, i, c.n);
    const auto est =
        harmonic_escape_probability(region, s, start_point(c, s), params, range, opts);
    stuck += est.max_steps_exceeded;
    json p = estimate_json(est);
    p["scale"] = s;
    points.push_back(p);
    streams.push_back(stream_json("scale " + std::to_string(i), range));
    rec.rows.push_back(row_from(s, est));
    if (est.hits > 0) fit_points.push_back({s, est.estimate, est.ci_lo, est.ci_hi});
  }

  json out{{"points", points}, {"streams", streams}, {"max_steps_exceeded", stuck}};
  if (fit_points.size() == c.scales.size() && fit_points.size() >= 3) {
    rec.fit = fit_log_log_exponent(fit_points, predicted);
    out["fit"] = fit_json(*rec.fit);
  } else {
    out["fit"] = nullptr;
    out["fit_error"] = "a scale point has no hits or fewer than three scales";
  }
  return out;
}

json run_tail_index(const ExperimentConfig& c, RunRecord& rec) {
  const ParabolaRegion region(c.beta, c.d, c.a);
  const StableParams params(c.alpha, c.d);
  const double p0 = critical_exponent(c.d, c.alpha, c.beta);
  const Point x0 = start_point(c, 0.0);
  const StreamRange main_range = block(c.seed, 0, c.n);
  const auto samples = simulate_exit_times(region, x0, params, c.h, c.t_max, main_range, c.workers);

  std::vector<double> uncensored;
  std::uint64_t censored = 0;
  for (const auto& s : samples) {
    if (s.censored) {
      ++censored;
    } else {
      uncensored.push_back(s.time);
    }
  }
  const double censored_fraction = static_cast<double>(censored) / static_cast<double>(c.n);
  if (uncensored.size() <= c.min_exceedances) {
    throw std::runtime_error("tail_index: too few uncensored exits for the tail window");
  }
  std::vector<double> sorted = uncensored;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint64_t i = 0; i < censored; ++i) sorted.push_back(c.t_max);
  const double t_lo = sorted_quantile(sorted, c.tail_quantile);
  const double t_hi = tail_window_end(uncensored, c.min_exceedances);
  if (!(t_hi > t_lo)) throw std::runtime_error("tail_index: empty tail window; increase n");

  const TailIndexFit tail =
      fit_tail_index(uncensored, censored, c.t_max, default_hill_k(c.n), t_lo, t_hi, p0, c.seed);
  rec.fit = tail.regression;

  std::vector<double> grid = c.time_grid;
  if (grid.empty()) {
    for (double t = std::max(c.h, 0.125); t <= t_hi * 1.0000001; t *= std::sqrt(2.0)) grid.push_back(t);
  }
  const SurvivalCurve curve = survival_from_samples(samples, grid, c.t_max);
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    rec.rows.push_back({curve.times[i], curve.survival[i], curve.ci_lo[i], curve.ci_hi[i], curve.n});
  }

  json moments = json::array();
  for (double p : c.moments) {
    const MomentEstimate m = moment_estimate(uncensored, censored_fraction, p);
    moments.push_back({{"p", p},
                       {"estimate", m.estimate},
                       {"stability", m.stability},
                       {"censored_fraction", m.censored_fraction},
                       {"block_sizes", m.block_sizes},
                       {"block_medians", m.block_medians},
                       {"increasing_at_every_doubling", m.increasing_at_every_doubling},
                       {"convergent_regime", p < p0}});
  }

  json streams = json::array({stream_json("main", main_range)});
  json out{{"n", c.n},
           {"censored", censored},
           {"censored_fraction", censored_fraction},
           {"hill", fit_json(tail.hill)},
           {"hill_k", tail.k},
           {"regression", fit_json(tail.regression)},
           {"tail_window", {t_lo, t_hi}},
           {"moments", moments}};

  if (c.halving_n > 0) {
    const StreamRange range = block(c.seed, 1, c.halving_n);
    streams.push_back(stream_json("step halving", range));
    std::vector<ExitTimeSample> fine(range.count), coarse(range.count);
    parallel_chunks(range.count, c.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        RngStream rng = range.stream(i);
        const auto pair = euler_exit_time_coupled(region, x0, params, c.h, c.t_max, rng);
        fine[i] = pair.fine;
        coarse[i] = pair.coarse;
      }
    });
    auto slope = [&](const std::vector<ExitTimeSample>& s) {
      std::vector<double> t;
      std::uint64_t cens = 0;
      for (const auto& x : s) {
        if (x.censored) {
          ++cens;
        } else {
          t.push_back(x.time);
        }
      }
      return fit_tail_index(t, cens, c.t_max, default_hill_k(range.count), t_lo, t_hi, p0, c.seed)
          .regression.slope;
    };
    const double coarse_slope = slope(coarse);
    const double fine_slope = slope(fine);
    const double shift = std::abs(fine_slope - coarse_slope);
    out["step_halving"] = {{"n", range.count},
                           {"h_coarse", c.h},
                           {"h_fine", 0.5 * c.h},
                           {"slope_coarse", coarse_slope},
                           {"slope_fine", fine_slope},
                           {"shift", shift},
                           {"reference_stderr", tail.regression.stderr},
                           {"within_stderr", shift < tail.regression.stderr}};
  }
  out["streams"] = streams;
  return out;
}

json run_survival(const ExperimentConfig& c, RunRecord& rec) {
  const StableParams params(c.alpha, c.d);
  const ParabolaRegion region(c.beta, c.d, c.a);
  std::vector<std::pair<double, Domain>> domains;
  if (c.domain == "cylinder") {
    for (double s : c.scales) domains.emplace_back(s, Domain{Cylinder(s, c.beta, c.d)});
  } else {
    domains.emplace_back(0.0, Domain{region});
  }
  json curves = json::array();
  json streams = json::array();
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const StreamRange range = block(c.seed, i, c.n);
    streams.push_back(stream_json("curve " + std::to_string(i), range));
    const SurvivalCurve curve = survival_curve(domains[i].second, start_point(c, 0.0), params, c.h,
                                               c.time_grid, c.t_max, range, c.workers);
    json cj{{"scale", domains[i].first},   {"times", curve.times},
            {"survival", curve.survival},  {"ci_lo", curve.ci_lo},
            {"ci_hi", curve.ci_hi},        {"n", curve.n},
            {"censored_fraction", curve.censored_fraction}};
    if (c.decay_window) {
      const auto fit = fit_cylinder_decay(curve, c.decay_window->first, c.decay_window->second);
      cj["decay"] = {{"lambda_hat", fit.lambda_hat},
                     {"stderr", fit.stderr},
                     {"window", {fit.window.first, fit.window.second}},
                     {"r_squared", fit.r_squared},
                     {"asymptotic", fit.asymptotic}};
    }
    curves.push_back(cj);
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
      rec.rows.push_back({curve.times[k], curve.survival[k], curve.ci_lo[k], curve.ci_hi[k], curve.n});
    }
  }
  return {{"domain", c.domain}, {"curves", curves}, {"streams", streams}};
}

json run_scaling_check(const ExperimentConfig& c, RunRecord& rec) {
  const StableParams params(c.alpha, c.d);
  const Point origin(c.d);
  auto exit_times = [&](double r, std::uint64_t index) {
    const Ball ball(origin, r);
    const double h = c.h * std::pow(r, c.alpha);
    const auto samples = simulate_exit_times(ball, origin, params, h, c.t_max * std::pow(r, c.alpha),
                                             block(c.seed, index, c.n), c.workers);
    std::vector<double> t;
    for (const auto& s : samples) t.push_back(s.time);
    return t;
  };
  const std::vector<double> unit = exit_times(1.0, 0);
  const double z = normal_two_sided_quantile(kDefaultConfidence);
  json points = json::array();
  json streams = json::array({stream_json("unit ball", block(c.seed, 0, c.n))});
  std::vector<ScalePoint> fit_points;
  for (std::size_t i = 0; i < c.scales.size(); ++i) {
    const double r = c.scales[i];
    const std::vector<double> scaled_ball = exit_times(r, i + 1);
    streams.push_back(stream_json("radius " + std::to_string(i), block(c.seed, i + 1, c.n)));
    std::vector<double> rescaled_unit = unit;
    for (double& t : rescaled_unit) t *= std::pow(r, c.alpha);
    double mean = 0.0, m2 = 0.0;
    for (double t : scaled_ball) mean += t;
    mean /= static_cast<double>(scaled_ball.size());
    for (double t : scaled_ball) m2 += (t - mean) * (t - mean);
    const double half = z * std::sqrt(m2 / static_cast<double>(scaled_ball.size() - 1) /
                                      static_cast<double>(scaled_ball.size()));
    const double ks = ks_two_sample(scaled_ball, rescaled_unit);
    points.push_back({{"radius", r},
                      {"mean_exit_time", mean},
                      {"ci_lo", mean - half},
                      {"ci_hi", mean + half},
                      {"ks_distance", ks},
                      {"closed_form_mean", mean_exit_time_ball(r, 0.0, params)}});
    rec.rows.push_back({r, mean, mean - half, mean + half, c.n});
    fit_points.push_back({r, mean, mean - half, mean + half});
  }
  json out{{"points", points}, {"streams", streams}};
  if (fit_points.size() >= 3) {
    rec.fit = fit_log_log_exponent(fit_points, c.alpha);
    out["fit"] = fit_json(*rec.fit);
  }
  return out;
}

json run_bound_check(const ExperimentConfig& c, RunRecord& rec) {
  const ParabolaRegion region(c.beta, c.d, c.a);
  const StableParams params(c.alpha, c.d);
  const WalkOptions opts{c.gamma, c.max_steps, c.workers};
  const double inf = std::numeric_limits<double>::infinity();
  json points = json::array();
  json streams = json::array();
  bool dominated = true;
  for (std::size_t i = 0; i < c.scales.size(); ++i) {
    const double s = c.scales[i];
    const Point x0 = start_point(c, s);
    const double edge = s + std::pow(s, c.beta);
    // target 0: P^{s,inf}; 1: P^{s+s^beta,inf}; 2..: slices for the cylinder bound
    std::vector<RegionSlice> targets{RegionSlice(region, s, inf), RegionSlice(region, edge, inf),
                                     RegionSlice(region, s, edge), RegionSlice(region, edge, 2 * s),
                                     RegionSlice(region, 2 * s, inf)};
    const StreamRange region_range = block(c.seed, 2 * i, c.n);
    const StreamRange cyl_range = block(c.seed, 2 * i + 1, c.n);
    streams.push_back(stream_json("region s=" + std::to_string(i), region_range));
    streams.push_back(stream_json("cylinder s=" + std::to_string(i), cyl_range));
    const auto in_region = exit_probabilities(Domain{RegionSlice(region, 0.0, s)}, targets, x0,
                                              params, region_range, opts);
    const auto in_cylinder =
        exit_probabilities(Domain{Cylinder(s, c.beta, c.d)}, targets, x0, params, cyl_range, opts);

    const auto& pr = in_region[0];
    const auto& pc = in_cylinder[0];
    const double half_r = 0.5 * (pr.ci_hi - pr.ci_lo);
    const double half_c = 0.5 * (pc.ci_hi - pc.ci_lo);
    const double allowance = 2.0 * std::hypot(half_r, half_c);
    const bool ok = pr.estimate <= pc.estimate + allowance;
    dominated = dominated && ok;

    json slices = json::array();
    for (std::size_t t = 2; t < targets.size(); ++t) {
      const double integral =
          cylinder_bound_integral(s, targets[t].u, targets[t].v, x0, c.alpha, c.beta);
      slices.push_back({{"u", targets[t].u},
                        {"v", std::isinf(targets[t].v) ? json("inf") : json(targets[t].v)},
                        {"cylinder", estimate_json(in_cylinder[t])},
                        {"bound_integral", integral},
                        {"ratio", in_cylinder[t].estimate / integral},
                        {"ratio_hi", in_cylinder[t].ci_hi / integral}});
    }
    const double l2 = lemma2_bound(s, edge, inf, c.alpha, c.beta, c.d);
    points.push_back({{"scale", s},
                      {"region", estimate_json(pr)},
                      {"cylinder", estimate_json(pc)},
                      {"domination_allowance", allowance},
                      {"dominated", ok},
                      {"far_slice", estimate_json(in_region[1])},
                      {"lemma2_bound", l2},
                      {"lemma2_ratio", in_region[1].estimate / l2},
                      {"cylinder_slices", slices}});
    rec.rows.push_back(row_from(s, pr));
  }
  // One constant, taken from the first slice at the smallest scale with a
  // factor-2 margin, must cover every (s, u, v) slice.
  double eq5_constant = 0.0;
  bool eq5_covered = true;
  double band_lo = std::numeric_limits<double>::infinity(), band_hi = 0.0;
  for (auto& p : points) {
    const double r = p.at("lemma2_ratio").get<double>();
    band_lo = std::min(band_lo, r);
    band_hi = std::max(band_hi, r);
    for (auto& sl : p.at("cylinder_slices")) {
      if (eq5_constant == 0.0) eq5_constant = 2.0 * sl.at("ratio_hi").get<double>();
      const bool ok = sl.at("ratio").get<double>() <= eq5_constant;
      sl["covered"] = ok;
      eq5_covered = eq5_covered && ok;
    }
  }
  return {{"points", points},
          {"streams", streams},
          {"all_dominated", dominated},
          {"lemma2_ratio_spread", band_hi / band_lo},
          {"eq5_constant", eq5_constant},
          {"eq5_all_covered", eq5_covered}};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::HarmonicDecay: return "harmonic_decay";
    case ExperimentKind::TailIndex: return "tail_index";
    case ExperimentKind::Survival: return "survival";
    case ExperimentKind::ScalingCheck: return "scaling_check";
    case ExperimentKind::BoundCheck: return "bound_check";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.kind = parse_kind(field<std::string>(j, "kind", ""));
  if (!j.contains("region")) throw ConfigError("field 'region' is required");
  const json& region = j.at("region");
  c.beta = field(region, "beta", std::numeric_limits<double>::quiet_NaN());
  c.a = field(region, "a", 1.0);
  c.d = field(region, "d", 0);
  if (!j.contains("process")) throw ConfigError("field 'process' is required");
  c.alpha = field(j.at("process"), "alpha", std::numeric_limits<double>::quiet_NaN());
  c.start = field(j, "start", std::vector<double>{});
  if (j.contains("start_fraction")) c.start_fraction = field(j, "start_fraction", 0.0);
  c.scales = field(j, "scales", std::vector<double>{});
  c.n = field<std::uint64_t>(j, "n", c.n);
  c.h = field(j, "h", c.h);
  c.t_max = field(j, "t_max", c.t_max);
  c.time_grid = field(j, "time_grid", std::vector<double>{});
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.workers = field(j, "workers", default_worker_count());
  c.gamma = field(j, "gamma", c.gamma);
  c.max_steps = field<std::int64_t>(j, "max_steps", c.max_steps);
  c.moments = field(j, "moments", c.moments);
  c.halving_n = field<std::uint64_t>(j, "halving_n", c.halving_n);
  c.tail_quantile = field(j, "tail_quantile", c.tail_quantile);
  c.min_exceedances = field<std::uint64_t>(j, "min_exceedances", c.min_exceedances);
  c.domain = field<std::string>(j, "domain", c.domain);
  if (j.contains("decay_window")) {
    const auto w = field(j, "decay_window", std::vector<double>{});
    if (w.size() != 2) throw ConfigError("field 'decay_window' must be [t_lo, t_hi]");
    c.decay_window = std::make_pair(w[0], w[1]);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

void validate_config(const ExperimentConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) {
    throw ConfigError("field 'process.alpha' must satisfy 0 < alpha < 2 (isotropic stable index)");
  }
  if (!(c.beta > 0.0 && c.beta < 1.0)) {
    throw ConfigError("field 'region.beta' must satisfy 0 < beta < 1 (parabola exponent)");
  }
  if (c.d < 2) throw ConfigError("field 'region.d' must satisfy d >= 2");
  if (c.d > kMaxDim) throw ConfigError("field 'region.d' exceeds the supported maximum dimension");
  if (!(c.a > 0.0) || !std::isfinite(c.a)) throw ConfigError("field 'region.a' must be positive");
  if (c.n == 0) throw ConfigError("field 'n' must be positive");
  if (c.workers < 1) throw ConfigError("field 'workers' must be at least 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("field 'gamma' must lie in (0, 1]");
  if (c.max_steps < 1) throw ConfigError("field 'max_steps' must be positive");
  if (!(c.h > 0.0)) throw ConfigError("field 'h' must be positive");
  if (!(c.t_max > c.h)) throw ConfigError("field 't_max' must exceed h");
  require_ascending(c.time_grid, "time_grid", false);
  if (!c.time_grid.empty() && c.time_grid.back() > c.t_max) {
    throw ConfigError("field 'time_grid' must not extend beyond t_max");
  }
  if (c.start_fraction) {
    if (!(*c.start_fraction > 0.0)) throw ConfigError("field 'start_fraction' must be positive");
  } else if (c.kind != ExperimentKind::ScalingCheck && c.start.size() != static_cast<std::size_t>(c.d)) {
    throw ConfigError("field 'start' must have d coordinates");
  }
  for (double x : c.start) {
    if (!std::isfinite(x)) throw ConfigError("field 'start' must be finite");
  }

  const ParabolaRegion region(c.beta, c.d, c.a);
  switch (c.kind) {
    case ExperimentKind::HarmonicDecay:
    case ExperimentKind::BoundCheck:
      require_ascending(c.scales, "scales", true);
      if (c.kind == ExperimentKind::HarmonicDecay && c.scales.size() < 3) {
        throw ConfigError("field 'scales' needs at least three values for the exponent fit");
      }
      for (double s : c.scales) {
        const Point x0 = start_point(c, s);
        if (!slice_contains(RegionSlice(region, 0.0, s), x0)) {
          throw ConfigError("field 'start' must lie inside P^{0,s} for every scale");
        }
        if (x0.x1() > 0.5 * s) throw ConfigError("field 'start' must satisfy x1 <= s/2");
        if (c.kind == ExperimentKind::BoundCheck && !(s >= 1.0)) {
          throw ConfigError("field 'scales' must be >= 1 for bound checks");
        }
      }
      break;
    case ExperimentKind::TailIndex:
      if (c.start_fraction) throw ConfigError("field 'start_fraction' is not used by tail_index");
      if (!contains(region, start_point(c, 0.0))) {
        throw ConfigError("field 'start' must lie inside the region");
      }
      if (!(c.tail_quantile > 0.0 && c.tail_quantile < 1.0)) {
        throw ConfigError("field 'tail_quantile' must lie in (0, 1)");
      }
      if (c.halving_n > c.n) throw ConfigError("field 'halving_n' must not exceed n");
      for (double p : c.moments) {
        if (!(p >= 0.0)) throw ConfigError("field 'moments' must hold nonnegative orders");
      }
      break;
    case ExperimentKind::Survival:
      require_ascending(c.time_grid, "time_grid", true);
      if (c.domain != "region" && c.domain != "cylinder") {
        throw ConfigError("field 'domain' must be \"region\" or \"cylinder\"");
      }
      if (c.domain == "cylinder") {
        require_ascending(c.scales, "scales", true);
        for (double s : c.scales) {
          if (!cylinder_contains(Cylinder(s, c.beta, c.d), start_point(c, 0.0))) {
            throw ConfigError("field 'start' must lie inside every cylinder");
          }
        }
      } else if (!contains(region, start_point(c, 0.0))) {
        throw ConfigError("field 'start' must lie inside the region");
      }
      if (c.decay_window && !(c.decay_window->second > c.decay_window->first)) {
        throw ConfigError("field 'decay_window' must be ascending");
      }
      break;
    case ExperimentKind::ScalingCheck:
      require_ascending(c.scales, "scales", true);
      break;
  }
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"kind", to_string(c.kind)},
         {"region", {{"beta", c.beta}, {"a", c.a}, {"d", c.d}}},
         {"process", {{"alpha", c.alpha}}},
         {"start", c.start},
         {"scales", c.scales},
         {"n", c.n},
         {"h", c.h},
         {"t_max", c.t_max},
         {"time_grid", c.time_grid},
         {"seed", c.seed},
         {"gamma", c.gamma},
         {"max_steps", c.max_steps}};
  if (c.start_fraction) j["start_fraction"] = *c.start_fraction;
  if (c.kind == ExperimentKind::TailIndex) {
    j["moments"] = c.moments;
    j["halving_n"] = c.halving_n;
    j["tail_quantile"] = c.tail_quantile;
    j["min_exceedances"] = c.min_exceedances;
  }
  if (c.kind == ExperimentKind::Survival) {
    j["domain"] = c.domain;
    if (c.decay_window) j["decay_window"] = {c.decay_window->first, c.decay_window->second};
  }
  return j;
}

Predictions predict(int d, double alpha, double beta) {
  const double p0 = critical_exponent(d, alpha, beta);
  return {p0, alpha * beta * p0, alpha * beta * (p0 - 1.0)};
}

json RunRecord::to_json() const {
  json j = result;
  j["runtime"] = {{"wall_time_s", wall_time_s}, {"workers", workers}};
  return j;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.workers = config.workers;
  const Predictions pred = predict(config.d, config.alpha, config.beta);

  json details;
  switch (config.kind) {
    case ExperimentKind::HarmonicDecay: details = run_harmonic_decay(config, rec); break;
    case ExperimentKind::TailIndex: details = run_tail_index(config, rec); break;
    case ExperimentKind::Survival: details = run_survival(config, rec); break;
    case ExperimentKind::ScalingCheck: details = run_scaling_check(config, rec); break;
    case ExperimentKind::BoundCheck: details = run_bound_check(config, rec); break;
  }

  json rows = json::array();
  for (const auto& r : rec.rows) {
    rows.push_back({{"scale", r.scale}, {"estimate", r.estimate}, {"ci_lo", r.ci_lo},
                    {"ci_hi", r.ci_hi}, {"n", r.n}});
  }
  rec.result = {{"version", kVersion},
                {"seed", config.seed},
                {"config", config_to_json(config)},
                {"predicted",
                 {{"p0", pred.p0},
                  {"alpha_beta_p0", pred.alpha_beta_p0},
                  {"alpha_beta_p0_minus_1", pred.alpha_beta_p0_minus_1},
                  {"escape_slope_fixed_start", -pred.alpha_beta_p0},
                  {"escape_slope_proportional_start", -pred.alpha_beta_p0_minus_1},
                  {"survival_slope", -pred.p0}}},
                {"details", details},
                {"rows", rows},
                {"fit", rec.fit ? fit_json(*rec.fit) : json(nullptr)}};
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord rec;
  rec.result = j;
  if (rec.result.contains("runtime")) {
    rec.wall_time_s = j.at("runtime").at("wall_time_s").get<double>();
    rec.workers = j.at("runtime").at("workers").get<int>();
    rec.result.erase("runtime");
  }
  for (const auto& r : j.at("rows")) {
    rec.rows.push_back({r.at("scale").get<double>(), r.at("estimate").get<double>(),
                        r.at("ci_lo").get<double>(), r.at("ci_hi").get<double>(),
                        r.at("n").get<std::uint64_t>()});
  }
  if (!j.at("fit").is_null()) rec.fit = fit_from_json(j.at("fit"));
  return rec;
}

std::string curves_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "scale,estimate,ci_lo,ci_hi,n\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.scale << ',' << r.estimate << ',' << r.ci_lo << ',' << r.ci_hi << ',' << r.n << '\n';
  }
  return out.str();
}

std::string loglog_svg(const std::vector<CurveRow>& rows, const std::optional<ExponentFit>& fit,
                       const std::string& title) {
  constexpr double kW = 640, kH = 480, kMargin = 60;
  std::vector<CurveRow> pts;
  for (const auto& r : rows) {
    if (r.scale > 0.0 && r.estimate > 0.0) pts.push_back(r);
  }
  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\">" << title << "</text>\n";
  if (pts.empty()) {
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
    return svg.str();
  }
  double xlo = std::log10(pts.front().scale), xhi = xlo;
  double ylo = std::log10(pts.front().estimate), yhi = ylo;
  for (const auto& p : pts) {
    xlo = std::min(xlo, std::log10(p.scale));
    xhi = std::max(xhi, std::log10(p.scale));
    const double lo = p.ci_lo > 0.0 ? p.ci_lo : p.estimate;
    ylo = std::min(ylo, std::log10(lo));
    yhi = std::max(yhi, std::log10(std::max(p.ci_hi, p.estimate)));
  }
  if (xhi - xlo < 1e-9) { xlo -= 0.5; xhi += 0.5; }
  if (yhi - ylo < 1e-9) { ylo -= 0.5; yhi += 0.5; }
  const double padx = 0.05 * (xhi - xlo), pady = 0.08 * (yhi - ylo);
  xlo -= padx; xhi += padx; ylo -= pady; yhi += pady;
  auto px = [&](double lx) { return kMargin + (lx - xlo) / (xhi - xlo) * (kW - 2 * kMargin); };
  auto py = [&](double ly) { return kH - kMargin - (ly - ylo) / (yhi - ylo) * (kH - 2 * kMargin); };

  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin
      << "\" height=\"" << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 20
      << "\" text-anchor=\"middle\">log10 scale</text>\n";
  svg << "<text x=\"18\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 18 " << kH / 2
      << ")\" text-anchor=\"middle\">log10 estimate</text>\n";
  for (const auto& p : pts) {
    const double x = px(std::log10(p.scale));
    if (p.ci_lo > 0.0) {
      svg << "<line x1=\"" << x << "\" y1=\"" << py(std::log10(p.ci_lo)) << "\" x2=\"" << x
          << "\" y2=\"" << py(std::log10(p.ci_hi)) << "\" stroke=\"gray\"/>\n";
    }
    svg << "<circle cx=\"" << x << "\" cy=\"" << py(std::log10(p.estimate))
        << "\" r=\"3\" fill=\"black\"/>\n";
  }
  if (fit) {
    // Both lines pass through the fitted value at the centre of the window.
    const double lc = 0.5 * (std::log(fit->window.first) + std::log(fit->window.second));
    const double yc = fit->intercept + fit->slope * lc;
    auto draw = [&](double slope, const char* colour, const char* dash, const std::string& label,
                    double label_y) {
      const double l0 = fit->window.first, l1 = fit->window.second;
      const double y0 = yc + slope * (std::log(l0) - lc);
      const double y1 = yc + slope * (std::log(l1) - lc);
      svg << "<line x1=\"" << px(std::log10(l0)) << "\" y1=\"" << py(y0 / std::log(10.0))
          << "\" x2=\"" << px(std::log10(l1)) << "\" y2=\"" << py(y1 / std::log(10.0))
          << "\" stroke=\"" << colour << "\" stroke-dasharray=\"" << dash << "\"/>\n";
      svg << "<text x=\"" << kW - kMargin - 8 << "\" y=\"" << label_y
          << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << label << "</text>\n";
    };
    std::ostringstream fl, pl;
    fl << std::setprecision(4) << "fit slope " << fit->slope << " +/- " << fit->stderr;
    pl << std::setprecision(4) << "predicted slope " << fit->predicted;
    draw(fit->slope, "steelblue", "none", fl.str(), kMargin + 18);
    draw(fit->predicted, "firebrick", "6,4", pl.str(), kMargin + 36);
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_outputs(const RunRecord& record, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& text) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  };
  write("results.json", record.to_json().dump(2) + "\n");
  write("curves.csv", curves_csv(record.rows));
  std::string title = "stable-exit";
  if (record.result.contains("config")) {
    title += ": " + record.result.at("config").at("kind").get<std::string>();
  }
  write("plot.svg", loglog_svg(record.rows, record.fit, title));
}

}  // namespace stable_exit
