#include "stable_exit/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace stable_exit {

Point::Point(int d) : d_(d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("Point: dimension " + std::to_string(d) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

Point::Point(double x1, std::initializer_list<double> transverse)
    : Point(static_cast<int>(transverse.size()) + 1) {
  c_[0] = x1;
  std::copy(transverse.begin(), transverse.end(), c_.begin() + 1);
}

double Point::transverse_norm() const noexcept {
  double acc = 0.0;
  for (int i = 1; i < d_; ++i) acc += c_[i] * c_[i];
  return std::sqrt(acc);
}

double Point::norm() const noexcept {
  double acc = 0.0;
  for (int i = 0; i < d_; ++i) acc += c_[i] * c_[i];
  return std::sqrt(acc);
}

Point& Point::operator+=(const Point& o) noexcept {
  for (int i = 0; i < d_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) noexcept {
  for (int i = 0; i < d_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point& Point::operator*=(double k) noexcept {
  for (int i = 0; i < d_; ++i) c_[i] *= k;
  return *this;
}

double distance(const Point& a, const Point& b) noexcept { return (a - b).norm(); }

ParabolaRegion::ParabolaRegion(double beta, int d, double a) : beta_(beta), a_(a), d_(d) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1), got " + std::to_string(beta));
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("profile scale a must be positive, got " + std::to_string(a));
  }
  if (d < 2 || d > kMaxDim) {
    throw std::invalid_argument("dimension d must lie in [2, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(d));
  }
}

RegionSlice::RegionSlice(ParabolaRegion region_, double u_, double v_)
    : region(region_), u(u_), v(v_) {
  if (!(u >= 0.0) || !(v > u)) {
    throw std::invalid_argument("slice requires 0 <= u < v");
  }
}

Cylinder::Cylinder(double s_, double beta_, int d_) : s(s_), beta(beta_), d(d_) {
  if (!(s > 0.0)) throw std::invalid_argument("cylinder requires s > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("cylinder requires 0 < beta < 1");
  if (d < 2 || d > kMaxDim) throw std::invalid_argument("cylinder dimension out of range");
}

Ball::Ball(Point center_, double radius_) : center(center_), radius(radius_) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball requires radius > 0");
}

bool contains(const ParabolaRegion& region, const Point& x) noexcept {
  const double x1 = x.x1();
  return x1 > 0.0 && x.transverse_norm() < region.profile(x1);
}

bool slice_contains(const RegionSlice& slice, const Point& x) noexcept {
  return x.x1() >= slice.u && x.x1() < slice.v && contains(slice.region, x);
}

bool cylinder_contains(const Cylinder& cyl, const Point& x) noexcept {
  return x.x1() < cyl.s && x.transverse_norm() < cyl.radius();
}

bool ball_contains(const Ball& ball, const Point& x) noexcept {
  return distance(x, ball.center) < ball.radius;
}

namespace {

constexpr double kGoldenTol = 1e-10;
constexpr int kScanPoints = 24;

// Squared distance in the profile half-plane from (x1, r) to (u, a u^beta).
struct ProfileDistance {
  double x1, r, a, beta;

  double value(double u) const noexcept {
    const double du = x1 - u;
    const double dr = r - a * std::pow(u, beta);
    return du * du + dr * dr;
  }

  double derivative(double u) const noexcept {
    const double up = std::pow(u, beta);
    return -2.0 * (x1 - u) - 2.0 * (r - a * up) * a * beta * up / u;
  }
};

// Minimum of the profile distance over u in [lo, hi]: coarse scan to
// isolate the global basin, golden section inside it, then bisection on the
// derivative when it changes sign across the final bracket.
double min_profile_distance(const ProfileDistance& f, double lo, double hi) {
  const double step = (hi - lo) / (kScanPoints - 1);
  int best = 0;
  double best_val = f.value(lo);
  for (int i = 1; i < kScanPoints; ++i) {
    const double val = f.value(lo + i * step);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  double a = lo + std::max(best - 1, 0) * step;
  double b = lo + std::min(best + 1, kScanPoints - 1) * step;

  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f.value(c);
  double fd = f.value(d);
  while (b - a > kGoldenTol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f.value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f.value(d);
    }
  }

  double result = std::min({best_val, fc, fd});
  if (a > 0.0) {
    double ga = f.derivative(a);
    double gb = f.derivative(b);
    if (ga < 0.0 && gb > 0.0) {
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (f.derivative(mid) < 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      result = std::min(result, f.value(0.5 * (a + b)));
    }
  }
  return std::sqrt(result);
}

double parabola_distance(const ParabolaRegion& region, double x1, double r) {
  // The vertical segment to (x1, a x1^beta) and the apex plane both bound
  // the distance from above, which bounds the search bracket.
  const double upper = std::min(x1, region.profile(x1) - r);
  const ProfileDistance f{x1, r, region.a(), region.beta()};
  const double lo = std::max(0.0, x1 - upper);
  const double hi = x1 + upper;
  return std::min(x1, min_profile_distance(f, lo, hi));
}

}  // namespace

double dist_to_complement(const ParabolaRegion& region, const Point& x) {
  if (!contains(region, x)) {
    throw std::invalid_argument("dist_to_complement: point is not interior to the region");
  }
  return parabola_distance(region, x.x1(), x.transverse_norm());
}

bool in_safe_zone(const ParabolaRegion& region, const Point& x) {
  if (region.a() != 1.0) {
    throw std::invalid_argument("safe zone is only defined for the unit-scale region (a = 1)");
  }
  return x.x1() > 1.0 && x.transverse_norm() < 0.5 * std::pow(x.x1(), region.beta());
}

double safe_ball_radius(const Point& x, double beta) {
  const ParabolaRegion region(beta, x.dim());
  if (!in_safe_zone(region, x)) {
    throw std::invalid_argument("safe_ball_radius: point is outside the safe zone");
  }
  return std::pow(x.norm(), beta) / 5.0;
}

int domain_dim(const Domain& domain) noexcept {
  struct {
    int operator()(const ParabolaRegion& r) const { return r.d(); }
    int operator()(const RegionSlice& s) const { return s.region.d(); }
    int operator()(const Cylinder& c) const { return c.d; }
    int operator()(const Ball& b) const { return b.center.dim(); }
  } visitor;
  return std::visit(visitor, domain);
}

bool domain_contains(const Domain& domain, const Point& x) noexcept {
  struct {
    const Point& x;
    bool operator()(const ParabolaRegion& r) const { return contains(r, x); }
    bool operator()(const RegionSlice& s) const { return slice_contains(s, x); }
    bool operator()(const Cylinder& c) const { return cylinder_contains(c, x); }
    bool operator()(const Ball& b) const { return ball_contains(b, x); }
  } visitor{x};
  return std::visit(visitor, domain);
}

double domain_distance(const Domain& domain, const Point& x) {
  if (!domain_contains(domain, x)) {
    throw std::invalid_argument("domain_distance: point is not interior to the domain");
  }
  struct {
    const Point& x;
    double operator()(const ParabolaRegion& r) const {
      return parabola_distance(r, x.x1(), x.transverse_norm());
    }
    double operator()(const RegionSlice& s) const {
      double dist = parabola_distance(s.region, x.x1(), x.transverse_norm());
      dist = std::min(dist, x.x1() - s.u);
      if (std::isfinite(s.v)) dist = std::min(dist, s.v - x.x1());
      return dist;
    }
    double operator()(const Cylinder& c) const {
      return std::min(c.s - x.x1(), c.radius() - x.transverse_norm());
    }
    double operator()(const Ball& b) const { return b.radius - distance(x, b.center); }
  } visitor{x};
  return std::visit(visitor, domain);
}

}  // namespace stable_exit

namespace nlohmann {

stable_exit::ParabolaRegion adl_serializer<stable_exit::ParabolaRegion>::from_json(const json& j) {
  return stable_exit::ParabolaRegion(j.at("beta").get<double>(), j.at("d").get<int>(),
                                     j.value("a", 1.0));
}

void adl_serializer<stable_exit::ParabolaRegion>::to_json(json& j,
                                                          const stable_exit::ParabolaRegion& r) {
  j = json{{"beta", r.beta()}, {"a", r.a()}, {"d", r.d()}};
}

}  // namespace nlohmann
