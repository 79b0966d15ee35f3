#pragma once

// Parabola-shaped regions P = {x1 > 0, |x~| < a * x1^beta} in R^d, their
// axial slices, the bounding half-infinite cylinder, and the distance to
// the complement used to size walk-on-balls steps.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <variant>

#include "json.hpp"

namespace stable_exit {

/// Largest supported ambient dimension. Points are stored inline so the
/// walkers never allocate per step.
inline constexpr int kMaxDim = 8;

/// A point x = (x1, x~) of R^d. Coordinate 0 is the axial coordinate.
class Point {
 public:
  Point() = default;
  explicit Point(int d);
  Point(double x1, std::initializer_list<double> transverse);

  static Point axial(int d, double x1) {
    Point p(d);
    p.c_[0] = x1;
    return p;
  }

  int dim() const noexcept { return d_; }
  double x1() const noexcept { return c_[0]; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  double transverse_norm() const noexcept;
  double norm() const noexcept;

  Point& operator+=(const Point& o) noexcept;
  Point& operator-=(const Point& o) noexcept;
  Point& operator*=(double k) noexcept;

  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(double k, Point a) noexcept { return a *= k; }
  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::array<double, kMaxDim> c_{};
  int d_ = 0;
};

double distance(const Point& a, const Point& b) noexcept;

class ParabolaRegion {
 public:
  /// Throws std::invalid_argument unless 0 < beta < 1, a > 0, 2 <= d <= kMaxDim.
  ParabolaRegion(double beta, int d, double a = 1.0);

  double beta() const noexcept { return beta_; }
  double a() const noexcept { return a_; }
  int d() const noexcept { return d_; }

  /// Transverse radius a * u^beta of the profile at axial coordinate u >= 0.
  double profile(double u) const noexcept { return a_ * std::pow(u, beta_); }

  friend bool operator==(const ParabolaRegion&, const ParabolaRegion&) = default;

 private:
  double beta_;
  double a_;
  int d_;
};

/// P^{u,v} = P ∩ {u <= x1 < v}; v may be +infinity.
struct RegionSlice {
  RegionSlice(ParabolaRegion region, double u, double v);

  ParabolaRegion region;
  double u;
  double v;
};

/// {x1 < s, |x~| < s^beta}, unbounded towards x1 = -infinity.
struct Cylinder {
  Cylinder(double s, double beta, int d);

  double radius() const noexcept { return std::pow(s, beta); }

  double s;
  double beta;
  int d;
};

/// Open Euclidean ball; used for the scaling checks and Euler oracles.
struct Ball {
  Ball(Point center, double radius);

  Point center;
  double radius;
};

bool contains(const ParabolaRegion& region, const Point& x) noexcept;
bool slice_contains(const RegionSlice& slice, const Point& x) noexcept;
bool cylinder_contains(const Cylinder& cyl, const Point& x) noexcept;
bool ball_contains(const Ball& ball, const Point& x) noexcept;

/// inf{|x - y| : y not in P}. Throws std::invalid_argument if x is not
/// interior to the region.
double dist_to_complement(const ParabolaRegion& region, const Point& x);

/// Membership in P' = P ∩ {x1 > 1, |x~| < x1^beta / 2}. Only defined for
/// a = 1; throws otherwise.
bool in_safe_zone(const ParabolaRegion& region, const Point& x);

/// |x|^beta / 5, the radius of a ball around a safe-zone point that stays
/// inside P. Throws if x is outside the safe zone.
double safe_ball_radius(const Point& x, double beta);

using Domain = std::variant<ParabolaRegion, RegionSlice, Cylinder, Ball>;

int domain_dim(const Domain& domain) noexcept;
bool domain_contains(const Domain& domain, const Point& x) noexcept;

/// Distance from an interior point to the domain's complement. Throws if x
/// is not interior.
double domain_distance(const Domain& domain, const Point& x);

}  // namespace stable_exit

// Regions serialize as {"beta": b, "a": a, "d": n}; "a" defaults to 1.
namespace nlohmann {
template <>
struct adl_serializer<stable_exit::ParabolaRegion> {
  static stable_exit::ParabolaRegion from_json(const json& j);
  static void to_json(json& j, const stable_exit::ParabolaRegion& r);
};
}  // namespace nlohmann
