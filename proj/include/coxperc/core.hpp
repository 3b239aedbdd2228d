#pragma once

// Shared primitives: points, windows, seeded randomness and radius laws.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

namespace coxperc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Volume of the unit ball |B_1| in dimension 1, 2 or 3.
double unit_ball_volume(int dim);
inline double ball_volume(int dim, double r) { return unit_ball_volume(dim) * std::pow(r, dim); }
/// Surface measure of the sphere of radius r (for d = 1 this is the point count 2).
double sphere_surface(int dim, double r);

void check_dim(int dim);

class Point {
 public:
  Point() = default;
  explicit Point(double x) : c_{x, 0.0, 0.0}, dim_(1) {}
  Point(double x, double y) : c_{x, y, 0.0}, dim_(2) {}
  Point(double x, double y, double z) : c_{x, y, z}, dim_(3) {}

  static Point zero(int dim);
  static Point from(std::span<const double> coords);

  int dim() const { return dim_; }
  double operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  double norm() const { return std::sqrt(c_[0] * c_[0] + c_[1] * c_[1] + c_[2] * c_[2]); }
  double max_abs() const;

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::array<double, 3> c_{};
  int dim_ = 0;
};

// Unused trailing coordinates are zero, so these are valid for any dim.
inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}
inline double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

/// True iff the open balls B_r1(c1) and B_r2(c2) overlap, i.e. |c1 - c2| < r1 + r2.
bool balls_overlap(const Point& c1, double r1, const Point& c2, double r2);

/// The observation window Q_L = [-L, L]^dim together with a simulation pad m.
/// Points are sampled on Q_{L+m}.
class Window {
 public:
  Window(int dim, double half_width, double margin = 0.0);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  double margin() const { return margin_; }
  double padded_half_width() const { return half_width_ + margin_; }
  double padded_volume() const { return std::pow(2.0 * padded_half_width(), dim_); }

  bool contains_padded(const Point& p) const { return p.max_abs() <= padded_half_width(); }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  int dim_;
  double half_width_;
  double margin_;
};

using Rng = std::mt19937_64;

/// 64-bit seed with counter-based child derivation: child(i) depends only on
/// (value, i), so replicate streams do not depend on execution order.
struct Seed {
  std::uint64_t value = 0;

  Seed child(std::uint64_t index) const;
  Rng rng() const;

  friend bool operator==(const Seed&, const Seed&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draw on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }
std::int64_t poisson(Rng& rng, double mean);

namespace law {
struct Constant {
  double r;
};
struct Exponential {
  double rate;
};
/// Survival P(rho > t) = (scale / t)^tail for t >= scale.
struct Pareto {
  double scale;
  double tail;
};
/// rho = r1 with probability p1, else r2.
struct TwoPoint {
  double r1;
  double p1;
  double r2;
};
/// Integer-valued law with P(rho >= n) = n^-tail for n >= 1.
struct IntegerTail {
  double tail;
};
}  // namespace law

/// Radius distribution nu of the Boolean model marks.
class RadiusLaw {
 public:
  using Variant = std::variant<law::Constant, law::Exponential, law::Pareto, law::TwoPoint, law::IntegerTail>;

  explicit RadiusLaw(Variant v);

  static RadiusLaw constant(double r) { return RadiusLaw(law::Constant{r}); }
  static RadiusLaw exponential(double rate) { return RadiusLaw(law::Exponential{rate}); }
  static RadiusLaw pareto(double scale, double tail) { return RadiusLaw(law::Pareto{scale, tail}); }
  static RadiusLaw two_point(double r1, double p1, double r2) { return RadiusLaw(law::TwoPoint{r1, p1, r2}); }
  static RadiusLaw integer_tail(double tail) { return RadiusLaw(law::IntegerTail{tail}); }

  const Variant& variant() const { return v_; }
  std::string describe() const;

  double sample(Rng& rng) const;
  /// E[rho^k], +inf when the moment diverges.
  double moment(double k) const;
  /// E[rho^k 1{rho >= a}].
  double truncated_moment(double k, double a) const;
  /// P(rho > t).
  double survival(double t) const;
  /// ess sup rho, possibly +inf.
  double esssup() const;
  /// Draw from the size-biased law r^j nu(dr) / E[rho^j], j a small nonnegative integer.
  /// Not available for IntegerTail.
  double sample_size_biased(int j, Rng& rng) const;
  bool supports_size_biased() const { return !std::holds_alternative<law::IntegerTail>(v_); }

  friend bool operator==(const RadiusLaw& a, const RadiusLaw& b) { return a.describe() == b.describe(); }

 private:
  Variant v_;
};

inline double sample_radius(const RadiusLaw& law, Rng& rng) { return law.sample(rng); }
inline double law_moment(const RadiusLaw& law, double k) { return law.moment(k); }

}  // namespace coxperc
