#include "coxperc/core.hpp"

#include <algorithm>
#include <cstdio>

#include <boost/math/special_functions/gamma.hpp>

namespace coxperc {

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3, got " + std::to_string(dim));
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: check_dim(dim); return 0.0;
  }
}

double sphere_surface(int dim, double r) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi * r;
    case 3: return 4.0 * kPi * r * r;
    default: check_dim(dim); return 0.0;
  }
}

Point Point::zero(int dim) {
  check_dim(dim);
  Point p;
  p.dim_ = dim;
  return p;
}

Point Point::from(std::span<const double> coords) {
  check_dim(static_cast<int>(coords.size()));
  Point p = zero(static_cast<int>(coords.size()));
  for (std::size_t k = 0; k < coords.size(); ++k) p.c_[k] = coords[k];
  return p;
}

double Point::max_abs() const {
  return std::max({std::abs(c_[0]), std::abs(c_[1]), std::abs(c_[2])});
}

bool balls_overlap(const Point& c1, double r1, const Point& c2, double r2) {
  if (c1.dim() != c2.dim()) {
    throw std::invalid_argument("balls_overlap: dimension mismatch (" + std::to_string(c1.dim()) + " vs " +
                                std::to_string(c2.dim()) + ")");
  }
  if (r1 < 0.0 || r2 < 0.0) throw std::invalid_argument("balls_overlap: negative radius");
  const double s = r1 + r2;
  return squared_distance(c1, c2) < s * s;
}

Window::Window(int dim, double half_width, double margin) : dim_(dim), half_width_(half_width), margin_(margin) {
  check_dim(dim);
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("window half_width must be positive");
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw std::invalid_argument("window margin must be nonnegative");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Seed Seed::child(std::uint64_t index) const {
  return Seed{splitmix64(splitmix64(value) ^ (index * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL))};
}

Rng Seed::rng() const { return Rng(splitmix64(value)); }

std::int64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// P(rho = n) for the integer tail law.
double integer_pmf(double tail, double n) { return std::pow(n, -tail) - std::pow(n + 1.0, -tail); }

double integer_truncated_moment(double tail, double k, double a) {
  if (k >= tail) return kInf;
  const double start = std::max(1.0, std::ceil(a));
  const double stop = start + 200000.0;
  double sum = 0.0;
  for (double n = stop; n >= start; n -= 1.0) sum += std::pow(n, k) * integer_pmf(tail, n);
  // Remaining terms behave like tail * n^(k - tail - 1).
  sum += tail * std::pow(stop + 0.5, k - tail) / (tail - k);
  return sum;
}

}  // namespace

RadiusLaw::RadiusLaw(Variant v) : v_(v) {
  std::visit(Overloaded{
                 [](const law::Constant& c) {
                   // r = 0 is admitted as the degenerate empty model.
                   require(c.r >= 0.0 && std::isfinite(c.r), "constant radius must be finite and >= 0");
                 },
                 [](const law::Exponential& e) { require(e.rate > 0.0 && std::isfinite(e.rate), "exponential rate must be positive"); },
                 [](const law::Pareto& p) {
                   require(p.scale > 0.0 && std::isfinite(p.scale), "pareto scale must be positive");
                   require(p.tail > 0.0 && std::isfinite(p.tail), "pareto tail must be positive");
                 },
                 [](const law::TwoPoint& t) {
                   require(t.r1 > 0.0 && t.r2 > 0.0 && std::isfinite(t.r1) && std::isfinite(t.r2),
                           "two-point values must be positive");
                   require(t.p1 > 0.0 && t.p1 <= 1.0, "two-point probability must lie in (0, 1]");
                 },
                 [](const law::IntegerTail& t) { require(t.tail > 0.0 && std::isfinite(t.tail), "integer tail exponent must be positive"); },
             },
             v_);
}

std::string RadiusLaw::describe() const {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return "constant(r=" + fmt_double(c.r) + ")"; },
                        [](const law::Exponential& e) { return "exponential(rate=" + fmt_double(e.rate) + ")"; },
                        [](const law::Pareto& p) {
                          return "pareto(scale=" + fmt_double(p.scale) + ",tail=" + fmt_double(p.tail) + ")";
                        },
                        [](const law::TwoPoint& t) {
                          return "two_point(r1=" + fmt_double(t.r1) + ",p1=" + fmt_double(t.p1) + ",r2=" + fmt_double(t.r2) + ")";
                        },
                        [](const law::IntegerTail& t) { return "integer_tail(tail=" + fmt_double(t.tail) + ")"; },
                    },
                    v_);
}

double RadiusLaw::sample(Rng& rng) const {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.r; },
                        [&](const law::Exponential& e) { return coxperc::exponential(rng, e.rate); },
                        [&](const law::Pareto& p) { return p.scale * std::pow(1.0 - uniform01(rng), -1.0 / p.tail); },
                        [&](const law::TwoPoint& t) { return uniform01(rng) < t.p1 ? t.r1 : t.r2; },
                        [&](const law::IntegerTail& t) { return std::floor(std::pow(1.0 - uniform01(rng), -1.0 / t.tail)); },
                    },
                    v_);
}

double RadiusLaw::moment(double k) const {
  if (!(k > 0.0)) throw std::invalid_argument("moment order must be positive");
  return truncated_moment(k, 0.0);
}

double RadiusLaw::truncated_moment(double k, double a) const {
  return std::visit(Overloaded{
                        [&](const law::Constant& c) { return c.r >= a ? std::pow(c.r, k) : 0.0; },
                        [&](const law::Exponential& e) {
                          return boost::math::tgamma(k + 1.0, e.rate * std::max(a, 0.0)) / std::pow(e.rate, k);
                        },
                        [&](const law::Pareto& p) {
                          if (k >= p.tail) return kInf;
                          const double lo = std::max(a, p.scale);
                          return p.tail * std::pow(p.scale, p.tail) * std::pow(lo, k - p.tail) / (p.tail - k);
                        },
                        [&](const law::TwoPoint& t) {
                          double m = 0.0;
                          if (t.r1 >= a) m += t.p1 * std::pow(t.r1, k);
                          if (t.r2 >= a) m += (1.0 - t.p1) * std::pow(t.r2, k);
                          return m;
                        },
                        [&](const law::IntegerTail& t) { return integer_truncated_moment(t.tail, k, a); },
                    },
                    v_);
}

double RadiusLaw::survival(double t) const {
  return std::visit(Overloaded{
                        [&](const law::Constant& c) { return c.r > t ? 1.0 : 0.0; },
                        [&](const law::Exponential& e) { return t <= 0.0 ? 1.0 : std::exp(-e.rate * t); },
                        [&](const law::Pareto& p) { return t < p.scale ? 1.0 : std::pow(p.scale / t, p.tail); },
                        [&](const law::TwoPoint& tp) {
                          return (tp.r1 > t ? tp.p1 : 0.0) + (tp.r2 > t ? 1.0 - tp.p1 : 0.0);
                        },
                        [&](const law::IntegerTail& it) {
                          return t < 1.0 ? 1.0 : std::pow(std::floor(t) + 1.0, -it.tail);
                        },
                    },
                    v_);
}

double RadiusLaw::esssup() const {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.r; },
                        [](const law::Exponential&) { return kInf; },
                        [](const law::Pareto&) { return kInf; },
                        [](const law::TwoPoint& t) { return t.p1 < 1.0 ? std::max(t.r1, t.r2) : t.r1; },
                        [](const law::IntegerTail&) { return kInf; },
                    },
                    v_);
}

double RadiusLaw::sample_size_biased(int j, Rng& rng) const {
  if (j < 0) throw std::invalid_argument("size-bias order must be nonnegative");
  if (j == 0) return sample(rng);
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.r; },
                        [&](const law::Exponential& e) {
                          // Gamma(j + 1, rate) as a sum of exponentials.
                          double s = 0.0;
                          for (int i = 0; i <= j; ++i) s += coxperc::exponential(rng, e.rate);
                          return s;
                        },
                        [&](const law::Pareto& p) {
                          if (p.tail <= j) throw std::domain_error("size-biased pareto needs tail > order");
                          return p.scale * std::pow(1.0 - uniform01(rng), -1.0 / (p.tail - j));
                        },
                        [&](const law::TwoPoint& t) {
                          const double w1 = t.p1 * std::pow(t.r1, j);
                          const double w2 = (1.0 - t.p1) * std::pow(t.r2, j);
                          return uniform01(rng) * (w1 + w2) < w1 ? t.r1 : t.r2;
                        },
                        [](const law::IntegerTail&) -> double {
                          throw std::logic_error("size-biased sampling is not available for integer_tail");
                        },
                    },
                    v_);
}

}  // namespace coxperc
