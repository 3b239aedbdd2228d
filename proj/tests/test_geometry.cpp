#include <cmath>
#include <numbers>

#include "coxperc/geometry.hpp"
#include "doctest.h"

using namespace coxperc;

namespace {

constexpr double pi = std::numbers::pi;

// Hit-or-miss |B_r(c) ∩ box| on the box itself.
double mc_ball_box(const Point& c, double r, const std::array<double, 3>& lo, const std::array<double, 3>& hi, int n, Seed seed) {
  Rng rng = seed.rng();
  const int dim = c.dim();
  double box = 1.0;
  for (int k = 0; k < dim; ++k) box *= hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    Point p = Point::zero(dim);
    for (int k = 0; k < dim; ++k) p[k] = uniform(rng, lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
    hits += squared_distance(p, c) < r * r;
  }
  return box * hits / n;
}

// Spherical cap of height h: pi h^2 (3r - h) / 3.
double cap(double r, double h) { return pi * h * h * (3.0 * r - h) / 3.0; }

}  // namespace

TEST_CASE("disk-rectangle area: exact cases") {
  CHECK(disk_rect_area(0, 0, 1, -2, 2, -2, 2) == doctest::Approx(pi));
  CHECK(disk_rect_area(0, 0, 1, 0, 2, 0, 2) == doctest::Approx(pi / 4));
  CHECK(disk_rect_area(0, 0, 1, 0, 2, -2, 2) == doctest::Approx(pi / 2));
  CHECK(disk_rect_area(0, 0, 1, 5, 6, 5, 6) == doctest::Approx(0.0));
  CHECK(disk_rect_area(0, 0, 10, -1, 1, -1, 1) == doctest::Approx(4.0));
  // Circular segment cut by x >= 0.5: r^2 acos(d/r) - d sqrt(r^2 - d^2).
  CHECK(disk_rect_area(0, 0, 1, 0.5, 3, -3, 3) == doctest::Approx(std::acos(0.5) - 0.5 * std::sqrt(0.75)));
}

TEST_CASE("ball-box volume against hit-or-miss") {
  const int n = 400000;
  std::uint64_t s = 1;
  for (int dim = 1; dim <= 3; ++dim) {
    for (int rep = 0; rep < 4; ++rep) {
      Rng rng = Seed{77 + s}.rng();
      Point c = Point::zero(dim);
      std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
      for (int k = 0; k < dim; ++k) {
        c[k] = uniform(rng, -1, 1);
        lo[static_cast<std::size_t>(k)] = uniform(rng, -1.5, 0);
        hi[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)] + uniform(rng, 0.3, 2.0);
      }
      const double r = uniform(rng, 0.3, 1.5);
      const double exact = ball_box_volume(c, r, lo, hi);
      double box = 1.0;
      for (int k = 0; k < dim; ++k) box *= hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
      const double mc = mc_ball_box(c, r, lo, hi, n, Seed{s++});
      const double p = mc / box;
      INFO("dim " << dim << " rep " << rep);
      CHECK(std::abs(exact - mc) <= 5.0 * box * std::sqrt(p * (1 - p) / n) + 1e-9);
    }
  }
  // Ball inside the box and half-space cuts in 3D.
  CHECK(ball_box_volume(Point(0, 0, 0), 1.0, {-2, -2, -2}, {2, 2, 2}) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-6));
  CHECK(ball_box_volume(Point(0, 0, 0), 1.0, {0.4, -2, -2}, {2, 2, 2}) == doctest::Approx(cap(1.0, 0.6)).epsilon(1e-6));
}

TEST_CASE("ball-ball intersection") {
  // d = 1: overlap of intervals.
  CHECK(ball_ball_intersection(1, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(ball_ball_intersection(1, 0.2, 2.0, 0.5) == doctest::Approx(1.0));
  // d = 2: symmetric lens.
  const double d = 1.2;
  CHECK(ball_ball_intersection(2, d, 1, 1) == doctest::Approx(2 * std::acos(d / 2) - (d / 2) * std::sqrt(4 - d * d)));
  CHECK(ball_ball_intersection(2, 0.1, 2, 0.5) == doctest::Approx(pi * 0.25));
  CHECK(ball_ball_intersection(2, 3.0, 1, 1) == 0.0);
  // d = 3: two caps of height r - d/2 for equal radii.
  CHECK(ball_ball_intersection(3, d, 1, 1) == doctest::Approx(2 * cap(1.0, 1.0 - d / 2)));
  CHECK(ball_ball_intersection(3, 0.0, 1, 2) == doctest::Approx(4.0 * pi / 3.0));
}

TEST_CASE("segment-ball length and clipping") {
  CHECK(segment_ball_length(Point(-5, 0), Point(5, 0), Point(0, 0), 1.0) == doctest::Approx(2.0));
  CHECK(segment_ball_length(Point(-5, 0.6), Point(5, 0.6), Point(0, 0), 1.0) == doctest::Approx(1.6));
  CHECK(segment_ball_length(Point(0, 0), Point(5, 0), Point(0, 0), 1.0) == doctest::Approx(1.0));
  CHECK(segment_ball_length(Point(-5, 2), Point(5, 2), Point(0, 0), 1.0) == 0.0);

  const auto c = clip_segment(Point(-3, 0), Point(3, 0), 1.0);
  REQUIRE(c);
  CHECK(c->first[0] == doctest::Approx(-1.0));
  CHECK(c->second[0] == doctest::Approx(1.0));
  CHECK_FALSE(clip_segment(Point(-3, 2), Point(3, 2), 1.0));
  const auto diag = clip_segment(Point(0, 0), Point(4, 2), 1.0);
  REQUIRE(diag);
  CHECK(diag->second[0] == doctest::Approx(1.0));
  CHECK(diag->second[1] == doctest::Approx(0.5));
}

TEST_CASE("distance to faces") {
  CHECK(distance_to_face(Point(0.5, 0), 1.0, 0, 1) == doctest::Approx(0.5));
  CHECK(distance_to_face(Point(0.5, 0), 1.0, 0, -1) == doctest::Approx(1.5));
  CHECK(distance_to_face(Point(0, 3), 1.0, 0, 1) == doctest::Approx(std::sqrt(1.0 + 4.0)));
  CHECK(distance_to_boundary(Point(0.25, -0.5), 1.0) == doctest::Approx(0.5));
}
