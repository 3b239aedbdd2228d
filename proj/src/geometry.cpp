#include "coxperc/geometry.hpp"

#include <algorithm>

#include "coxperc/stats.hpp"

namespace coxperc {

namespace {

// Antiderivative of sqrt(r^2 - t^2).
double semi(double t, double r) {
  t = std::clamp(t, -r, r);
  return 0.5 * (t * std::sqrt(std::max(0.0, r * r - t * t)) + r * r * std::asin(t / r));
}

// Area of the disk B_r(0) ∩ {X <= x, Y <= y}.
double quadrant(double x, double y, double r) {
  if (y <= -r || x <= -r) return 0.0;
  const double xe = std::min(x, r);
  if (y >= r) return 2.0 * (semi(xe, r) - semi(-r, r));
  const double ts = std::sqrt(r * r - y * y);
  // Pieces on [-r, -ts], [-ts, ts], [ts, r].
  double total = 0.0;
  auto chord = [&](double a, double b) { return b > a ? y * (b - a) + semi(b, r) - semi(a, r) : 0.0; };
  auto full = [&](double a, double b) { return b > a ? 2.0 * (semi(b, r) - semi(a, r)) : 0.0; };
  if (y >= 0.0) {
    total += full(-r, std::min(xe, -ts));
    total += chord(-ts, std::min(xe, ts));
    total += full(ts, xe);
  } else {
    total += chord(-ts, std::min(xe, ts));
  }
  return total;
}

}  // namespace

double disk_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1) {
  if (r <= 0.0 || x1 <= x0 || y1 <= y0) return 0.0;
  x0 -= cx, x1 -= cx, y0 -= cy, y1 -= cy;
  const double a = quadrant(x1, y1, r) - quadrant(x0, y1, r) - quadrant(x1, y0, r) + quadrant(x0, y0, r);
  return std::max(0.0, a);
}

double ball_box_volume(const Point& c, double r, const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
  if (r <= 0.0) return 0.0;
  switch (c.dim()) {
    case 1: return std::max(0.0, std::min(hi[0], c[0] + r) - std::max(lo[0], c[0] - r));
    case 2: return disk_rect_area(c[0], c[1], r, lo[0], hi[0], lo[1], hi[1]);
    case 3: {
      const double a = std::max(lo[0], c[0] - r), b = std::min(hi[0], c[0] + r);
      if (b <= a) return 0.0;
      // Whole ball inside: avoid quadrature.
      bool inside = true;
      for (int k = 0; k < 3; ++k) inside = inside && lo[k] <= c[k] - r && c[k] + r <= hi[k];
      if (inside) return ball_volume(3, r);
      auto slice = [&](double x) {
        const double dx = x - c[0];
        const double rr = std::sqrt(std::max(0.0, r * r - dx * dx));
        return disk_rect_area(c[1], c[2], rr, lo[1], hi[1], lo[2], hi[2]);
      };
      return gauss_legendre(slice, a, b, 8);
    }
    default: check_dim(c.dim()); return 0.0;
  }
}

double ball_ball_intersection(int dim, double d, double r1, double r2) {
  check_dim(dim);
  if (r1 <= 0.0 || r2 <= 0.0 || d >= r1 + r2) return 0.0;
  const double rmin = std::min(r1, r2), rmax = std::max(r1, r2);
  if (d <= rmax - rmin) return ball_volume(dim, rmin);
  switch (dim) {
    case 1: return r1 + r2 - d;
    case 2: {
      const double a1 = r1 * r1 * std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
      const double a2 = r2 * r2 * std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
      const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
      return a1 + a2 - 0.5 * std::sqrt(std::max(0.0, k));
    }
    default: {
      const double s = r1 + r2 - d;
      return kPi * s * s * (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1) /
             (12.0 * d);
    }
  }
}

double segment_ball_length(const Point& a, const Point& b, const Point& c, double r) {
  // Solve |a + t (b - a) - c|^2 < r^2 for t in [0, 1].
  double dd = 0.0, fd = 0.0, ff = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = b[k] - a[k], f = a[k] - c[k];
    dd += d * d, fd += f * d, ff += f * f;
  }
  if (dd <= 0.0) return 0.0;
  const double disc = fd * fd - dd * (ff - r * r);
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-fd - sq) / dd), t1 = std::min(1.0, (-fd + sq) / dd);
  return t1 > t0 ? (t1 - t0) * std::sqrt(dd) : 0.0;
}

std::optional<std::pair<Point, Point>> clip_segment(const Point& a, const Point& b, double h) {
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double d = b[k] - a[k];
    const double p[2] = {-d, d};
    const double q[2] = {a[k] + h, h - a[k]};
    for (int s = 0; s < 2; ++s) {
      if (p[s] == 0.0) {
        if (q[s] < 0.0) return std::nullopt;
        continue;
      }
      const double t = q[s] / p[s];
      if (p[s] < 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
    }
  }
  if (t0 > t1) return std::nullopt;
  Point p0 = a, p1 = a;
  for (int k = 0; k < a.dim(); ++k) {
    p0[k] = a[k] + t0 * (b[k] - a[k]);
    p1[k] = a[k] + t1 * (b[k] - a[k]);
  }
  return std::make_pair(p0, p1);
}

double distance_to_face(const Point& p, double h, int axis, int side) {
  double s = 0.0;
  for (int k = 0; k < p.dim(); ++k) {
    const double d = k == axis ? p[k] - side * h : std::max(0.0, std::abs(p[k]) - h);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace coxperc
