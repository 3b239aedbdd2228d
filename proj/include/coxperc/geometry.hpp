#pragma once

// Exact intersection measures used by the environments and the oracles.

#include <optional>
#include <utility>

#include "coxperc/core.hpp"

namespace coxperc {

/// Area of the disk B_r(c) intersected with [x0, x1] x [y0, y1].
double disk_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1);

/// |B_r(c) ∩ box| for an axis-aligned box given by per-axis bounds lo[k], hi[k].
/// Exact for d = 1, 2; Gauss-Legendre over slices for d = 3.
double ball_box_volume(const Point& c, double r, const std::array<double, 3>& lo, const std::array<double, 3>& hi);

/// |B_r1 ∩ B_r2| for two balls whose centers are `dist` apart.
double ball_ball_intersection(int dim, double dist, double r1, double r2);

/// Length of the segment [a, b] inside the open ball B_r(c).
double segment_ball_length(const Point& a, const Point& b, const Point& c, double r);

/// Liang-Barsky clip of [a, b] to the cube [-h, h]^dim. Empty when the segment misses it.
std::optional<std::pair<Point, Point>> clip_segment(const Point& a, const Point& b, double h);

/// Euclidean distance from p to the face {x_axis = side * h, |x_k| <= h for k != axis}.
double distance_to_face(const Point& p, double h, int axis, int side);

/// Distance from p (inside the cube [-h, h]^dim) to the cube's boundary.
inline double distance_to_boundary(const Point& p, double h) { return h - p.max_abs(); }

}  // namespace coxperc
