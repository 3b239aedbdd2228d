#include "coxperc/tessellation.hpp"

#include <cstdint>

#include <boost/polygon/voronoi.hpp>

#include "coxperc/geometry.hpp"

namespace coxperc {

namespace bp = boost::polygon;

namespace {

// Distance from p to the cube [-h, h]^2 (0 inside).
double box_distance(double x, double y, double h) {
  const double dx = std::max(0.0, std::abs(x) - h), dy = std::max(0.0, std::abs(y) - h);
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<Segment> tessellation_edges(const std::vector<Point>& sites, double site_half, double keep, TessKind kind) {
  if (!(site_half > keep)) throw std::invalid_argument("tessellation: site box must exceed the kept window");
  if (sites.size() < 3) throw TessellationError("tessellation: fewer than three sites in the sample box");

  // Integer input keeps the sweep exact; 1e9 fits comfortably in int32.
  const double scale = 1e9 / site_half;
  std::vector<bp::point_data<std::int32_t>> pts;
  pts.reserve(sites.size());
  for (const Point& p : sites) {
    pts.emplace_back(static_cast<std::int32_t>(std::lround(p[0] * scale)), static_cast<std::int32_t>(std::lround(p[1] * scale)));
  }
  bp::voronoi_diagram<double> vd;
  bp::construct_voronoi(pts.begin(), pts.end(), &vd);

  auto site_of = [&](const bp::voronoi_cell<double>* cell) {
    const auto& q = pts[cell->source_index()];
    return Point(q.x() / scale, q.y() / scale);
  };
  auto vertex_point = [&](const bp::voronoi_vertex<double>* v) { return Point(v->x() / scale, v->y() / scale); };
  // A vertex is certified when its empty circumdisk lies inside the sample box.
  auto certified = [&](const bp::voronoi_vertex<double>* v) {
    const Point c = vertex_point(v);
    const double r = distance(c, site_of(v->incident_edge()->cell()));
    return std::max(std::abs(c[0]), std::abs(c[1])) + r <= site_half * (1.0 - 1e-12);
  };

  for (const auto& v : vd.vertices()) {
    const Point c = vertex_point(&v);
    const double r = distance(c, site_of(v.incident_edge()->cell()));
    if (box_distance(c[0], c[1], keep) < r && !certified(&v)) {
      throw TessellationError("tessellation: a circumdisk touching the window leaves the sample box; increase the pad");
    }
  }

  std::vector<Segment> out;
  for (const auto& e : vd.edges()) {
    if (!e.is_primary()) continue;
    const auto i = e.cell()->source_index(), j = e.twin()->cell()->source_index();
    if (i > j) continue;  // each undirected edge once
    const Point si = site_of(e.cell()), sj = site_of(e.twin()->cell());
    const bool finite = e.vertex0() != nullptr && e.vertex1() != nullptr;
    if (kind == TessKind::delaunay) {
      auto clipped = clip_segment(si, sj, keep);
      if (!clipped) continue;
      if (e.vertex0() == nullptr && e.vertex1() == nullptr) {
        throw TessellationError("tessellation: degenerate collinear sites near the window");
      }
      if (!finite) throw TessellationError("tessellation: hull edge crosses the window; increase the pad");
      out.push_back({clipped->first, clipped->second});
    } else {
      if (!finite) {
        const auto* v = e.vertex0() ? e.vertex0() : e.vertex1();
        const bool near = (v != nullptr && box_distance(v->x() / scale, v->y() / scale, keep) == 0.0) ||
                          clip_segment(si, sj, keep).has_value();
        if (near) throw TessellationError("tessellation: unbounded cell reaches the window; increase the pad");
        continue;
      }
      const Point a = vertex_point(e.vertex0()), b = vertex_point(e.vertex1());
      auto clipped = clip_segment(a, b, keep);
      if (!clipped) continue;
      if (!certified(e.vertex0()) || !certified(e.vertex1())) {
        throw TessellationError("tessellation: uncertified edge inside the window; increase the pad");
      }
      if (distance(clipped->first, clipped->second) > 0.0) out.push_back({clipped->first, clipped->second});
    }
  }
  return out;
}

}  // namespace coxperc
