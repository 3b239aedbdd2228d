#include "coxperc/oracles.hpp"

#include <algorithm>
#include <deque>
#include <numbers>

#include "coxperc/boolmodel.hpp"

namespace coxperc {

namespace {

// Labels by breadth-first search over the full overlap graph, numbered in
// order of first appearance.
std::vector<int> brute_labels(const std::vector<Point>& c, const std::vector<double>& r) {
  const std::size_t n = c.size();
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::deque<std::size_t> q{s};
    label[s] = next;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop_front();
      for (std::size_t j = 0; j < n; ++j) {
        if (label[j] >= 0) continue;
        double d2 = 0.0;
        for (int k = 0; k < c[i].dim(); ++k) d2 += (c[i][k] - c[j][k]) * (c[i][k] - c[j][k]);
        if (d2 < (r[i] + r[j]) * (r[i] + r[j])) {
          label[j] = next;
          q.push_back(j);
        }
      }
    }
    ++next;
  }
  return label;
}

struct P2 {
  double x, y;
};

double cross(const P2& o, const P2& a, const P2& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

std::vector<P2> convex_hull(std::vector<P2> p) {
  std::sort(p.begin(), p.end(), [](const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<P2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

double hull_diameter(const std::vector<P2>& h) {
  auto d2 = [](const P2& a, const P2& b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); };
  const std::size_t n = h.size();
  if (n == 1) return 0.0;
  if (n == 2) return std::sqrt(d2(h[0], h[1]));
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const P2& a = h[i];
    const P2& b = h[(i + 1) % n];
    while (std::abs(cross(a, b, h[(j + 1) % n])) > std::abs(cross(a, b, h[j]))) j = (j + 1) % n;
    best = std::max({best, d2(a, h[j]), d2(b, h[j])});
  }
  return std::sqrt(best);
}

}  // namespace

std::vector<ClusteringOracleRow> clustering_oracle(const std::vector<int>& dims, int trials, int max_points, Seed seed) {
  if (trials < 1 || max_points < 1) throw std::invalid_argument("clustering_oracle: trials and max_points must be >= 1");
  std::vector<ClusteringOracleRow> out;
  for (int dim : dims) {
    check_dim(dim);
    ClusteringOracleRow row{dim, trials, 0, max_points};
    for (int t = 0; t < trials; ++t) {
      Rng rng = seed.child(static_cast<std::uint64_t>(dim)).child(static_cast<std::uint64_t>(t)).rng();
      const int n = 1 + static_cast<int>(uniform01(rng) * max_points);
      // Box chosen so the expected degree sits near the percolation range.
      const double box = std::pow(static_cast<double>(n), 1.0 / dim) * 0.6;
      std::vector<Point> c;
      std::vector<double> r;
      for (int i = 0; i < n; ++i) {
        Point p = Point::zero(dim);
        for (int k = 0; k < dim; ++k) p[k] = uniform(rng, -box, box);
        c.push_back(p);
        // A few exact duplicates and zero radii exercise degenerate cases.
        const double u = uniform01(rng);
        r.push_back(u < 0.05 ? 0.0 : uniform(rng, 0.0, 1.2));
        if (u > 0.97 && i > 0) c.back() = c[static_cast<std::size_t>(i - 1)];
      }
      if (build_clusters(c, r).label != brute_labels(c, r)) ++row.mismatches;
    }
    out.push_back(row);
  }
  return out;
}

std::vector<DiameterOracleRow> diameter_oracle(int clusters, double pitch, Seed seed) {
  if (clusters < 1 || !(pitch > 0.0)) throw std::invalid_argument("diameter_oracle: need clusters >= 1 and pitch > 0");
  std::vector<DiameterOracleRow> out;
  for (int q = 0; q < clusters; ++q) {
    Rng rng = seed.child(static_cast<std::uint64_t>(q)).rng();
    const int k = 2 + static_cast<int>(uniform01(rng) * 7);
    std::vector<Point> c{Point::zero(2)};
    std::vector<double> r{uniform(rng, 0.2, 1.5)};
    for (int i = 1; i < k; ++i) {
      // Attach to a random earlier disk so the union stays connected.
      const auto parent = static_cast<std::size_t>(uniform01(rng) * i);
      const double ri = uniform(rng, 0.2, 1.5);
      const double dist = uniform(rng, 0.0, 0.999) * (r[parent] + ri);
      const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      Point p = c[parent];
      p[0] += dist * std::cos(th);
      p[1] += dist * std::sin(th);
      c.push_back(p);
      r.push_back(ri);
    }
    std::vector<P2> pts;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto m = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * r[i] / pitch));
      for (std::size_t j = 0; j < m; ++j) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        pts.push_back({c[i][0] + r[i] * std::cos(th), c[i][1] + r[i] * std::sin(th)});
      }
    }
    std::vector<int> members(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) members[i] = static_cast<int>(i);
    DiameterOracleRow row;
    row.cluster = q;
    row.balls = k;
    row.formula = cluster_diameter(c, r, members);
    row.sampled = hull_diameter(convex_hull(pts));
    row.abs_diff = std::abs(row.formula - row.sampled);
    out.push_back(row);
  }
  return out;
}

std::vector<VolumeOracleRow> volume_oracle(std::int64_t samples, double separation, Seed seed) {
  if (!(separation >= 0.0 && separation < 2.0)) throw std::invalid_argument("volume_oracle: separation must lie in [0, 2)");
  std::vector<VolumeOracleRow> out;
  auto row = [&](std::string name, double exact, const std::vector<Point>& c, const std::vector<double>& r, Seed s) {
    const VolumeEstimate v = union_volume_mc(c, r, samples, s);
    out.push_back({std::move(name), exact, v.estimate, v.se, v.se > 0.0 ? (v.estimate - exact) / v.se : 0.0});
  };
  row("disk", std::numbers::pi, {Point::zero(2)}, {1.0}, seed.child(0));
  const double d = separation;
  const double lens = 2.0 * std::acos(d / 2.0) - (d / 2.0) * std::sqrt(4.0 - d * d);
  Point b = Point::zero(2);
  b[0] = d;
  row("two_disks", 2.0 * std::numbers::pi - lens, {Point::zero(2), b}, {1.0, 1.0}, seed.child(1));
  return out;
}

}  // namespace coxperc
