#include "coxperc/boolmodel.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <numeric>

#include "coxperc/ball_index.hpp"
#include "coxperc/geometry.hpp"

namespace coxperc {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

ClusterLabels compact(UnionFind& uf, std::size_t n) {
  ClusterLabels out;
  out.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(uf.find(static_cast<int>(i)));
    if (root_label[r] < 0) {
      root_label[r] = out.count++;
      out.members.emplace_back();
    }
    out.label[i] = root_label[r];
    out.members[static_cast<std::size_t>(root_label[r])].push_back(static_cast<int>(i));
  }
  return out;
}

double censor_pad(const MarkedPointSet& mps) {
  if (std::isfinite(mps.radius_bound)) return mps.radius_bound;
  double r = 0.0;
  for (double x : mps.radii) r = std::max(r, x);
  return r;
}

}  // namespace

ClusterLabels build_clusters(std::span<const Point> centers, std::span<const double> radii) {
  const std::size_t n = centers.size();
  if (radii.size() != n) throw std::invalid_argument("build_clusters: centers and radii differ in length");
  UnionFind uf(n);
  if (n < 2) return compact(uf, n);
  const int dim = centers[0].dim();

  std::vector<double> sorted(radii.begin(), radii.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
  const double median = sorted[n / 2];
  const double rmax = *std::max_element(radii.begin(), radii.end());
  if (!(rmax > 0.0)) return compact(uf, n);

  std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    lo[static_cast<std::size_t>(k)] = hi[static_cast<std::size_t>(k)] = centers[0][k];
    for (const Point& p : centers) {
      lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], p[k]);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], p[k]);
    }
  }
  // Small balls (radius <= median) only need the 3^d stencil once cells are >= 2 * median.
  double cell = median > 0.0 ? 2.0 * median : 2.0 * rmax;
  std::array<std::int64_t, 3> nc{1, 1, 1};
  for (;;) {
    double total = 1.0;
    for (int k = 0; k < dim; ++k) {
      nc[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor((hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]) / cell)) + 1;
      total *= static_cast<double>(nc[static_cast<std::size_t>(k)]);
    }
    if (total <= 4.0 * static_cast<double>(n) + 64.0) break;
    cell *= 1.5;
  }
  auto coord = [&](double x, int k) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((x - lo[static_cast<std::size_t>(k)]) / cell)), 0,
                                    nc[static_cast<std::size_t>(k)] - 1);
  };
  auto cell_id = [&](std::int64_t a, std::int64_t b, std::int64_t c) { return static_cast<std::size_t>((c * nc[1] + b) * nc[0] + a); };
  const std::size_t ncell = static_cast<std::size_t>(nc[0] * nc[1] * nc[2]);

  // CSR buckets.
  std::vector<std::size_t> start(ncell + 1, 0), of(n);
  std::vector<std::array<std::int64_t, 3>> cc(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::int64_t, 3> c{0, 0, 0};
    for (int k = 0; k < dim; ++k) c[static_cast<std::size_t>(k)] = coord(centers[i][k], k);
    cc[i] = c;
    of[i] = cell_id(c[0], c[1], c[2]);
    ++start[of[i] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) start[c + 1] += start[c];
  std::vector<int> items(n);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) items[fill[of[i]]++] = static_cast<int>(i);
  }

  // Each pair is examined once, from the ball that is larger in (radius, index) order.
  auto precedes = [&](std::size_t j, std::size_t i) { return radii[j] < radii[i] || (radii[j] == radii[i] && j < i); };
  auto link = [&](std::size_t i, std::size_t j) {
    const double s = radii[i] + radii[j];
    if (squared_distance(centers[i], centers[j]) < s * s) uf.unite(static_cast<int>(i), static_cast<int>(j));
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double reach = radii[i] <= median ? 0.0 : 2.0 * radii[i];
    std::array<std::int64_t, 3> a{0, 0, 0}, b{0, 0, 0};
    double scan = 1.0;
    for (int k = 0; k < dim; ++k) {
      if (reach == 0.0) {
        a[static_cast<std::size_t>(k)] = std::max<std::int64_t>(0, cc[i][static_cast<std::size_t>(k)] - 1);
        b[static_cast<std::size_t>(k)] = std::min<std::int64_t>(nc[static_cast<std::size_t>(k)] - 1, cc[i][static_cast<std::size_t>(k)] + 1);
      } else {
        a[static_cast<std::size_t>(k)] = coord(centers[i][k] - reach, k);
        b[static_cast<std::size_t>(k)] = coord(centers[i][k] + reach, k);
      }
      scan *= static_cast<double>(b[static_cast<std::size_t>(k)] - a[static_cast<std::size_t>(k)] + 1);
    }
    if (scan > static_cast<double>(n)) {
      for (std::size_t j = 0; j < n; ++j)
        if (precedes(j, i)) link(i, j);
      continue;
    }
    for (std::int64_t z = a[2]; z <= b[2]; ++z)
      for (std::int64_t y = a[1]; y <= b[1]; ++y)
        for (std::int64_t x = a[0]; x <= b[0]; ++x) {
          const std::size_t c = cell_id(x, y, z);
          for (std::size_t p = start[c]; p < start[c + 1]; ++p) {
            const auto j = static_cast<std::size_t>(items[p]);
            if (precedes(j, i)) link(i, j);
          }
        }
  }
  return compact(uf, n);
}

double cluster_diameter(std::span<const Point> centers, std::span<const double> radii, const std::vector<int>& members) {
  if (members.empty()) return 0.0;
  const int dim = centers[static_cast<std::size_t>(members[0])].dim();
  Point c = Point::zero(dim);
  for (int m : members)
    for (int k = 0; k < dim; ++k) c[k] += centers[static_cast<std::size_t>(m)][k] / static_cast<double>(members.size());
  // |X_i - X_j| + rho_i + rho_j <= a_i + a_j with a_i = |X_i - c| + rho_i.
  std::vector<std::pair<double, int>> order;
  order.reserve(members.size());
  for (int m : members) order.emplace_back(distance(centers[static_cast<std::size_t>(m)], c) + radii[static_cast<std::size_t>(m)], m);
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
  double best = 0.0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (2.0 * order[p].first <= best && order[p].first + order[0].first <= best) break;
    const auto i = static_cast<std::size_t>(order[p].second);
    best = std::max(best, 2.0 * radii[i]);
    for (std::size_t q = 0; q < p; ++q) {
      if (order[p].first + order[q].first <= best) break;
      const auto j = static_cast<std::size_t>(order[q].second);
      best = std::max(best, distance(centers[i], centers[j]) + radii[i] + radii[j]);
    }
  }
  return best;
}

VolumeEstimate union_volume_mc(std::span<const Point> centers, std::span<const double> radii, std::int64_t n_samples, Seed seed) {
  if (centers.size() != radii.size()) throw std::invalid_argument("union_volume_mc: centers and radii differ in length");
  if (centers.empty()) return {};
  const int dim = centers[0].dim();
  if (dim == 1) {
    std::vector<std::pair<double, double>> iv;
    for (std::size_t i = 0; i < centers.size(); ++i)
      if (radii[i] > 0.0) iv.emplace_back(centers[i][0] - radii[i], centers[i][0] + radii[i]);
    std::sort(iv.begin(), iv.end());
    double total = 0.0, cur_lo = 0.0, cur_hi = 0.0;
    bool open = false;
    for (const auto& [a, b] : iv) {
      if (!open || a > cur_hi) {
        if (open) total += cur_hi - cur_lo;
        cur_lo = a, cur_hi = b, open = true;
      } else {
        cur_hi = std::max(cur_hi, b);
      }
    }
    if (open) total += cur_hi - cur_lo;
    return {total, 0.0};
  }
  if (n_samples < 1000) throw std::invalid_argument("union_volume_mc: need at least 1000 samples");
  std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    lo[static_cast<std::size_t>(k)] = kInf, hi[static_cast<std::size_t>(k)] = -kInf;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], centers[i][k] - radii[i]);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], centers[i][k] + radii[i]);
    }
  }
  double box = 1.0;
  for (int k = 0; k < dim; ++k) box *= hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
  if (!(box > 0.0)) return {};
  const BallIndex index(centers, radii);
  Rng rng = seed.rng();
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < n_samples; ++s) {
    Point p = Point::zero(dim);
    for (int k = 0; k < dim; ++k) p[k] = uniform(rng, lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
    bool in = false;
    index.for_each_covering(p, [&](std::size_t) { in = true; });
    hits += in ? 1 : 0;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(n_samples);
  return {box * f, box * std::sqrt(f * (1.0 - f) / static_cast<double>(n_samples))};
}

ClusterStats origin_cluster_stats(const MarkedPointSet& mps, const std::vector<int>& members, const OriginOptions& opt) {
  ClusterStats st;
  if (members.empty()) return st;
  st.empty = false;
  st.point_count = static_cast<std::int64_t>(members.size());
  st.diameter = cluster_diameter(mps.points, mps.radii, members);
  const double w = mps.window.padded_half_width();
  const double pad = censor_pad(mps);
  double rmax = 0.0;
  for (int m : members) {
    const auto i = static_cast<std::size_t>(m);
    st.reach = std::max(st.reach, mps.points[i].norm() + mps.radii[i]);
    rmax = std::max(rmax, mps.radii[i]);
    // A ball outside the padded window of radius <= pad can only reach members within pad of the boundary.
    if (w - mps.points[i].max_abs() - mps.radii[i] < pad) st.censored = true;
  }
  if (opt.volume) {
    std::vector<Point> c;
    std::vector<double> r;
    for (int m : members) c.push_back(mps.points[static_cast<std::size_t>(m)]), r.push_back(mps.radii[static_cast<std::size_t>(m)]);
    std::int64_t n = opt.volume_samples;
    if (n <= 0) {
      double box = 1.0;
      for (int k = 0; k < mps.dim(); ++k) {
        double a = kInf, b = -kInf;
        for (std::size_t i = 0; i < c.size(); ++i) a = std::min(a, c[i][k] - r[i]), b = std::max(b, c[i][k] + r[i]);
        box *= b - a;
      }
      const double target = 0.02 * ball_volume(mps.dim(), rmax);
      const double want = target > 0.0 ? std::ceil(std::pow(box / target, 2.0)) : 1000.0;
      n = static_cast<std::int64_t>(std::clamp(want, 1000.0, 2e6));
    }
    st.volume = union_volume_mc(c, r, n, mps.mark_seed.child(99));
  }
  return st;
}

ClusterStats origin_cluster(const MarkedPointSet& mps, const ClusterLabels& labels, const OriginOptions& opt) {
  const Point o = Point::zero(mps.dim());
  for (std::size_t i = 0; i < mps.size(); ++i) {
    if (distance(mps.points[i], o) < mps.radii[i]) {
      return origin_cluster_stats(mps, labels.members[static_cast<std::size_t>(labels.label[i])], opt);
    }
  }
  return {};
}

std::vector<int> origin_members(const MarkedPointSet& mps) {
  std::vector<int> out;
  if (mps.size() == 0) return out;
  const BallIndex index(mps.points, mps.radii);
  std::vector<char> seen(mps.size(), 0);
  std::deque<std::size_t> queue;
  index.for_each_covering(Point::zero(mps.dim()), [&](std::size_t i) {
    if (!seen[i]) seen[i] = 1, queue.push_back(i);
  });
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    out.push_back(static_cast<int>(u));
    index.for_each_intersecting(mps.points[u], mps.radii[u], [&](std::size_t j) {
      if (!seen[j]) seen[j] = 1, queue.push_back(j);
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool crossing_exists(const MarkedPointSet& mps, const ClusterLabels& labels, const Window& inner, int axis) {
  if (axis < 0 || axis >= mps.dim()) throw std::invalid_argument("crossing_exists: axis out of range");
  const double h = inner.half_width();
  std::vector<char> low(static_cast<std::size_t>(labels.count), 0), high(static_cast<std::size_t>(labels.count), 0);
  for (std::size_t i = 0; i < mps.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels.label[i]);
    if (distance_to_face(mps.points[i], h, axis, -1) < mps.radii[i]) low[c] = 1;
    if (distance_to_face(mps.points[i], h, axis, +1) < mps.radii[i]) high[c] = 1;
    if (low[c] && high[c]) return true;
  }
  return false;
}

int giant_cluster_count(const MarkedPointSet& mps, const ClusterLabels& labels, const Window& inner) {
  const double h = inner.half_width();
  std::vector<char> spans(static_cast<std::size_t>(labels.count), 0);
  for (int axis = 0; axis < mps.dim(); ++axis) {
    std::vector<char> low(static_cast<std::size_t>(labels.count), 0), high(static_cast<std::size_t>(labels.count), 0);
    for (std::size_t i = 0; i < mps.size(); ++i) {
      const auto c = static_cast<std::size_t>(labels.label[i]);
      if (distance_to_face(mps.points[i], h, axis, -1) < mps.radii[i]) low[c] = 1;
      if (distance_to_face(mps.points[i], h, axis, +1) < mps.radii[i]) high[c] = 1;
    }
    for (std::size_t c = 0; c < spans.size(); ++c) spans[c] = spans[c] || (low[c] && high[c]);
  }
  return static_cast<int>(std::count(spans.begin(), spans.end(), 1));
}

std::string to_string(GVariant v) { return v == GVariant::point_cluster ? "point_cluster" : "ball_cluster"; }

bool g_event(const MarkedPointSet& mps, double alpha, GVariant variant) {
  if (!(alpha > 0.0)) throw std::invalid_argument("g_event: alpha must be positive");
  if (10.0 * alpha > mps.window.padded_half_width() * (1.0 + 1e-12)) {
    throw std::out_of_range("g_event: B_{10 alpha} leaves the padded window");
  }
  std::vector<Point> c;
  std::vector<double> r;
  for (std::size_t i = 0; i < mps.size(); ++i) {
    if (mps.points[i].norm() < 10.0 * alpha) c.push_back(mps.points[i]), r.push_back(mps.radii[i]);
  }
  if (c.empty()) return false;
  const ClusterLabels lab = build_clusters(c, r);
  std::vector<char> chosen(static_cast<std::size_t>(lab.count), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double reach = variant == GVariant::point_cluster ? 0.0 : alpha;
    if (c[i].norm() < r[i] + reach) chosen[static_cast<std::size_t>(lab.label[i])] = 1;
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (chosen[static_cast<std::size_t>(lab.label[i])] && c[i].norm() + r[i] > 8.0 * alpha) return true;
  }
  return false;
}

void write_clusters_csv(std::ostream& os, const MarkedPointSet& mps, const ClusterLabels& labels) {
  os << "id,";
  for (int k = 0; k < mps.dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "radius,cluster\n";
  char buf[32];
  for (std::size_t i = 0; i < mps.size(); ++i) {
    os << i << ',';
    for (int k = 0; k < mps.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mps.points[i][k]);
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", mps.radii[i]);
    os << buf << ',' << labels.label[i] << '\n';
  }
}

}  // namespace coxperc
