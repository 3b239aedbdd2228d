#include "coxperc/environments.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <memory>
#include <unordered_map>

#include "coxperc/geometry.hpp"
#include "coxperc/tessellation.hpp"

namespace coxperc {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

// Shortest text that reads back as x.
std::string num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Pad of the tessellation site box beyond the padded window.
double tessellation_pad(double mu) { return 12.0 / std::sqrt(mu); }

Point uniform_in_cube(Rng& rng, int dim, double h) {
  Point p = Point::zero(dim);
  for (int k = 0; k < dim; ++k) p[k] = uniform(rng, -h, h);
  return p;
}

// Distance from c to the cube [-h, h]^dim (0 inside).
double cube_distance(const Point& c, double h) {
  double s = 0.0;
  for (int k = 0; k < c.dim(); ++k) {
    const double d = std::max(0.0, std::abs(c[k]) - h);
    s += d * d;
  }
  return std::sqrt(s);
}

// Driving balls of a stationary Boolean model (intensity mu, radius law)
// whose balls meet [-w, w]^dim. Exact: the number of (center, radius) pairs
// with center in Q_{w + rho} is Poisson(mu E[(2(w + rho))^d]), and the radius
// of such a pair follows the (w + rho)^d size-biased law, a binomial mixture
// of r^j nu(dr).
void driving_balls(Rng& rng, int dim, double mu, const RadiusLaw& law, double w, std::vector<Point>& centers,
                   std::vector<double>& radii) {
  std::array<double, 4> weight{};
  double total = 0.0;
  for (int j = 0; j <= dim; ++j) {
    const double mj = j == 0 ? 1.0 : law.moment(j);
    if (!std::isfinite(mj)) throw std::invalid_argument("driving radius law needs a finite moment of order dim");
    weight[static_cast<std::size_t>(j)] = binomial(dim, j) * std::pow(2.0 * w, dim - j) * std::pow(2.0, j) * mj;
    total += weight[static_cast<std::size_t>(j)];
  }
  const std::int64_t n = poisson(rng, mu * total);
  for (std::int64_t i = 0; i < n; ++i) {
    double u = uniform01(rng) * total;
    int j = 0;
    while (j < dim && u >= weight[static_cast<std::size_t>(j)]) u -= weight[static_cast<std::size_t>(j)], ++j;
    const double r = law.sample_size_biased(j, rng);
    const Point c = uniform_in_cube(rng, dim, w + r);
    if (cube_distance(c, w) < r) {
      centers.push_back(c);
      radii.push_back(r);
    }
  }
}

void sample_lines(Rng& rng, double rate, double lo, double hi, std::vector<double>& out) {
  const std::int64_t n = poisson(rng, rate * (hi - lo));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(uniform(rng, lo, hi));
  std::sort(out.begin(), out.end());
}

double check_ball_inside(const EnvRealization& env, const Point& c, double alpha) {
  if (c.dim() != env.dim()) throw std::invalid_argument("measure_of_ball: dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("measure_of_ball: alpha must be positive");
  const double w = env.window().padded_half_width();
  if (c.max_abs() + alpha > w * (1.0 + 1e-12)) {
    throw std::out_of_range("measure_of_ball: B_" + num(alpha) + " leaves the padded window of half width " + num(w));
  }
  return w;
}

double grid_measure(const DensityGrid& g, const Point& c, double alpha) {
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int k = 0; k < g.dim; ++k) {
    lo[static_cast<std::size_t>(k)] = std::max(0, static_cast<int>(std::floor((c[k] - alpha - g.lo) / g.h)));
    hi[static_cast<std::size_t>(k)] = std::min(g.n[static_cast<std::size_t>(k)] - 1, static_cast<int>(std::floor((c[k] + alpha - g.lo) / g.h)));
  }
  const double cellv = g.cell_volume();
  double total = 0.0;
  std::array<int, 3> idx{};
  for (idx[2] = lo[2]; idx[2] <= hi[2]; ++idx[2])
    for (idx[1] = lo[1]; idx[1] <= hi[1]; ++idx[1])
      for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
        const double v = g.value[g.cell_index(idx)];
        if (v == 0.0) continue;
        std::array<double, 3> blo{0, 0, 0}, bhi{0, 0, 0};
        double far = 0.0;
        for (int k = 0; k < g.dim; ++k) {
          blo[static_cast<std::size_t>(k)] = g.lo + idx[static_cast<std::size_t>(k)] * g.h;
          bhi[static_cast<std::size_t>(k)] = blo[static_cast<std::size_t>(k)] + g.h;
          const double d = std::max(std::abs(blo[static_cast<std::size_t>(k)] - c[k]), std::abs(bhi[static_cast<std::size_t>(k)] - c[k]));
          far += d * d;
        }
        // Cells entirely inside the ball skip the intersection computation.
        const double part = far <= alpha * alpha ? cellv : ball_box_volume(c, alpha, blo, bhi);
        total += v * part;
      }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// EnvironmentSpec

EnvironmentSpec::EnvironmentSpec(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [](const env::Homogeneous&) {},
                 [](const env::MixedPoisson& m) {
                   const auto& zv = m.z.variant();
                   require(std::holds_alternative<law::TwoPoint>(zv) || std::holds_alternative<law::Pareto>(zv),
                           "mixed_poisson: Z law must be two_point or pareto");
                   const double mean = m.z.moment(1.0);
                   require(std::isfinite(mean) && std::abs(mean - 1.0) <= 1e-9, "mixed_poisson: E[Z] must equal 1, got " + num(mean));
                 },
                 [](const env::IndicatorField& f) {
                   require(f.lambda1 >= 0.0 && f.lambda2 >= 0.0 && std::isfinite(f.lambda1) && std::isfinite(f.lambda2),
                           "indicator_field: lambda1, lambda2 must be finite and >= 0");
                   require(f.lambda1 + f.lambda2 > 0.0, "indicator_field: lambda1 + lambda2 must be positive");
                   require(positive(f.mu), "indicator_field: mu must be positive");
                   require(positive(f.radius), "indicator_field: radius must be positive");
                 },
                 [](const env::ShotNoise& s) {
                   require(positive(s.mu), "shot_noise: mu must be positive");
                   require(positive(s.support_radius), "shot_noise: support_radius must be positive");
                 },
                 [](const env::BooleanCount& b) {
                   require(positive(b.mu), "boolean_count: mu must be positive");
                   require(b.law.supports_size_biased(), "boolean_count: radius law must admit exact sampling (not integer_tail)");
                 },
                 [](const env::VoronoiEdges& t) { require(positive(t.mu), "voronoi_edges: mu must be positive"); },
                 [](const env::DelaunayEdges& t) { require(positive(t.mu), "delaunay_edges: mu must be positive"); },
                 [](const env::ManhattanGrid& m) {
                   require(m.mu_vertical >= 0.0 && m.mu_horizontal >= 0.0 && m.mu_vertical + m.mu_horizontal > 0.0 &&
                               std::isfinite(m.mu_vertical) && std::isfinite(m.mu_horizontal),
                           "manhattan_grid: intensities must be >= 0 with a positive sum");
                 },
             },
             v_);
}

std::string EnvironmentSpec::type_name() const {
  return std::visit(Overloaded{
                        [](const env::Homogeneous&) { return "homogeneous"; },
                        [](const env::MixedPoisson&) { return "mixed_poisson"; },
                        [](const env::IndicatorField&) { return "indicator_field"; },
                        [](const env::ShotNoise&) { return "shot_noise"; },
                        [](const env::BooleanCount&) { return "boolean_count"; },
                        [](const env::VoronoiEdges&) { return "voronoi_edges"; },
                        [](const env::DelaunayEdges&) { return "delaunay_edges"; },
                        [](const env::ManhattanGrid&) { return "manhattan_grid"; },
                    },
                    v_);
}

std::string EnvironmentSpec::describe() const {
  return std::visit(Overloaded{
                        [](const env::Homogeneous&) { return std::string("homogeneous"); },
                        [](const env::MixedPoisson& m) { return "mixed_poisson(z=" + m.z.describe() + ")"; },
                        [](const env::IndicatorField& f) {
                          return "indicator_field(lambda1=" + num(f.lambda1) + ",lambda2=" + num(f.lambda2) + ",mu=" + num(f.mu) +
                                 ",radius=" + num(f.radius) + ")";
                        },
                        [](const env::ShotNoise& s) {
                          return "shot_noise(mu=" + num(s.mu) + ",support_radius=" + num(s.support_radius) + ")";
                        },
                        [](const env::BooleanCount& b) {
                          return "boolean_count(mu=" + num(b.mu) + ",law=" + b.law.describe() + ")";
                        },
                        [](const env::VoronoiEdges& t) { return "voronoi_edges(mu=" + num(t.mu) + ")"; },
                        [](const env::DelaunayEdges& t) { return "delaunay_edges(mu=" + num(t.mu) + ")"; },
                        [](const env::ManhattanGrid& m) {
                          return "manhattan_grid(mu_vertical=" + num(m.mu_vertical) + ",mu_horizontal=" + num(m.mu_horizontal) + ")";
                        },
                    },
                    v_);
}

double EnvironmentSpec::normalization(int dim) const {
  check_dim(dim);
  return std::visit(Overloaded{
                        [](const env::Homogeneous&) { return 1.0; },
                        [](const env::MixedPoisson&) { return 1.0; },
                        [&](const env::IndicatorField& f) {
                          const double p = 1.0 - std::exp(-f.mu * ball_volume(dim, f.radius));
                          const double mean = f.lambda1 * p + f.lambda2 * (1.0 - p);
                          if (!(mean > 0.0)) throw std::invalid_argument("indicator_field: field has zero mean");
                          return 1.0 / mean;
                        },
                        [&](const env::ShotNoise& s) { return 1.0 / (s.mu * ball_volume(dim, s.support_radius)); },
                        [&](const env::BooleanCount& b) {
                          const double m = b.law.moment(dim);
                          if (!std::isfinite(m)) throw std::invalid_argument("boolean_count: E[rho^d] is infinite, no normalization exists");
                          return 1.0 / (b.mu * unit_ball_volume(dim) * m);
                        },
                        // Poisson-Voronoi edge length per unit area is 2 sqrt(mu).
                        [](const env::VoronoiEdges& t) { return 1.0 / (2.0 * std::sqrt(t.mu)); },
                        // Poisson-Delaunay edge length per unit area is 32 sqrt(mu) / (3 pi).
                        [](const env::DelaunayEdges& t) { return 3.0 * kPi / (32.0 * std::sqrt(t.mu)); },
                        [](const env::ManhattanGrid& m) { return 1.0 / (m.mu_vertical + m.mu_horizontal); },
                    },
                    v_);
}

double EnvironmentSpec::required_margin() const {
  return std::visit(Overloaded{
                        [](const env::ShotNoise& s) { return s.support_radius; },
                        [](const env::IndicatorField& f) { return f.radius; },
                        [](const env::BooleanCount& b) {
                          const double r = b.law.esssup();
                          return std::isfinite(r) ? r : 0.0;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    v_);
}

bool EnvironmentSpec::supports_dim(int dim) const {
  const bool planar = std::holds_alternative<env::VoronoiEdges>(v_) || std::holds_alternative<env::DelaunayEdges>(v_) ||
                      std::holds_alternative<env::ManhattanGrid>(v_);
  return dim >= 1 && dim <= 3 && (!planar || dim == 2);
}

bool EnvironmentSpec::has_radius_field() const {
  return std::holds_alternative<env::BooleanCount>(v_) || std::holds_alternative<env::ManhattanGrid>(v_) ||
         std::holds_alternative<env::DelaunayEdges>(v_) || std::holds_alternative<env::VoronoiEdges>(v_);
}

// ---------------------------------------------------------------------------
// Realizations

double DensityGrid::at(const Point& p) const {
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    c[static_cast<std::size_t>(k)] = std::clamp(static_cast<int>(std::floor((p[k] - lo) / h)), 0, n[static_cast<std::size_t>(k)] - 1);
  }
  return value[cell_index(c)];
}

EnvRealization::EnvRealization(std::optional<EnvironmentSpec> spec, Window window, Representation rep, Seed seed)
    : spec_(std::move(spec)), window_(window), rep_(std::move(rep)), seed_(seed) {}

EnvRealization EnvRealization::from_segments(const Window& window, std::vector<Segment> segments, double weight) {
  if (window.dim() != 2) throw std::invalid_argument("from_segments: segment environments are planar");
  const double w = window.padded_half_width();
  for (const Segment& s : segments) {
    if (s.a.dim() != 2 || s.b.dim() != 2) throw std::invalid_argument("from_segments: segments must be planar");
    if (s.a.max_abs() > w || s.b.max_abs() > w) throw std::invalid_argument("from_segments: segment leaves the padded window");
  }
  return EnvRealization(std::nullopt, window, SegmentSet{std::move(segments), weight}, Seed{0});
}

EnvRealization EnvRealization::from_lines(const EnvironmentSpec& spec, const Window& window, std::vector<double> vertical,
                                          std::vector<double> horizontal) {
  if (!std::holds_alternative<env::ManhattanGrid>(spec.variant())) throw std::invalid_argument("from_lines: needs a manhattan_grid spec");
  if (window.dim() != 2) throw std::invalid_argument("from_lines: manhattan_grid is planar");
  const double w = window.padded_half_width();
  std::sort(vertical.begin(), vertical.end());
  std::sort(horizontal.begin(), horizontal.end());
  SegmentSet s;
  s.weight = spec.normalization(2);
  for (double x : vertical)
    if (std::abs(x) <= w) s.segments.push_back({Point(x, -w), Point(x, w)});
  for (double y : horizontal)
    if (std::abs(y) <= w) s.segments.push_back({Point(-w, y), Point(w, y)});
  EnvRealization out(spec, window, std::move(s), Seed{0});
  out.vlines_ = std::move(vertical);
  out.hlines_ = std::move(horizontal);
  out.lines_upper_ = 3.0 * w;
  return out;
}

double EnvRealization::total_mass() const {
  const double w = window_.padded_half_width();
  return std::visit(Overloaded{
                        [](const DensityGrid& g) {
                          double s = 0.0;
                          for (double v : g.value) s += v;
                          return s * g.cell_volume();
                        },
                        [](const SegmentSet& s) {
                          double t = 0.0;
                          for (const auto& seg : s.segments) t += seg.length();
                          return t * s.weight;
                        },
                        [&](const BallSet& b) {
                          std::array<double, 3> lo{-w, -w, -w}, hi{w, w, w};
                          double t = 0.0;
                          for (std::size_t i = 0; i < b.centers.size(); ++i) t += ball_box_volume(b.centers[i], b.radii[i], lo, hi);
                          return t * b.weight;
                        },
                        [&](const Scalar& s) { return s.z * window_.padded_volume(); },
                    },
                    rep_);
}

EnvRealization make_environment(const EnvironmentSpec& spec, const Window& window, Seed seed) {
  const int dim = window.dim();
  if (!spec.supports_dim(dim)) {
    throw std::invalid_argument(spec.type_name() + " requires dim = 2, got dim = " + std::to_string(dim));
  }
  const double need = spec.required_margin();
  if (window.margin() < need) {
    throw std::invalid_argument(spec.type_name() + ": margin " + num(window.margin()) + " is below the required margin " + num(need));
  }
  const double w = window.padded_half_width();
  const double norm = spec.normalization(dim);
  Rng rng = seed.rng();

  std::vector<Point> sites;
  double site_half = 0.0;
  std::vector<double> vlines, hlines;
  double lines_upper = 0.0;

  Representation rep = std::visit(
      Overloaded{
          [&](const env::Homogeneous&) -> Representation {
            DensityGrid g;
            g.dim = dim, g.lo = -w, g.h = 2.0 * w, g.n = {1, 1, 1}, g.value = {1.0};
            return g;
          },
          [&](const env::MixedPoisson& m) -> Representation { return Scalar{m.z.sample(rng)}; },
          [&](const env::IndicatorField& f) -> Representation {
            DensityGrid g;
            g.dim = dim;
            g.lo = -w;
            const int n = static_cast<int>(std::ceil(2.0 * w / (f.radius / 20.0)));
            g.h = 2.0 * w / n;
            std::size_t cells = 1;
            for (int k = 0; k < 3; ++k) {
              g.n[static_cast<std::size_t>(k)] = k < dim ? n : 1;
              cells *= static_cast<std::size_t>(g.n[static_cast<std::size_t>(k)]);
            }
            if (cells > 50'000'000) throw std::invalid_argument("indicator_field: grid would need more than 5e7 cells");
            std::vector<char> covered(cells, 0);
            const std::int64_t nd = poisson(rng, f.mu * std::pow(2.0 * (w + f.radius), dim));
            for (std::int64_t i = 0; i < nd; ++i) {
              const Point y = uniform_in_cube(rng, dim, w + f.radius);
              std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
              for (int k = 0; k < dim; ++k) {
                lo[static_cast<std::size_t>(k)] = std::max(0, static_cast<int>(std::floor((y[k] - f.radius - g.lo) / g.h)));
                hi[static_cast<std::size_t>(k)] = std::min(n - 1, static_cast<int>(std::floor((y[k] + f.radius - g.lo) / g.h)));
              }
              std::array<int, 3> c{};
              for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2])
                for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
                  for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
                    double s = 0.0;
                    for (int k = 0; k < dim; ++k) {
                      const double d = g.lo + (c[static_cast<std::size_t>(k)] + 0.5) * g.h - y[k];
                      s += d * d;
                    }
                    if (s < f.radius * f.radius) covered[g.cell_index(c)] = 1;
                  }
            }
            g.value.resize(cells);
            for (std::size_t i = 0; i < cells; ++i) g.value[i] = norm * (covered[i] ? f.lambda1 : f.lambda2);
            return g;
          },
          [&](const env::ShotNoise& s) -> Representation {
            BallSet b;
            b.weight = norm;
            driving_balls(rng, dim, s.mu, RadiusLaw::constant(s.support_radius), w, b.centers, b.radii);
            b.index = BallIndex(b.centers, b.radii);
            return b;
          },
          [&](const env::BooleanCount& bc) -> Representation {
            BallSet b;
            b.weight = norm;
            driving_balls(rng, dim, bc.mu, bc.law, w, b.centers, b.radii);
            b.index = BallIndex(b.centers, b.radii);
            return b;
          },
          [&](const env::VoronoiEdges& t) -> Representation {
            site_half = w + tessellation_pad(t.mu);
            const std::int64_t n = poisson(rng, t.mu * 4.0 * site_half * site_half);
            for (std::int64_t i = 0; i < n; ++i) sites.push_back(uniform_in_cube(rng, 2, site_half));
            return SegmentSet{tessellation_edges(sites, site_half, w, TessKind::voronoi), norm};
          },
          [&](const env::DelaunayEdges& t) -> Representation {
            site_half = w + tessellation_pad(t.mu);
            const std::int64_t n = poisson(rng, t.mu * 4.0 * site_half * site_half);
            for (std::int64_t i = 0; i < n; ++i) sites.push_back(uniform_in_cube(rng, 2, site_half));
            return SegmentSet{tessellation_edges(sites, site_half, w, TessKind::delaunay), norm};
          },
          [&](const env::ManhattanGrid& m) -> Representation {
            // Lines beyond the window are kept so connectivity radii near the window edge resolve.
            lines_upper = 3.0 * w;
            sample_lines(rng, m.mu_vertical, -w, lines_upper, vlines);
            sample_lines(rng, m.mu_horizontal, -w, lines_upper, hlines);
            SegmentSet s;
            s.weight = norm;
            for (double x : vlines)
              if (x <= w) s.segments.push_back({Point(x, -w), Point(x, w)});
            for (double y : hlines)
              if (y <= w) s.segments.push_back({Point(-w, y), Point(w, y)});
            return s;
          },
      },
      spec.variant());

  EnvRealization out(spec, window, std::move(rep), seed);
  out.sites_ = std::move(sites);
  out.site_half_width_ = site_half;
  out.vlines_ = std::move(vlines);
  out.hlines_ = std::move(hlines);
  out.lines_upper_ = lines_upper;
  return out;
}

double measure_of_ball(const EnvRealization& env, const Point& center, double alpha) {
  check_ball_inside(env, center, alpha);
  const int dim = env.dim();
  return std::visit(Overloaded{
                        [&](const DensityGrid& g) {
                          if (g.value.size() == 1) return g.value[0] * ball_volume(dim, alpha);
                          return grid_measure(g, center, alpha);
                        },
                        [&](const SegmentSet& s) {
                          double t = 0.0;
                          for (const auto& seg : s.segments) t += segment_ball_length(seg.a, seg.b, center, alpha);
                          return t * s.weight;
                        },
                        [&](const BallSet& b) {
                          double t = 0.0;
                          b.index.for_each_intersecting(center, alpha, [&](std::size_t i) {
                            t += ball_ball_intersection(dim, distance(b.centers[i], center), b.radii[i], alpha);
                          });
                          return t * b.weight;
                        },
                        [&](const Scalar& s) { return s.z * ball_volume(dim, alpha); },
                    },
                    env.representation());
}

EnvRealization rasterize(const EnvRealization& env, double h) {
  const auto* b = std::get_if<BallSet>(&env.representation());
  if (b == nullptr) throw std::invalid_argument("rasterize: only ball-set realizations are supported");
  if (!(h > 0.0)) throw std::invalid_argument("rasterize: cell size must be positive");
  const int dim = env.dim();
  const double w = env.window().padded_half_width();
  DensityGrid g;
  g.dim = dim;
  g.lo = -w;
  const int n = static_cast<int>(std::ceil(2.0 * w / h));
  g.h = 2.0 * w / n;
  std::size_t cells = 1;
  for (int k = 0; k < 3; ++k) {
    g.n[static_cast<std::size_t>(k)] = k < dim ? n : 1;
    cells *= static_cast<std::size_t>(g.n[static_cast<std::size_t>(k)]);
  }
  g.value.assign(cells, 0.0);
  const double cellv = g.cell_volume();
  for (std::size_t i = 0; i < b->centers.size(); ++i) {
    const Point& y = b->centers[i];
    const double r = b->radii[i];
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      lo[static_cast<std::size_t>(k)] = std::max(0, static_cast<int>(std::floor((y[k] - r - g.lo) / g.h)));
      hi[static_cast<std::size_t>(k)] = std::min(n - 1, static_cast<int>(std::floor((y[k] + r - g.lo) / g.h)));
    }
    std::array<int, 3> c{};
    for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2])
      for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
        for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
          std::array<double, 3> blo{0, 0, 0}, bhi{0, 0, 0};
          for (int k = 0; k < dim; ++k) {
            blo[static_cast<std::size_t>(k)] = g.lo + c[static_cast<std::size_t>(k)] * g.h;
            bhi[static_cast<std::size_t>(k)] = blo[static_cast<std::size_t>(k)] + g.h;
          }
          g.value[g.cell_index(c)] += b->weight * ball_box_volume(y, r, blo, bhi) / cellv;
        }
  }
  return EnvRealization(env.spec(), env.window(), std::move(g), env.seed());
}

// ---------------------------------------------------------------------------
// Radius fields

namespace {

// Uniform bucket grid over tessellation sites for box-emptiness queries.
struct SiteGrid {
  double lo = 0.0, cell = 1.0;
  int n = 1;
  std::vector<std::vector<Point>> buckets;

  SiteGrid(const std::vector<Point>& sites, double half) : lo(-half) {
    n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(sites.size()) / 2.0)));
    cell = 2.0 * half / n;
    buckets.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (const Point& p : sites) buckets[bucket(p[0], p[1])].push_back(p);
  }
  int coord(double x) const { return std::clamp(static_cast<int>(std::floor((x - lo) / cell)), 0, n - 1); }
  std::size_t bucket(double x, double y) const {
    return static_cast<std::size_t>(coord(y)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(coord(x));
  }
  bool any_in_box(double x0, double x1, double y0, double y1) const {
    for (int j = coord(y0); j <= coord(y1); ++j)
      for (int i = coord(x0); i <= coord(x1); ++i)
        for (const Point& p : buckets[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)])
          if (p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1) return true;
    return false;
  }
};

double next_at_or_after(const std::vector<double>& lines, double x) {
  auto it = std::lower_bound(lines.begin(), lines.end(), x);
  return it == lines.end() ? kInf : *it - x;
}

}  // namespace

RadiusField radius_field(const EnvRealization& env) {
  const auto& spec = env.spec();
  if (!spec || !spec->has_radius_field()) {
    throw std::invalid_argument("no stabilization field defined for " + (spec ? spec->type_name() : std::string("this realization")));
  }
  const auto& v = spec->variant();
  if (std::holds_alternative<env::BooleanCount>(v)) {
    const auto* balls = &std::get<BallSet>(env.representation());
    return RadiusField(FieldKind::stabilization, false, [balls](const Point& y, double) {
      double r = 0.0;
      balls->index.for_each_covering(y, [&](std::size_t i) { r = std::max(r, balls->radii[i]); });
      return r;
    });
  }
  if (std::holds_alternative<env::ManhattanGrid>(v)) {
    const EnvRealization* e = &env;
    return RadiusField(FieldKind::connectivity, false, [e](const Point& y, double) {
      const double rv = next_at_or_after(e->vertical_lines(), y[0]);
      const double rh = next_at_or_after(e->horizontal_lines(), y[1]);
      return std::max(rv, rh);
    });
  }
  // Delaunay field: smallest integer r >= 2 alpha with a site in each of the 16
  // boxes Q_r(y + r z), |z|_inf = 2. Voronoi reuses it as a diagnostic.
  const bool experimental = std::holds_alternative<env::VoronoiEdges>(v);
  auto grid = std::make_shared<SiteGrid>(env.sites(), env.site_half_width());
  const double half = env.site_half_width();
  return RadiusField(FieldKind::stabilization, experimental, [grid, half](const Point& y, double alpha) {
    for (double r = std::max(1.0, std::ceil(2.0 * alpha));; r += 1.0) {
      if (std::max(std::abs(y[0]), std::abs(y[1])) + 3.0 * r > half) return kInf;
      bool all = true;
      for (int zx = -2; zx <= 2 && all; ++zx)
        for (int zy = -2; zy <= 2 && all; ++zy) {
          if (std::max(std::abs(zx), std::abs(zy)) != 2) continue;
          const double cx = y[0] + r * zx, cy = y[1] + r * zy;
          all = grid->any_in_box(cx - r, cx + r, cy - r, cy + r);
        }
      if (all) return r;
    }
  });
}

double campbell_bound(int dim, double mu, const RadiusLaw& law, double alpha) {
  check_dim(dim);
  double s = 0.0;
  for (int j = 0; j <= dim; ++j) {
    const double t = law.truncated_moment(static_cast<double>(j), alpha);
    if (!std::isfinite(t)) return kInf;
    s += binomial(dim, j) * std::pow(2.0 * alpha, dim - j) * t;
  }
  return mu * unit_ball_volume(dim) * s;
}

PhiReport phi_hat(const EnvironmentSpec& spec, int dim, const std::vector<double>& alphas, double grid_step,
                  std::int64_t replicates, Seed seed, const Exec& exec) {
  if (!spec.has_radius_field()) throw std::invalid_argument("no stabilization field defined for " + spec.type_name());
  if (alphas.empty()) throw std::invalid_argument("phi_hat: empty alpha grid");
  for (double a : alphas) require(positive(a), "phi_hat: alphas must be positive");
  const double amin = *std::min_element(alphas.begin(), alphas.end());
  const double amax = *std::max_element(alphas.begin(), alphas.end());
  require(positive(grid_step) && grid_step <= amin / 10.0 * (1.0 + 1e-12), "phi_hat: grid_step must be <= min(alpha)/10");
  require(replicates > 0, "phi_hat: replicates must be positive");
  const Window window(dim, amax, spec.required_margin());

  auto hits = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const EnvRealization env = make_environment(spec, window, seed.child(i).child(0));
    const RadiusField field = radius_field(env);
    std::vector<char> row(alphas.size(), 0);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const double alpha = alphas[a];
      const int m = static_cast<int>(std::floor(alpha / grid_step + 1e-9));
      bool hit = false;
      for (int ix = -m; ix <= m && !hit; ++ix)
        for (int iy = (dim >= 2 ? -m : 0); iy <= (dim >= 2 ? m : 0) && !hit; ++iy)
          for (int iz = (dim >= 3 ? -m : 0); iz <= (dim >= 3 ? m : 0) && !hit; ++iz) {
            Point y = Point::zero(dim);
            y[0] = ix * grid_step;
            if (dim >= 2) y[1] = iy * grid_step;
            if (dim >= 3) y[2] = iz * grid_step;
            hit = field(y, alpha) >= alpha;
          }
      row[a] = hit ? 1 : 0;
    }
    return row;
  });

  PhiReport rep;
  rep.grid_step = grid_step;
  rep.experimental = std::holds_alternative<env::VoronoiEdges>(spec.variant());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    PhiRow row;
    row.alpha = alphas[a];
    row.hits.n = replicates;
    for (const auto& h : hits) row.hits.hits += h[a];
    if (const auto* bc = std::get_if<env::BooleanCount>(&spec.variant())) row.campbell = campbell_bound(dim, bc->mu, bc->law, alphas[a]);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Essential connectedness

std::string to_string(Precondition p) {
  switch (p) {
    case Precondition::held: return "held";
    case Precondition::not_held: return "not_held";
    default: return "not_evaluable";
  }
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

template <class F>
void for_lattice(int dim, double half, double pitch, F&& f) {
  const int m = static_cast<int>(std::floor(half / pitch + 1e-9));
  for (int ix = -m; ix <= m; ++ix)
    for (int iy = (dim >= 2 ? -m : 0); iy <= (dim >= 2 ? m : 0); ++iy)
      for (int iz = (dim >= 3 ? -m : 0); iz <= (dim >= 3 ? m : 0); ++iz) {
        Point y = Point::zero(dim);
        y[0] = ix * pitch;
        if (dim >= 2) y[1] = iy * pitch;
        if (dim >= 3) y[2] = iz * pitch;
        f(y);
      }
}

}  // namespace

AuditReport essential_connectedness_audit(const EnvRealization& env, double r, double alpha) {
  require(positive(r) && positive(alpha), "audit: r and alpha must be positive");
  const int dim = env.dim();
  if (2.0 * alpha > env.window().padded_half_width() * (1.0 + 1e-12)) {
    throw std::out_of_range("audit: Q_{2 alpha} leaves the padded window");
  }
  const double pitch = r / 4.0;
  AuditReport rep;

  if (env.spec() && std::holds_alternative<env::ManhattanGrid>(env.spec()->variant())) {
    const RadiusField field = radius_field(env);
    double sup = 0.0;
    for_lattice(dim, 2.0 * alpha, pitch, [&](const Point& y) { sup = std::max(sup, field(y)); });
    rep.sup_radius = sup;
    rep.precondition = sup < alpha / 2.0 ? Precondition::held : Precondition::not_held;
  }

  std::vector<Point> nodes;
  std::visit(Overloaded{
                 [&](const SegmentSet& s) {
                   for (const auto& seg : s.segments) {
                     auto c = clip_segment(seg.a, seg.b, 2.0 * alpha);
                     if (!c) continue;
                     const double len = distance(c->first, c->second);
                     const int n = std::max(1, static_cast<int>(std::ceil(len / pitch)));
                     for (int k = 0; k <= n; ++k) {
                       Point p = c->first;
                       for (int d = 0; d < dim; ++d) p[d] = c->first[d] + (c->second[d] - c->first[d]) * k / n;
                       nodes.push_back(p);
                     }
                   }
                 },
                 [&](const DensityGrid& g) {
                   for_lattice(dim, 2.0 * alpha, pitch, [&](const Point& y) {
                     if (g.at(y) > 0.0) nodes.push_back(y);
                   });
                 },
                 [&](const BallSet& b) {
                   for_lattice(dim, 2.0 * alpha, pitch, [&](const Point& y) {
                     bool in = false;
                     b.index.for_each_covering(y, [&](std::size_t) { in = true; });
                     if (in && b.weight > 0.0) nodes.push_back(y);
                   });
                 },
                 [&](const Scalar& s) {
                   if (s.z > 0.0) for_lattice(dim, 2.0 * alpha, pitch, [&](const Point& y) { nodes.push_back(y); });
                 },
             },
             env.representation());

  // Hash grid of cell r: neighbours within distance < r lie in adjacent cells.
  std::unordered_map<std::uint64_t, std::vector<int>> cells;
  auto key_of = [&](const std::array<std::int64_t, 3>& c) {
    return (static_cast<std::uint64_t>(c[0] + (1 << 20)) << 42) | (static_cast<std::uint64_t>(c[1] + (1 << 20)) << 21) |
           static_cast<std::uint64_t>(c[2] + (1 << 20));
  };
  auto cell_of = [&](const Point& p) {
    std::array<std::int64_t, 3> c{0, 0, 0};
    for (int d = 0; d < dim; ++d) c[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(p[d] / r));
    return c;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) cells[key_of(cell_of(nodes[i]))].push_back(static_cast<int>(i));
  auto neighbours = [&](int i, auto&& f) {
    const auto c = cell_of(nodes[static_cast<std::size_t>(i)]);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = (dim >= 2 ? -1 : 0); dy <= (dim >= 2 ? 1 : 0); ++dy)
        for (int dz = (dim >= 3 ? -1 : 0); dz <= (dim >= 3 ? 1 : 0); ++dz) {
          auto it = cells.find(key_of({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells.end()) continue;
          for (int j : it->second)
            if (j != i && squared_distance(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]) < r * r) f(j);
        }
  };
  UnionFind uf(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) neighbours(static_cast<int>(i), [&](int j) { uf.unite(static_cast<int>(i), j); });

  std::vector<int> inner;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].max_abs() <= alpha) inner.push_back(static_cast<int>(i));
  rep.support_nodes = inner.size();
  rep.connected = true;
  for (int i : inner) {
    if (uf.find(i) != uf.find(inner.front())) {
      rep.connected = false;
      rep.failing_pair = std::make_pair(nodes[static_cast<std::size_t>(inner.front())], nodes[static_cast<std::size_t>(i)]);
      break;
    }
  }
  if (rep.connected && inner.size() >= 2) {
    // Breadth-first path between the first and last support nodes of Q_alpha.
    const int src = inner.front(), dst = inner.back();
    std::vector<int> prev(nodes.size(), -2);
    std::deque<int> queue{src};
    prev[static_cast<std::size_t>(src)] = -1;
    while (!queue.empty() && prev[static_cast<std::size_t>(dst)] == -2) {
      const int u = queue.front();
      queue.pop_front();
      neighbours(u, [&](int j) {
        if (prev[static_cast<std::size_t>(j)] == -2) prev[static_cast<std::size_t>(j)] = u, queue.push_back(j);
      });
    }
    for (int u = dst; u != -1; u = prev[static_cast<std::size_t>(u)]) rep.witness_path.push_back(nodes[static_cast<std::size_t>(u)]);
    std::reverse(rep.witness_path.begin(), rep.witness_path.end());
  }
  return rep;
}

void write_environment_csv(std::ostream& os, const EnvRealization& env) {
  const int dim = env.dim();
  if (const auto* s = std::get_if<SegmentSet>(&env.representation())) {
    for (int k = 0; k < dim; ++k) os << 'a' << (k + 1) << ',';
    for (int k = 0; k < dim; ++k) os << 'b' << (k + 1) << (k + 1 < dim ? ',' : '\n');
    for (const auto& seg : s->segments) {
      for (int k = 0; k < dim; ++k) os << num(seg.a[k]) << ',';
      for (int k = 0; k < dim; ++k) os << num(seg.b[k]) << (k + 1 < dim ? ',' : '\n');
    }
    return;
  }
  if (const auto* b = std::get_if<BallSet>(&env.representation())) {
    for (int k = 0; k < dim; ++k) os << 'x' << (k + 1) << ',';
    os << "radius\n";
    for (std::size_t i = 0; i < b->centers.size(); ++i) {
      for (int k = 0; k < dim; ++k) os << num(b->centers[i][k]) << ',';
      os << num(b->radii[i]) << '\n';
    }
    return;
  }
  throw std::invalid_argument("write_environment_csv: only segment and ball representations have primitives");
}

}  // namespace coxperc
