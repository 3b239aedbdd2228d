#include "coxperc/coxsampler.hpp"

#include <algorithm>
#include <cstdio>

namespace coxperc {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

MarkedPointSet MarkedPointSet::restricted(double h) const {
  MarkedPointSet out{{}, {}, window, lambda, position_seed, mark_seed, radius_bound};
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].max_abs() <= h) {
      out.points.push_back(points[i]);
      out.radii.push_back(radii[i]);
    }
  }
  return out;
}

std::vector<Point> sample_cox(const EnvRealization& env, double lambda, Seed seed) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("sample_cox: lambda must be finite and >= 0");
  std::vector<Point> out;
  if (lambda == 0.0) return out;
  Rng rng = seed.rng();
  const int dim = env.dim();
  const double w = env.window().padded_half_width();

  std::visit(Overloaded{
                 [&](const Scalar& s) {
                   const std::int64_t n = poisson(rng, lambda * s.z * env.window().padded_volume());
                   out.reserve(static_cast<std::size_t>(n));
                   for (std::int64_t i = 0; i < n; ++i) {
                     Point p = Point::zero(dim);
                     for (int k = 0; k < dim; ++k) p[k] = uniform(rng, -w, w);
                     out.push_back(p);
                   }
                 },
                 [&](const DensityGrid& g) {
                   // Total count first, then cells in proportion to their mass; this is
                   // the same law as independent per-cell Poisson counts.
                   std::vector<double> cum(g.value.size());
                   double acc = 0.0;
                   for (std::size_t i = 0; i < g.value.size(); ++i) cum[i] = acc += g.value[i];
                   const std::int64_t n = poisson(rng, lambda * acc * g.cell_volume());
                   out.reserve(static_cast<std::size_t>(n));
                   for (std::int64_t i = 0; i < n; ++i) {
                     const double u = uniform01(rng) * acc;
                     std::size_t c = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
                     c = std::min(c, cum.size() - 1);
                     std::size_t rest = c;
                     Point p = Point::zero(dim);
                     for (int k = 0; k < dim; ++k) {
                       const std::size_t nk = static_cast<std::size_t>(g.n[static_cast<std::size_t>(k)]);
                       const std::size_t ck = rest % nk;
                       rest /= nk;
                       p[k] = g.lo + (static_cast<double>(ck) + uniform01(rng)) * g.h;
                     }
                     out.push_back(p);
                   }
                 },
                 [&](const SegmentSet& s) {
                   for (const auto& seg : s.segments) {
                     const std::int64_t n = poisson(rng, lambda * s.weight * seg.length());
                     for (std::int64_t i = 0; i < n; ++i) {
                       const double t = uniform01(rng);
                       Point p = seg.a;
                       for (int k = 0; k < dim; ++k) p[k] = seg.a[k] + t * (seg.b[k] - seg.a[k]);
                       out.push_back(p);
                     }
                   }
                 },
                 [&](const BallSet& b) {
                   // Poisson on (bounding box of the ball) ∩ window, thinned to the ball.
                   for (std::size_t i = 0; i < b.centers.size(); ++i) {
                     const Point& c = b.centers[i];
                     const double r = b.radii[i];
                     std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
                     double vol = 1.0;
                     for (int k = 0; k < dim; ++k) {
                       lo[static_cast<std::size_t>(k)] = std::max(-w, c[k] - r);
                       hi[static_cast<std::size_t>(k)] = std::min(w, c[k] + r);
                       vol *= std::max(0.0, hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]);
                     }
                     const std::int64_t n = poisson(rng, lambda * b.weight * vol);
                     for (std::int64_t j = 0; j < n; ++j) {
                       Point p = Point::zero(dim);
                       for (int k = 0; k < dim; ++k) p[k] = uniform(rng, lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
                       if (squared_distance(p, c) < r * r) out.push_back(p);
                     }
                   }
                 },
             },
             env.representation());
  return out;
}

MarkedPointSet attach_marks(std::vector<Point> points, const RadiusLaw& law, Seed seed, const Window& window, double lambda) {
  MarkedPointSet m{std::move(points), {}, window, lambda, Seed{}, seed, law.esssup()};
  Rng rng = seed.rng();
  m.radii.reserve(m.points.size());
  for (std::size_t i = 0; i < m.points.size(); ++i) m.radii.push_back(law.sample(rng));
  return m;
}

MarkedPointSet sample_marked(const EnvRealization& env, const RadiusLaw& law, double lambda, Seed seed) {
  MarkedPointSet m = attach_marks(sample_cox(env, lambda, seed.child(1)), law, seed.child(2), env.window(), lambda);
  m.position_seed = seed.child(1);
  return m;
}

Replicate sample_replicate(const EnvironmentSpec& spec, const RadiusLaw& law, const Window& window, double lambda, Seed seed) {
  EnvRealization env = make_environment(spec, window, seed.child(0));
  MarkedPointSet m = sample_marked(env, law, lambda, seed);
  return {std::move(env), std::move(m)};
}

void write_points_csv(std::ostream& os, const MarkedPointSet& mps) {
  const int dim = mps.dim();
  for (int k = 0; k < dim; ++k) os << 'x' << (k + 1) << ',';
  os << "radius\n";
  char buf[32];
  for (std::size_t i = 0; i < mps.size(); ++i) {
    for (int k = 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mps.points[i][k]);
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", mps.radii[i]);
    os << buf << '\n';
  }
}

}  // namespace coxperc
