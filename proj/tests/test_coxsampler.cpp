#include <algorithm>
#include <cmath>
#include <sstream>

#include "coxperc/coxsampler.hpp"
#include "coxperc/geometry.hpp"
#include "doctest.h"

using namespace coxperc;

namespace {

// Two-sample Kolmogorov-Smirnov p-value (asymptotic; conservative for ties).
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double t = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

TEST_CASE("homogeneous counts are Poisson") {
  const auto hom = EnvironmentSpec::homogeneous();
  for (int dim = 1; dim <= 3; ++dim) {
    const Window w(dim, 2.0, 0.5);
    const auto env = make_environment(hom, w, Seed{1});
    const double lambda = 1.5;
    const double mean = lambda * std::pow(5.0, dim);
    const int n = 3000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto pts = sample_cox(env, lambda, Seed{10 + static_cast<std::uint64_t>(dim)}.child(static_cast<std::uint64_t>(i)));
      for (const auto& p : pts) REQUIRE(p.max_abs() <= 2.5);
      const double k = static_cast<double>(pts.size());
      s += k;
      s2 += k * k;
    }
    const double m = s / n, v = s2 / n - m * m;
    INFO("dim " << dim);
    CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
    CHECK(v == doctest::Approx(mean).epsilon(0.1));
  }
}

TEST_CASE("conditional counts follow lambda times the realized measure") {
  const std::vector<EnvironmentSpec> specs{EnvironmentSpec::shot_noise(0.5, 1.0), EnvironmentSpec::manhattan(1.0, 0.5),
                                           EnvironmentSpec::boolean_count(0.3, RadiusLaw::exponential(1.0)),
                                           EnvironmentSpec::indicator_field(2.0, 0.1, 0.3, 1.0), EnvironmentSpec::voronoi(1.0)};
  std::uint64_t k = 0;
  for (const auto& spec : specs) {
    const Window w(2, 3.0, spec.required_margin() + 1.0);
    const auto env = make_environment(spec, w, Seed{20 + k});
    const double lambda = 2.0;
    const double expect = lambda * measure_of_ball(env, Point(0, 0), 2.0);
    const int n = 3000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (const auto& p : sample_cox(env, lambda, Seed{30 + k}.child(static_cast<std::uint64_t>(i)))) s += p.norm() < 2.0;
    }
    INFO(spec.describe() << " expect " << expect << " got " << s / n);
    CHECK(std::abs(s / n - expect) < 4.0 * std::sqrt(std::max(expect, 1e-3) / n) + 1e-9);
    ++k;
  }
}

TEST_CASE("void probabilities match the Cox formula") {
  // P(no point in B) = E[exp(-lambda Lambda(B))], the right side from independent environments.
  const auto spec = EnvironmentSpec::shot_noise(0.3, 1.0);
  const Window w(2, 2.0, 1.0);
  const double lambda = 0.8;
  const int n = 20000;
  int empty = 0;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto rep = sample_replicate(spec, RadiusLaw::constant(0.1), w, lambda, Seed{35}.child(static_cast<std::uint64_t>(i)));
    bool any = false;
    for (const auto& p : rep.marked.points) any = any || p.norm() < 1.0;
    empty += !any;
    const auto env = make_environment(spec, w, Seed{36}.child(static_cast<std::uint64_t>(i)));
    const double e = std::exp(-lambda * measure_of_ball(env, Point(0, 0), 1.0));
    s += e;
    s2 += e * e;
  }
  const double p = static_cast<double>(empty) / n, m = s / n;
  const double se = std::sqrt(p * (1 - p) / n + (s2 / n - m * m) / n);
  INFO("empirical " << p << " formula " << m);
  CHECK(std::abs(p - m) <= 4.0 * se);
}

TEST_CASE("independent thinning equals sampling at the reduced intensity") {
  const auto spec = EnvironmentSpec::boolean_count(0.3, RadiusLaw::exponential(1.0));
  const Window w(2, 3.0, 0.0);
  const double lambda = 3.0, keep = 0.4;
  const int n = 2000;
  std::vector<double> thinned, direct;
  for (int i = 0; i < n; ++i) {
    const Seed rs = Seed{37}.child(static_cast<std::uint64_t>(i));
    const auto env = make_environment(spec, w, rs.child(0));
    Rng coin = rs.child(5).rng();
    int k = 0;
    for (const auto& p : sample_cox(env, lambda, rs.child(1))) k += uniform(coin, 0, 1) < keep && p.max_abs() <= 2.0;
    thinned.push_back(k);
    const Seed ds = Seed{38}.child(static_cast<std::uint64_t>(i));
    const auto env2 = make_environment(spec, w, ds.child(0));
    int k2 = 0;
    for (const auto& p : sample_cox(env2, keep * lambda, ds.child(1))) k2 += p.max_abs() <= 2.0;
    direct.push_back(k2);
  }
  const double pv = ks_pvalue(thinned, direct);
  INFO("KS p-value " << pv);
  CHECK(pv > 0.01);
}

TEST_CASE("points lie on the support of the measure") {
  {
    const auto spec = EnvironmentSpec::shot_noise(0.3, 1.0);
    const auto env = make_environment(spec, Window(2, 4.0, 1.0), Seed{40});
    const auto& balls = std::get<BallSet>(env.representation());
    for (const auto& p : sample_cox(env, 5.0, Seed{41})) {
      bool in = false;
      for (std::size_t i = 0; i < balls.centers.size(); ++i) in = in || distance(p, balls.centers[i]) < balls.radii[i];
      CHECK(in);
    }
  }
  {
    const auto spec = EnvironmentSpec::voronoi(1.0);
    const auto env = make_environment(spec, Window(2, 3.0, spec.required_margin()), Seed{42});
    const auto& segs = std::get<SegmentSet>(env.representation()).segments;
    const auto pts = sample_cox(env, 3.0, Seed{43});
    CHECK_FALSE(pts.empty());
    for (const auto& p : pts) {
      double best = kInf;
      for (const auto& s : segs) {
        // Distance from p to segment s.
        const double dx = s.b[0] - s.a[0], dy = s.b[1] - s.a[1];
        const double t = std::clamp(((p[0] - s.a[0]) * dx + (p[1] - s.a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        best = std::min(best, std::hypot(p[0] - s.a[0] - t * dx, p[1] - s.a[1] - t * dy));
      }
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("replicates are reproducible and marks use their own stream") {
  const auto spec = EnvironmentSpec::shot_noise(0.5, 1.0);
  const auto law = RadiusLaw::exponential(2.0);
  const Window w(2, 4.0, 1.0);
  const auto a = sample_replicate(spec, law, w, 2.0, Seed{50});
  const auto b = sample_replicate(spec, law, w, 2.0, Seed{50});
  REQUIRE(a.marked.size() == b.marked.size());
  for (std::size_t i = 0; i < a.marked.size(); ++i) {
    CHECK(a.marked.points[i] == b.marked.points[i]);
    CHECK(a.marked.radii[i] == b.marked.radii[i]);
  }
  CHECK(a.marked.lambda == 2.0);
  CHECK(std::isinf(a.marked.radius_bound));

  // A larger lambda keeps the marks of the shared indices.
  const auto more = sample_marked(a.env, law, 4.0, Seed{50});
  const auto less = sample_marked(a.env, law, 1.0, Seed{50});
  REQUIRE(more.size() > less.size());
  for (std::size_t i = 0; i < less.size(); ++i) CHECK(more.radii[i] == less.radii[i]);

  const auto other = sample_replicate(spec, law, w, 2.0, Seed{51});
  CHECK((other.marked.size() != a.marked.size() || other.marked.points.front() != a.marked.points.front()));
  CHECK(sample_replicate(spec, RadiusLaw::constant(0.5), w, 1.0, Seed{1}).marked.radius_bound == 0.5);
}

TEST_CASE("empty and invalid intensities") {
  const auto env = make_environment(EnvironmentSpec::homogeneous(), Window(2, 3.0), Seed{1});
  CHECK(sample_cox(env, 0.0, Seed{2}).empty());
  CHECK_THROWS_AS(sample_cox(env, -1.0, Seed{2}), std::invalid_argument);
  const auto zero = make_environment(EnvironmentSpec::indicator_field(1.0, 0.0, 1e-9, 0.5), Window(2, 1.0, 0.5), Seed{3});
  CHECK(sample_cox(zero, 10.0, Seed{4}).size() < 3);
}

TEST_CASE("restriction keeps points of the closed cube") {
  const auto rep = sample_replicate(EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 5.0, 1.0), 1.0, Seed{60});
  const auto r = rep.marked.restricted(2.0);
  std::size_t expect = 0;
  for (const auto& p : rep.marked.points) expect += p.max_abs() <= 2.0;
  CHECK(r.size() == expect);
  for (const auto& p : r.points) CHECK(p.max_abs() <= 2.0);
  CHECK(r.radii.size() == r.points.size());
}

TEST_CASE("points csv") {
  const auto rep = sample_replicate(EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(3, 1.0), 2.0, Seed{70});
  std::ostringstream os;
  write_points_csv(os, rep.marked);
  const std::string s = os.str();
  CHECK(s.rfind("x1,x2,x3,radius\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == rep.marked.size() + 1);
}
