#include <cmath>
#include <numbers>

#include "coxperc/estimators.hpp"
#include "doctest.h"

using namespace coxperc;

namespace {

constexpr double pi = std::numbers::pi;

// Direct simulation of the 1D Boolean model: is [-L, L] covered by the union?
double mc_line_cover(double lambda, double rate, double L, int reps, Seed seed) {
  const double pad = 40.0 / rate;
  int hits = 0;
  for (int i = 0; i < reps; ++i) {
    Rng rng = seed.child(static_cast<std::uint64_t>(i)).rng();
    const auto n = poisson(rng, lambda * 2.0 * (L + pad));
    std::vector<std::pair<double, double>> iv;
    std::exponential_distribution<double> ex(rate);
    for (std::int64_t k = 0; k < n; ++k) {
      const double x = uniform(rng, -L - pad, L + pad), r = ex(rng);
      iv.emplace_back(x - r, x + r);
    }
    std::sort(iv.begin(), iv.end());
    double reach = -L;
    bool ok = false;
    for (const auto& [a, b] : iv) {
      if (a >= reach) break;
      reach = std::max(reach, b);
      if (reach > L) {
        ok = true;
        break;
      }
    }
    hits += ok;
  }
  return static_cast<double>(hits) / reps;
}

// Laplace transform of a mean-one Pareto Z by Simpson's rule on [scale, scale + 400].
double pareto_laplace(double tail, double t) {
  const double s = (tail - 1.0) / tail;
  const int n = 400000;
  const double a = s, b = s + 400.0, h = (b - a) / n;
  auto f = [&](double z) { return tail * std::pow(s, tail) * std::pow(z, -tail - 1.0) * std::exp(-t * z); };
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

LadderRung rung(double mean, double censored = 0.0) {
  LadderRung r;
  r.moment.mean = mean;
  r.censored_fraction = censored;
  return r;
}

}  // namespace

TEST_CASE("zero intensity is trivial") {
  const Model m{EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 3.0, 1.0)};
  const auto v = vacant_probability(m, {0.0}, 50, Seed{1});
  CHECK(v[0].vacant.estimate() == 1.0);
  CHECK(*v[0].closed_form == 1.0);
  const auto c = percolation_curve(m, {0.0}, 50, Seed{1});
  CHECK(c[0].crossing.hits == 0);
  const auto u = uniqueness_report(EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), 2, 0.0, {2.0, 4.0}, 1.0, 20, Seed{1}, false);
  for (const auto& row : u.rows) {
    CHECK(row.at_least_one.hits == 0);
    CHECK(row.histogram.at(0) == 20);
  }
}

TEST_CASE("vacant probability over a grid of intensities and laws") {
  struct Case {
    RadiusLaw law;
    double second_moment;
  };
  const std::vector<Case> laws{{RadiusLaw::constant(1.0), 1.0}, {RadiusLaw::exponential(2.0), 0.5},
                               {RadiusLaw::two_point(0.5, 0.8, 2.0), 0.8 * 0.25 + 0.2 * 4.0}};
  std::uint64_t k = 0;
  for (const auto& c : laws) {
    const Model m{EnvironmentSpec::homogeneous(), c.law, Window(2, 1.0, 12.0)};
    const auto rows = vacant_probability(m, {0.1, 0.5, 1.0}, 5000, Seed{10 + k++});
    for (const auto& row : rows) {
      const double exact = std::exp(-row.lambda * pi * c.second_moment);
      INFO(c.law.describe() << " lambda " << row.lambda);
      REQUIRE(row.closed_form);
      CHECK(*row.closed_form == doctest::Approx(exact).epsilon(1e-9));
      CHECK(std::abs(row.vacant.estimate() - exact) <= 4.0 * std::sqrt(exact * (1.0 - exact) / 5000.0));
      CHECK(row.truncation < 1e-9);
      CHECK(row.vacant.se() > 0.0);
      CHECK(row.vacant.ci().lo <= row.vacant.estimate());
      CHECK(row.vacant.ci().hi >= row.vacant.estimate());
    }
  }
}

TEST_CASE("vacant closed form for mixed Poisson intensities") {
  const auto two = EnvironmentSpec::mixed_poisson(RadiusLaw::two_point(0.1, 0.9, 9.1));
  const double k = 0.3 * pi;
  CHECK(*vacant_closed_form(two, RadiusLaw::constant(1.0), 2, 0.3) ==
        doctest::Approx(0.9 * std::exp(-0.1 * k) + 0.1 * std::exp(-9.1 * k)));
  const auto par = EnvironmentSpec::mixed_poisson(RadiusLaw::pareto(2.0 / 3.0, 3.0));
  CHECK(*vacant_closed_form(par, RadiusLaw::constant(1.0), 2, 0.3) == doctest::Approx(pareto_laplace(3.0, k)).epsilon(1e-6));
  CHECK_FALSE(vacant_closed_form(EnvironmentSpec::shot_noise(1.0, 1.0), RadiusLaw::constant(1.0), 2, 0.3));
  // Infinite E[rho^d]: o is covered almost surely and the estimator refuses to run.
  CHECK(*vacant_closed_form(EnvironmentSpec::homogeneous(), RadiusLaw::pareto(1.0, 2.0), 2, 0.3) == 0.0);
  CHECK_THROWS_AS(vacant_probability({EnvironmentSpec::homogeneous(), RadiusLaw::pareto(1.0, 2.0), Window(2, 1.0, 1.0)}, {0.3}, 10, Seed{1}),
                  EstimatorError);
}

TEST_CASE("critical intensity scales with the radius") {
  // lambda_c(r) r^d is scale free: compare r = 1 at L = 6 with r = 2 at L = 12.
  const CriticalOptions opt{0.005, std::nullopt, 2e6};
  const auto a = critical_intensity({EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 6.0, 1.0)}, 300, Seed{20}, opt);
  const auto b = critical_intensity({EnvironmentSpec::homogeneous(), RadiusLaw::constant(2.0), Window(2, 12.0, 2.0)}, 300, Seed{21},
                                    {0.005 / 4.0, std::nullopt, 2e6});
  INFO("r=1: " << a.estimate << " +- " << a.ci_half_width << ", r=2 scaled: " << 4.0 * b.estimate << " +- " << 4.0 * b.ci_half_width);
  CHECK(std::abs(a.estimate - 4.0 * b.estimate) <= a.ci_half_width + 4.0 * b.ci_half_width);
  CHECK(a.estimate > 0.2);
  CHECK(a.estimate < 0.6);
  auto evals = a.evaluations;
  REQUIRE_FALSE(evals.empty());
  std::sort(evals.begin(), evals.end(), [](const CurveRow& x, const CurveRow& y) { return x.lambda < y.lambda; });
  CHECK_FALSE(curve_violates_monotonicity(evals));

  CHECK_THROWS_AS(critical_intensity({EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 6.0, 1.0)}, 50, Seed{22},
                                     {0.01, std::nullopt, 5.0}),
                  EstimatorError);
}

TEST_CASE("monotonicity check on crossing curves") {
  const Model m{EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 4.0, 1.0)};
  const auto rows = percolation_curve(m, {0.1, 0.3, 0.5, 0.8}, 200, Seed{30});
  CHECK_FALSE(curve_violates_monotonicity(rows));
  // Common random numbers make every replicate monotone in lambda.
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].crossing.hits >= rows[i - 1].crossing.hits);
  auto bad = rows;
  bad[0].crossing = {200, 200};
  bad[3].crossing = {0, 200};
  CHECK(curve_violates_monotonicity(bad));
}

TEST_CASE("ladder verdicts") {
  CHECK(ladder_verdict({rung(1.0), rung(1.5), rung(1.55)}) == "stabilizing");
  CHECK(ladder_verdict({rung(1.0), rung(1.5), rung(1.55, 0.05)}) == "inconclusive");
  CHECK(ladder_verdict({rung(1.0), rung(2.0), rung(3.0), rung(4.0)}) == "growing");
  CHECK(ladder_verdict({rung(1.0), rung(2.0), rung(3.0)}) == "inconclusive");
  CHECK(ladder_verdict({rung(1.0), rung(3.0), rung(2.0), rung(4.0)}) == "inconclusive");
  CHECK(observable_from_string(to_string(Observable::volume)) == Observable::volume);
  CHECK_THROWS_AS(observable_from_string("mass"), std::invalid_argument);
}

TEST_CASE("moment ladder") {
  const auto hom = EnvironmentSpec::homogeneous();
  // Constant radius 1: no ball can contain B_{L/2} once L >= 2.
  const auto ml = moment_ladder(hom, RadiusLaw::constant(1.0), 2, 0.05, 1.0, Observable::count, {4.0, 8.0}, 1.0, 500, Seed{40});
  REQUIRE(ml.rungs.size() == 2);
  for (const auto& r : ml.rungs) CHECK(r.witness.hits == 0);
  // Isolated balls dominate at low intensity: the count is at least 1 given coverage.
  CHECK(ml.rungs[0].moment.mean > 0.0);
  CHECK(ml.rungs[1].moment.mean >= ml.rungs[0].moment.mean - 3.0 * ml.rungs[1].moment.se);
  REQUIRE(ml.check_crossing);
  CHECK(ml.check_crossing->estimate() < 0.5);

  CHECK_THROWS_AS(moment_ladder(hom, RadiusLaw::constant(1.0), 2, 1.0, 1.0, Observable::diameter, {4.0, 8.0}, 1.0, 20, Seed{41}),
                  EstimatorError);
}

TEST_CASE("deviation tails for known intensities") {
  const double c = 2.0 * pi;
  const std::vector<double> alphas{1.0, 2.0, 4.0, 8.0};
  const auto hom = deviation_tail(EnvironmentSpec::homogeneous(), 2, c, 1.0, alphas, 100, Seed{50});
  for (const auto& row : hom.rows) {
    CHECK(row.tail.hits == 0);
    CHECK(row.abs_moment == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(row.log_mgf_rate == doctest::Approx(pi));
  }
  CHECK(hom.verdict == "summable");

  // Z v_d >= c only on the atom 9.1: tail is 0.1 for every alpha and I(A) = 0.1 (A - 1).
  const auto mix = deviation_tail(EnvironmentSpec::mixed_poisson(RadiusLaw::two_point(0.1, 0.9, 9.1)), 2, c, 1.0, alphas, 4000, Seed{51});
  for (const auto& row : mix.rows) {
    CHECK(std::abs(row.tail.estimate() - 0.1) <= 4.0 * std::sqrt(0.09 / 4000.0));
    CHECK(row.integral == doctest::Approx(row.tail.estimate() * (row.alpha - 1.0)).epsilon(1e-9));
  }
  CHECK(mix.verdict == "diverging");
}

TEST_CASE("exponential cover probability against direct simulation") {
  for (double L : {0.5, 2.0}) {
    const double p = exponential_cover_probability(1.0, 1.0, L);
    const double mc = mc_line_cover(1.0, 1.0, L, 20000, Seed{60});
    INFO("L " << L << " exact " << p << " mc " << mc);
    CHECK(std::abs(p - mc) <= 4.0 * std::sqrt(p * (1.0 - p) / 20000.0));
  }
  // At L = 0 only the origin must be covered: 1 - exp(-2 lambda E rho).
  CHECK(exponential_cover_probability(1.5, 2.0, 0.0) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-6));
  CHECK(exponential_cover_probability(1.0, 1.0, 5.0) < exponential_cover_probability(1.0, 1.0, 2.0));
}

TEST_CASE("one dimensional triviality") {
  const auto rep = one_dim_triviality(RadiusLaw::exponential(1.0), 1.0, {1.0, 5.0}, 30.0, 4000, Seed{70});
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    REQUIRE(row.exact);
    CHECK(std::abs(row.crossing.estimate() - *row.exact) <= 4.0 * std::sqrt(*row.exact * (1.0 - *row.exact) / 4000.0) + 1e-9);
  }
  CHECK_THROWS_AS(one_dim_triviality(RadiusLaw::pareto(1.0, 1.0), 1.0, {1.0}, 1.0, 10, Seed{1}), EstimatorError);
}

TEST_CASE("uniqueness needs a supercritical intensity") {
  CHECK_THROWS_AS(uniqueness_report(EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), 2, 0.05, {8.0, 16.0}, 1.0, 20, Seed{80}),
                  EstimatorError);
  const auto rep = uniqueness_report(EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), 2, 0.8, {4.0, 8.0}, 1.0, 50, Seed{81});
  for (const auto& row : rep.rows) {
    std::int64_t total = 0;
    for (const auto& [k, n] : row.histogram) total += n;
    CHECK(total == 50);
    CHECK(row.at_least_one.estimate() > 0.9);
  }
}

TEST_CASE("scaling recursion in the subcritical Poisson regime") {
  const Model m{EnvironmentSpec::homogeneous(), RadiusLaw::constant(1.0), Window(2, 99.0, 1.0)};
  const auto rep = scaling_recursion(m, 0.05, {1.0, 10.0}, 500, Seed{90}, {GVariant::point_cluster, GVariant::ball_cluster});
  CHECK(rep.rungs.size() == 4);
  CHECK(rep.pass);
  CHECK_FALSE(rep.phi_unavailable);
  for (const auto& r : rep.rungs) {
    CHECK(r.square_bound.has_value() == (r.alpha == 10.0));
    if (r.alpha == 10.0) CHECK(r.radius_tail == 0.0);
  }
  CHECK_THROWS_AS(scaling_recursion(m, 0.05, {1.0, 5.0}, 10, Seed{1}, {GVariant::point_cluster}), std::invalid_argument);
  CHECK_THROWS_AS(scaling_recursion(m, 0.05, {1.0, 10.0, 100.0}, 10, Seed{1}, {GVariant::point_cluster}), std::invalid_argument);
}
