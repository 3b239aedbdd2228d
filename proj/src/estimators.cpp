#include "coxperc/estimators.hpp"

#include <algorithm>
#include <cstdio>

#include "coxperc/coxsampler.hpp"

namespace coxperc {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_lambda(double lambda) { require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0"); }

void require_finite_d_moment(const RadiusLaw& law, int dim) {
  if (!std::isfinite(law.moment(dim))) {
    throw EstimatorError("E[rho^d] is infinite, so the Boolean model covers the whole space almost surely");
  }
}

bool covers_origin(const MarkedPointSet& mps) {
  const Point o = Point::zero(mps.dim());
  for (std::size_t i = 0; i < mps.size(); ++i)
    if (distance(mps.points[i], o) < mps.radii[i]) return true;
  return false;
}

// The sample restricted to a smaller padded window, carrying that window.
MarkedPointSet restrict_to(const MarkedPointSet& mps, const Window& w) {
  MarkedPointSet out = mps.restricted(w.padded_half_width());
  out.window = w;
  return out;
}

bool crosses(const MarkedPointSet& mps, double half_width) {
  const ClusterLabels lab = build_clusters(mps);
  return crossing_exists(mps, lab, Window(mps.dim(), half_width), 0);
}

double expected_points(const Model& m, double lambda) { return lambda * m.window.padded_volume(); }

std::vector<Proportion> crossing_fractions(const Model& m, const std::vector<double>& lambdas, std::int64_t replicates, Seed seed,
                                           const Exec& exec) {
  auto flags = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const Seed rs = seed.child(i);
    const EnvRealization env = make_environment(m.env, m.window, rs.child(0));
    std::vector<char> row(lambdas.size(), 0);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      row[k] = crosses(sample_marked(env, m.law, lambdas[k], rs), m.window.half_width()) ? 1 : 0;
    }
    return row;
  });
  std::vector<Proportion> out(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out[k].n = replicates;
    for (const auto& f : flags) out[k].hits += f[k];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<double> vacant_closed_form(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda) {
  const double k = lambda * unit_ball_volume(dim) * law.moment(dim);
  if (std::holds_alternative<env::Homogeneous>(env.variant())) return std::exp(-k);
  if (const auto* mp = std::get_if<env::MixedPoisson>(&env.variant())) {
    if (const auto* t = std::get_if<law::TwoPoint>(&mp->z.variant())) {
      return t->p1 * std::exp(-k * t->r1) + (1.0 - t->p1) * std::exp(-k * t->r2);
    }
    if (const auto* p = std::get_if<law::Pareto>(&mp->z.variant())) {
      // Z = scale * U^{-1/tail} with U uniform on (0, 1].
      const auto f = [&](double u) { return std::exp(-k * p->scale * std::pow(u, -1.0 / p->tail)); };
      return gauss_legendre(f, 0.0, 1.0, 4000);
    }
  }
  return std::nullopt;
}

std::vector<VacantRow> vacant_probability(const Model& m, const std::vector<double>& lambdas, std::int64_t replicates, Seed seed,
                                          const Exec& exec) {
  require(replicates > 0, "replicates must be positive");
  for (double l : lambdas) require_lambda(l);
  require_finite_d_moment(m.law, m.window.dim());
  auto flags = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const Seed rs = seed.child(i);
    const EnvRealization env = make_environment(m.env, m.window, rs.child(0));
    std::vector<char> row(lambdas.size(), 0);
    for (std::size_t k = 0; k < lambdas.size(); ++k) row[k] = covers_origin(sample_marked(env, m.law, lambdas[k], rs)) ? 0 : 1;
    return row;
  });
  std::vector<VacantRow> out;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    VacantRow row;
    row.lambda = lambdas[k];
    row.vacant.n = replicates;
    for (const auto& f : flags) row.vacant.hits += f[k];
    row.closed_form = vacant_closed_form(m.env, m.law, m.window.dim(), lambdas[k]);
    row.truncation = m.law.survival(m.window.padded_half_width());
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CurveRow> percolation_curve(const Model& m, const std::vector<double>& lambdas, std::int64_t replicates, Seed seed,
                                        const Exec& exec) {
  require(replicates > 0, "replicates must be positive");
  require(std::is_sorted(lambdas.begin(), lambdas.end()), "lambda grid must be sorted");
  for (double l : lambdas) require_lambda(l);
  const auto props = crossing_fractions(m, lambdas, replicates, seed, exec);
  std::vector<CurveRow> out;
  for (std::size_t k = 0; k < lambdas.size(); ++k) out.push_back({lambdas[k], m.window.half_width(), props[k]});
  return out;
}

bool curve_violates_monotonicity(const std::vector<CurveRow>& rows) {
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = j + 1; k < rows.size(); ++k)
      if (rows[j].crossing.ci().lo > rows[k].crossing.ci().hi) return true;
  return false;
}

CriticalResult critical_intensity(const Model& m, std::int64_t replicates, Seed seed, const CriticalOptions& opt, const Exec& exec) {
  require(replicates > 0, "replicates must be positive");
  require(opt.tolerance > 0.0, "tolerance must be positive");
  const int dim = m.window.dim();
  CriticalResult res;
  res.half_width = m.window.half_width();
  res.tolerance = opt.tolerance;

  auto eval = [&](double lambda) {
    if (expected_points(m, lambda) > opt.max_expected_points) {
      throw EstimatorError("no supercritical phase detected at this scale (lambda " + num(lambda) +
                           " exceeds the point budget before crossing probability reached 1/2)");
    }
    const Proportion p = crossing_fractions(m, {lambda}, replicates, seed, exec)[0];
    res.evaluations.push_back({lambda, m.window.half_width(), p});
    return p.estimate();
  };

  double guess = opt.initial.value_or(0.0);
  if (!(guess > 0.0)) {
    const double md = m.law.moment(dim);
    guess = std::isfinite(md) && md > 0.0 ? 0.5 / (unit_ball_volume(dim) * md) : 0.01;
  }
  double lo = 0.0, hi = 0.0, plo = 0.0, phi = 0.0;
  double p = eval(guess);
  if (p >= 0.5) {
    hi = guess, phi = p;
    for (double l = guess / 2.0;; l /= 2.0) {
      if (l < guess * 1e-9) throw EstimatorError("no subcritical phase detected at this scale");
      const double q = eval(l);
      if (q < 0.5) {
        lo = l, plo = q;
        break;
      }
      hi = l, phi = q;
    }
  } else {
    lo = guess, plo = p;
    for (double l = guess * 2.0;; l *= 2.0) {
      const double q = eval(l);
      if (q >= 0.5) {
        hi = l, phi = q;
        break;
      }
      lo = l, plo = q;
    }
  }
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double q = eval(mid);
    if (q >= 0.5) hi = mid, phi = q;
    else lo = mid, plo = q;
  }
  const double slope = (phi - plo) / (hi - lo);
  res.estimate = slope > 0.0 ? lo + (0.5 - plo) / slope : 0.5 * (lo + hi);
  const double se = std::sqrt(0.25 / static_cast<double>(replicates));
  res.ci_half_width = slope > 0.0 ? std::max(opt.tolerance / 2.0, 1.96 * se / slope) : hi - lo;
  return res;
}

// ---------------------------------------------------------------------------

std::string to_string(Observable o) {
  switch (o) {
    case Observable::volume: return "volume";
    case Observable::diameter: return "diameter";
    default: return "count";
  }
}

Observable observable_from_string(const std::string& s) {
  if (s == "volume") return Observable::volume;
  if (s == "diameter") return Observable::diameter;
  if (s == "count") return Observable::count;
  throw std::invalid_argument("unknown observable '" + s + "' (expected volume, diameter or count)");
}

std::string ladder_verdict(const std::vector<LadderRung>& rungs) {
  if (rungs.size() < 2) return "inconclusive";
  const double last = rungs.back().moment.mean, prev = rungs[rungs.size() - 2].moment.mean;
  const double change = last > 0.0 ? (last - prev) / last : 0.0;
  if (std::abs(change) < 0.10 && rungs.back().censored_fraction < 0.01) return "stabilizing";
  if (rungs.size() >= 4) {
    bool growing = true;
    for (std::size_t k = 1; k < rungs.size(); ++k) growing = growing && rungs[k].moment.mean > rungs[k - 1].moment.mean;
    if (growing) return "growing";
  }
  return "inconclusive";
}

MomentLadder moment_ladder(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda, double s, Observable obs,
                           const std::vector<double>& ladder, double margin, std::int64_t replicates, Seed seed,
                           const LadderOptions& opt, const Exec& exec) {
  require_lambda(lambda);
  require(s > 0.0, "s must be positive");
  require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()), "ladder must be nonempty and sorted");
  require(replicates > 0, "replicates must be positive");
  MomentLadder out;
  out.observable = obs;
  out.s = s;
  out.exponent = obs == Observable::diameter ? s : s / dim;
  out.lambda = lambda;

  if (opt.enforce_subcritical && lambda > 0.0) {
    const Model small{env, law, Window(dim, ladder.front(), margin)};
    const Proportion p = crossing_fractions(small, {2.0 * lambda}, opt.check_replicates, seed.child(1u << 20), exec)[0];
    out.check_crossing = p;
    if (p.estimate() >= 0.5) {
      throw EstimatorError("lambda " + num(lambda) + " is not below half the critical intensity at L = " + num(ladder.front()) +
                           " (crossing fraction at 2 lambda is " + num(p.estimate()) + "); override to proceed");
    }
  }

  const Window big(dim, ladder.back(), margin);
  struct Sample {
    std::vector<double> value;
    std::vector<char> censored;
    std::vector<char> witness;
  };
  auto samples = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const Seed rs = seed.child(i);
    const auto rep = sample_replicate(env, law, big, lambda, rs);
    Sample smp;
    for (double L : ladder) {
      const Window w(dim, L, margin);
      const MarkedPointSet mps = restrict_to(rep.marked, w);
      OriginOptions oo;
      oo.volume = obs == Observable::volume;
      oo.volume_samples = opt.volume_samples;
      const ClusterStats st = origin_cluster_stats(mps, origin_members(mps), oo);
      double x = 0.0;
      switch (obs) {
        case Observable::diameter: x = st.diameter; break;
        case Observable::volume: x = st.volume.estimate; break;
        case Observable::count: x = static_cast<double>(st.point_count); break;
      }
      smp.value.push_back(x > 0.0 ? std::pow(x, out.exponent) : 0.0);
      smp.censored.push_back(st.censored ? 1 : 0);
      bool wit = false;
      for (std::size_t j = 0; j < mps.size() && !wit; ++j) wit = mps.points[j].norm() + L / 2.0 < mps.radii[j];
      smp.witness.push_back(wit ? 1 : 0);
    }
    return smp;
  });

  for (std::size_t k = 0; k < ladder.size(); ++k) {
    LadderRung r;
    r.half_width = ladder[k];
    std::vector<double> xs;
    xs.reserve(samples.size());
    std::int64_t cens = 0;
    r.witness.n = replicates;
    for (const auto& smp : samples) {
      xs.push_back(smp.value[k]);
      cens += smp.censored[k];
      r.witness.hits += smp.witness[k];
    }
    r.moment = mean_se(xs);
    r.censored_fraction = static_cast<double>(cens) / static_cast<double>(replicates);
    r.witness_alpha = ladder[k] / 2.0;
    out.rungs.push_back(r);
  }
  out.verdict = ladder_verdict(out.rungs);
  return out;
}

// ---------------------------------------------------------------------------

DeviationReport deviation_tail(const EnvironmentSpec& env, int dim, double c, double s, const std::vector<double>& alphas,
                               std::int64_t replicates, Seed seed, double beta, const Exec& exec) {
  require(c > unit_ball_volume(dim), "c must exceed the unit-ball volume v_d");
  require(s > 0.0, "s must be positive");
  require(beta > 0.0, "beta must be positive");
  require(!alphas.empty() && std::is_sorted(alphas.begin(), alphas.end()) && alphas.front() >= 1.0,
          "alpha grid must be sorted and start at >= 1");
  require(replicates > 0, "replicates must be positive");
  const Window window(dim, alphas.back(), env.required_margin());
  const Point o = Point::zero(dim);
  auto masses = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const EnvRealization e = make_environment(env, window, seed.child(i).child(0));
    std::vector<double> row;
    for (double a : alphas) row.push_back(measure_of_ball(e, o, a));
    return row;
  });

  DeviationReport rep;
  rep.c = c, rep.s = s, rep.beta = beta;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    DeviationRow row;
    row.alpha = alphas[k];
    const double vol = ball_volume(dim, alphas[k]);
    const double thr = c * std::pow(alphas[k], dim);
    row.tail.n = replicates;
    double mx = -kInf;
    for (const auto& m : masses) mx = std::max(mx, beta * m[k]);
    double sum_exp = 0.0, sum_abs = 0.0;
    for (const auto& m : masses) {
      row.tail.hits += m[k] >= thr ? 1 : 0;
      sum_exp += std::exp(beta * m[k] - mx);
      sum_abs += std::pow(std::abs(m[k] - vol), beta);
    }
    row.log_mgf_rate = (mx + std::log(sum_exp / static_cast<double>(replicates))) / std::pow(alphas[k], dim);
    row.abs_moment = sum_abs / static_cast<double>(replicates);
    xs.push_back(alphas[k]);
    ys.push_back(std::pow(alphas[k], s - 1.0) * row.tail.estimate());
    row.integral = trapezoid(xs, ys);
    rep.rows.push_back(row);
  }
  // Compare I(A) with I(A/2), A the largest alpha.
  const double a_max = alphas.back();
  const double total = rep.rows.back().integral;
  double half = 0.0;
  for (const auto& row : rep.rows)
    if (row.alpha <= a_max / 2.0 * (1.0 + 1e-12)) half = row.integral;
  rep.relative_growth = total > 0.0 ? (total - half) / total : 0.0;
  if (total == 0.0 || rep.relative_growth < 0.05) rep.verdict = "summable";
  else if (rep.relative_growth > 0.25) rep.verdict = "diverging";
  else rep.verdict = "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Range beyond which the environment is independent, +inf when unknown.
double dependence_range(const EnvironmentSpec& env) {
  if (const auto* s = std::get_if<env::ShotNoise>(&env.variant())) return 2.0 * s->support_radius;
  if (const auto* f = std::get_if<env::IndicatorField>(&env.variant())) return 2.0 * f->radius;
  if (const auto* b = std::get_if<env::BooleanCount>(&env.variant())) return 2.0 * b->law.esssup();
  if (std::holds_alternative<env::Homogeneous>(env.variant())) return 0.0;
  return kInf;
}

}  // namespace

RecursionReport scaling_recursion(const Model& m, double lambda, const std::vector<double>& alphas, std::int64_t replicates,
                                  Seed seed, const std::vector<GVariant>& variants, const Exec& exec) {
  require_lambda(lambda);
  require(!alphas.empty(), "alpha ladder must be nonempty");
  require(!variants.empty(), "at least one G-event variant is needed");
  require(replicates > 0, "replicates must be positive");
  for (std::size_t k = 1; k < alphas.size(); ++k) {
    require(std::abs(alphas[k] / alphas[k - 1] - 10.0) < 1e-9, "alpha ladder must be geometric with ratio 10");
  }
  const int dim = m.window.dim();
  if (10.0 * alphas.back() > m.window.padded_half_width() * (1.0 + 1e-12)) {
    throw std::invalid_argument("alpha ladder leaves the window: need padded half width >= " + num(10.0 * alphas.back()));
  }

  const std::size_t nv = variants.size(), na = alphas.size();
  struct Flags {
    std::vector<char> g;
    std::vector<char> reach;
  };
  auto flags = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const auto rep = sample_replicate(m.env, m.law, m.window, lambda, seed.child(i));
    Flags f;
    for (GVariant v : variants)
      for (double a : alphas) f.g.push_back(g_event(rep.marked, a, v) ? 1 : 0);
    const ClusterStats st = origin_cluster_stats(rep.marked, origin_members(rep.marked));
    for (double a : alphas) f.reach.push_back(st.reach >= 9.0 * a ? 1 : 0);
    return f;
  });

  RecursionReport rep;
  rep.lambda = lambda;
  const double range = dependence_range(m.env);
  std::optional<PhiReport> phi;
  if (range == kInf && m.env.has_radius_field() && na > 1) {
    std::vector<double> next;
    for (std::size_t k = 1; k < na; ++k) next.push_back(alphas[k]);
    phi = phi_hat(m.env, dim, next, next.front() / 10.0, std::min<std::int64_t>(replicates, 200), seed.child(1u << 21), exec);
  }

  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<Proportion> g(na), reach(na);
    for (std::size_t k = 0; k < na; ++k) {
      g[k].n = reach[k].n = replicates;
      for (const auto& f : flags) {
        g[k].hits += f.g[v * na + k];
        reach[k].hits += f.reach[k];
      }
    }
    const double a0 = alphas.front();
    const double c = lambda > 0.0 ? std::max(1.0, g[0].estimate() / (lambda * std::pow(a0, dim))) : 1.0;
    rep.c[to_string(variants[v])] = c;
    for (std::size_t k = 0; k < na; ++k) {
      RecursionRung r;
      r.variant = variants[v];
      r.alpha = alphas[k];
      r.g = g[k];
      r.reach = reach[k];
      const double tm = m.law.truncated_moment(dim, alphas[k]);
      r.radius_tail = lambda * c * tm;
      // phi(10 alpha) enters the bound for the next rung.
      const double ten = 10.0 * alphas[k];
      if (ten > range) {
        r.phi_next = 0.0, r.phi_estimated = true;
      } else if (phi && k + 1 < na) {
        r.phi_next = phi->rows[k].hits.estimate(), r.phi_estimated = true;
      } else {
        r.phi_next = 1.0, r.phi_estimated = false;
      }
      r.linear_pass = g[k].estimate() <= c * lambda * std::pow(alphas[k], dim) + 3.0 * g[k].se();
      if (k > 0) {
        const RecursionRung& prev = rep.rungs.back();
        const double f_prev = g[k - 1].estimate(), se_prev = g[k - 1].se();
        const double gterm = prev.radius_tail + 2.0 * c * prev.phi_next;
        if (!prev.phi_estimated) rep.phi_unavailable = true;
        const double f = g[k].estimate();
        const double se_square = std::sqrt(g[k].se() * g[k].se() + std::pow(2.0 * f_prev * se_prev, 2));
        const double se_scaled = std::sqrt(g[k].se() * g[k].se() + std::pow(2.0 * c * f_prev * se_prev, 2));
        r.square_bound = f_prev * f_prev + gterm;
        r.scaled_bound = c * f_prev * f_prev + gterm;
        r.square_pass = f <= *r.square_bound + 3.0 * se_square;
        r.scaled_pass = f <= *r.scaled_bound + 3.0 * se_scaled;
      }
      rep.pass = rep.pass && r.square_pass && r.scaled_pass;
      rep.rungs.push_back(r);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

UniquenessReport uniqueness_report(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda,
                                   const std::vector<double>& ladder, double margin, std::int64_t replicates, Seed seed,
                                   bool require_supercritical, const Exec& exec) {
  require_lambda(lambda);
  require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()), "ladder must be nonempty and sorted");
  require(replicates > 0, "replicates must be positive");
  const Window big(dim, ladder.back(), margin);
  auto counts = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const auto rep = sample_replicate(env, law, big, lambda, seed.child(i));
    std::vector<int> row;
    for (double L : ladder) {
      const MarkedPointSet mps = restrict_to(rep.marked, Window(dim, L, margin));
      row.push_back(giant_cluster_count(mps, build_clusters(mps), Window(dim, L)));
    }
    return row;
  });
  UniquenessReport out;
  out.lambda = lambda;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    UniquenessRow row;
    row.half_width = ladder[k];
    row.at_least_two.n = row.at_least_one.n = replicates;
    for (const auto& c : counts) {
      ++row.histogram[c[k]];
      row.at_least_two.hits += c[k] >= 2 ? 1 : 0;
      row.at_least_one.hits += c[k] >= 1 ? 1 : 0;
    }
    out.rows.push_back(row);
  }
  if (require_supercritical && lambda > 0.0 && out.rows.front().at_least_one.estimate() < 0.5) {
    throw EstimatorError("lambda " + num(lambda) + " is not supercritical at L = " + num(ladder.front()) +
                         " (spanning fraction " + num(out.rows.front().at_least_one.estimate()) + ")");
  }
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    out.nonincreasing = out.nonincreasing && out.rows[k].at_least_two.estimate() <= out.rows[k - 1].at_least_two.estimate();
  }
  return out;
}

// ---------------------------------------------------------------------------

double exponential_cover_probability(double lambda, double rate, double half_width) {
  // Left endpoints X - rho arrive as a rate-lambda Poisson process and each
  // interval lasts 2 rho ~ Exp(rate / 2): the covering count is an M/M/inf
  // queue started in equilibrium. Coverage of [-L, L] means the queue never
  // empties during a time 2L.
  if (lambda <= 0.0) return 0.0;
  const double mu = rate / 2.0;
  const double mean = lambda / mu;
  const int n_max = static_cast<int>(mean + 12.0 * std::sqrt(mean) + 30.0);
  std::vector<double> p(static_cast<std::size_t>(n_max + 2), 0.0);
  double term = std::exp(-mean);
  for (int n = 1; n <= n_max; ++n) {
    term *= mean / n;
    p[static_cast<std::size_t>(n)] = term;
  }
  auto deriv = [&](const std::vector<double>& x, std::vector<double>& dx) {
    for (int n = 1; n <= n_max; ++n) {
      const auto u = static_cast<std::size_t>(n);
      double d = -(lambda + n * mu) * x[u];
      if (n > 1) d += lambda * x[u - 1];
      if (n < n_max) d += (n + 1) * mu * x[u + 1];
      dx[u] = d;
    }
  };
  const double t_end = 2.0 * half_width;
  const double rate_max = lambda + n_max * mu;
  const int steps = std::max(100, static_cast<int>(std::ceil(t_end * rate_max * 4.0)));
  const double h = t_end / steps;
  std::vector<double> k1(p.size()), k2(p.size()), k3(p.size()), k4(p.size()), tmp(p.size());
  for (int s = 0; s < steps; ++s) {
    deriv(p, k1);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    deriv(tmp, k2);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    deriv(tmp, k3);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + h * k3[i];
    deriv(tmp, k4);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  double total = 0.0;
  for (double x : p) total += x;
  return total;
}

OneDimReport one_dim_triviality(const RadiusLaw& law, double lambda, const std::vector<double>& ladder, double margin,
                                std::int64_t replicates, Seed seed, double exact_max_half_width, const Exec& exec) {
  require_lambda(lambda);
  if (!std::isfinite(law.moment(1.0))) {
    throw EstimatorError("E[rho] is infinite, so the line is covered almost surely");
  }
  require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()), "ladder must be nonempty and sorted");
  require(replicates > 0, "replicates must be positive");
  const Window big(1, ladder.back(), margin);
  const EnvironmentSpec env = EnvironmentSpec::homogeneous();
  auto flags = run_replicates(static_cast<std::size_t>(replicates), exec.threads, [&](std::size_t i) {
    const auto rep = sample_replicate(env, law, big, lambda, seed.child(i));
    std::vector<char> row;
    for (double L : ladder) row.push_back(crosses(restrict_to(rep.marked, Window(1, L, margin)), L) ? 1 : 0);
    return row;
  });
  OneDimReport out;
  out.lambda = lambda;
  const auto* ex = std::get_if<law::Exponential>(&law.variant());
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    OneDimRow row;
    row.half_width = ladder[k];
    row.crossing.n = replicates;
    for (const auto& f : flags) row.crossing.hits += f[k];
    if (ex && ladder[k] <= exact_max_half_width) row.exact = exponential_cover_probability(lambda, ex->rate, ladder[k]);
    out.rows.push_back(row);
  }
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    const double a = out.rows[k - 1].crossing.estimate(), b = out.rows[k].crossing.estimate();
    out.nonincreasing = out.nonincreasing && b <= a;
    out.strictly_decreasing = out.strictly_decreasing && b < a;
  }
  return out;
}

// ---------------------------------------------------------------------------

DecayReport subcritical_decay(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double critical_half_width,
                              double margin, std::int64_t critical_replicates, const CriticalOptions& copt, double fraction,
                              const std::vector<double>& ladder, std::int64_t replicates, Seed seed, const Exec& exec) {
  require(fraction > 0.0 && fraction < 1.0, "fraction must lie in (0, 1)");
  require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()), "ladder must be nonempty and sorted");
  DecayReport out;
  out.fraction = fraction;
  out.critical = critical_intensity(Model{env, law, Window(dim, critical_half_width, margin)}, critical_replicates, seed.child(0),
                                    copt, exec);
  out.lambda = fraction * out.critical.estimate;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const Model m{env, law, Window(dim, ladder[k], margin)};
    out.rows.push_back(percolation_curve(m, {out.lambda}, replicates, seed.child(1 + k), exec)[0]);
  }
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    out.strictly_decreasing = out.strictly_decreasing && out.rows[k].crossing.estimate() < out.rows[k - 1].crossing.estimate();
  }
  return out;
}

ContrastReport zero_critical_contrast(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double critical_half_width,
                                      double half_width, double margin, std::int64_t critical_replicates,
                                      const CriticalOptions& copt, double fraction, std::int64_t replicates, Seed seed,
                                      const Exec& exec) {
  require(fraction > 0.0, "fraction must be positive");
  const EnvironmentSpec ref = EnvironmentSpec::homogeneous();
  ContrastReport out;
  out.fraction = fraction;
  out.reference_critical =
      critical_intensity(Model{ref, law, Window(dim, critical_half_width, margin)}, critical_replicates, seed.child(0), copt, exec);
  out.lambda = fraction * out.reference_critical.estimate;
  out.target = percolation_curve(Model{env, law, Window(dim, half_width, margin)}, {out.lambda}, replicates, seed.child(1), exec)[0];
  out.reference = percolation_curve(Model{ref, law, Window(dim, half_width, margin)}, {out.lambda}, replicates, seed.child(2), exec)[0];
  return out;
}

}  // namespace coxperc
