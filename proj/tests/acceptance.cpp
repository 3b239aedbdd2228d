// Runs the bundled presets and checks each acceptance criterion, one line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "coxperc/harness.hpp"

namespace h = coxperc::harness;
using h::json;

namespace {

std::map<std::string, h::Result> g_runs;

h::Result fresh(const std::string& preset, int threads) {
  const auto path = h::resolve_config(preset);
  if (!path) throw std::runtime_error("missing preset " + preset);
  return h::run_experiment(h::load_config(*path), coxperc::Exec{threads});
}

// Serial runs are cached so that criterion 14 can compare against them.
const h::Result& run(const std::string& preset) {
  if (auto it = g_runs.find(preset); it != g_runs.end()) return it->second;
  return g_runs.emplace(preset, fresh(preset, 1)).first->second;
}

std::size_t col(const h::Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw std::runtime_error("no column " + name);
}

double num(const h::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::nan("");
}

std::string str(const h::Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return "";
}

double at(const h::Table& t, std::size_t row, const std::string& name) { return num(t.rows.at(row).at(col(t, name))); }

std::string csv_of(const h::Table& t) {
  std::ostringstream os;
  h::write_csv(os, t);
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// --- criteria --------------------------------------------------------------------

Outcome vacant(const std::string& preset) {
  const auto& t = run(preset).table;
  Outcome o{true, ""};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double est = at(t, i, "estimate"), cf = at(t, i, "closed_form"), se = at(t, i, "se");
    const double z = (est - cf) / se;
    o.pass = o.pass && std::abs(est - cf) <= 3.0 * se;
    o.detail += fmt("lambda=%g z=%.2f ", at(t, i, "lambda"), z);
  }
  return o;
}

Outcome c3() {
  const auto& t = run("c03_clustering_oracle").table;
  double mism = 0.0, trials = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) mism += at(t, i, "mismatches"), trials += at(t, i, "trials");
  return {mism == 0.0 && trials > 0.0, fmt("%g mismatches over %g trials", mism, trials)};
}

Outcome c4() {
  const auto& t = run("c04_diameter_oracle").table;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) worst = std::max(worst, at(t, i, "abs_diff"));
  return {!t.rows.empty() && worst <= 2e-3, fmt("max |formula - sampled| = %.3g over %zu clusters", worst, t.rows.size())};
}

Outcome c5() {
  const auto& t = run("c05_volume_oracle").table;
  Outcome o{!t.rows.empty(), ""};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double z = at(t, i, "z");
    o.pass = o.pass && std::abs(z) <= 3.0;
    o.detail += str(t.rows[i][col(t, "case")]) + fmt(" z=%.2f ", z);
  }
  return o;
}

Outcome c6() {
  const auto& t = run("c06_subcritical_decay_shot_noise").table;
  Outcome o{t.rows.size() >= 2, ""};
  double prev = 2.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double p = at(t, i, "estimate"), L = at(t, i, "half_width");
    o.pass = o.pass && p < prev;
    prev = p;
    if (L == 64.0) o.pass = o.pass && p < 0.02;
    o.detail += fmt("L=%g p=%.4f ", L, p);
  }
  return o;
}

Outcome c7() {
  const auto& t = run("c07_zero_critical_mixed_poisson").table;
  double target = std::nan(""), reference = std::nan("");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string e = str(t.rows[i][col(t, "environment")]);
    if (e == "target") target = at(t, i, "estimate");
    if (e == "reference") reference = at(t, i, "estimate");
  }
  return {target >= 0.05 && reference < 0.01, fmt("mixed Poisson %.4f, homogeneous %.4f", target, reference)};
}

Outcome c8() {
  const std::string a = run("c08a_moments_pareto_tau4").report.at("result").value("verdict", "");
  const std::string b = run("c08b_moments_pareto_tau2p5").report.at("result").value("verdict", "");
  return {a == "stabilizing" && b == "growing", "tail 4: " + a + ", tail 2.5: " + b};
}

Outcome c9() {
  Outcome o{true, ""};
  const auto& p = run("c09a_phi_boolean_count_pareto").table;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const double est = at(p, i, "estimate"), se = at(p, i, "se"), bound = at(p, i, "campbell");
    o.pass = o.pass && est <= bound + 2.0 * se;
    o.detail += fmt("a=%g %.3f<=%.3f ", at(p, i, "alpha"), est, bound);
  }
  const auto& c = run("c09b_phi_boolean_count_constant").table;
  double worst = 0.0;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    if (at(c, i, "alpha") > 0.5) worst = std::max(worst, at(c, i, "estimate"));
  o.pass = o.pass && worst == 0.0 && !c.rows.empty();
  o.detail += fmt("| constant radii max phi=%g", worst);
  return o;
}

Outcome c10() {
  const auto& a = run("c10a_deviation_shot_noise").report.at("result");
  const auto& b = run("c10b_deviation_mixed_poisson").report.at("result");
  const std::string va = a.value("verdict", ""), vb = b.value("verdict", "");
  return {va == "summable" && vb == "diverging",
          fmt("shot noise %s (growth %.3f), mixed Poisson %s (growth %.3f)", va.c_str(), a.value("relative_growth", 0.0), vb.c_str(),
              b.value("relative_growth", 0.0))};
}

Outcome c11() {
  Outcome o{true, ""};
  for (const char* preset : {"c11a_uniqueness_poisson", "c11b_uniqueness_voronoi"}) {
    const auto& t = run(preset).table;
    bool found = false;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (at(t, i, "half_width") != 64.0) continue;
      found = true;
      const double p = at(t, i, "estimate");
      o.pass = o.pass && p < 0.05;
      o.detail += fmt("%s P(>=2)=%.3f ", preset, p);
    }
    o.pass = o.pass && found;
  }
  return o;
}

Outcome c12() {
  const auto& t = run("c12_one_dim_exponential").table;
  Outcome o{false, ""};
  bool small = false, big = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double L = at(t, i, "half_width"), p = at(t, i, "estimate");
    if (L == 10.0) {
      const double ex = at(t, i, "exact"), se = at(t, i, "se");
      small = std::abs(p - ex) <= 3.0 * se;
      o.detail += fmt("L=10 %.4f vs exact %.4f; ", p, ex);
    }
    if (L == 1000.0) {
      big = p < 0.05;
      o.detail += fmt("L=1000 %.4f", p);
    }
  }
  o.pass = small && big;
  return o;
}

Outcome c13() {
  const auto& t = run("c13_scaling_recursion").table;
  Outcome o{false, ""};
  int seen = 0;
  bool all = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (at(t, i, "alpha") != 10.0) continue;
    ++seen;
    const bool pass = str(t.rows[i][col(t, "square_pass")]) == "true";
    all = all && pass;
    o.detail += str(t.rows[i][col(t, "variant")]) + fmt(" p=%.4g bound=%.4g ", at(t, i, "estimate"), at(t, i, "square_bound"));
  }
  o.pass = all && seen == 2;
  return o;
}

Outcome c14() {
  Outcome o{true, ""};
  int n = 0;
  for (const auto& p : h::list_presets()) {
    const h::Result& one = run(p.name);
    const std::string csv = csv_of(one.table), rep = one.report.dump();
    for (int threads : {1, 4}) {
      const h::Result again = fresh(p.name, threads);
      if (csv_of(again.table) != csv || again.report.dump() != rep) {
        o.pass = false;
        o.detail += p.name + fmt(" differs at %d threads; ", threads);
      }
    }
    ++n;
  }
  o.detail += fmt("%d presets re-run serially and at 4 threads", n);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::function<Outcome()> check;
    double budget_seconds;
  };
  // Criterion 14 has no budget of its own beyond the presets it re-runs.
  const std::vector<Criterion> criteria{
      {1, [] { return vacant("c01_vacant_poisson"); }, 60},
      {2, [] { return vacant("c02_vacant_mixed_poisson"); }, 60},
      {3, c3, 60},
      {4, c4, 120},
      {5, c5, 60},
      {6, c6, 600},
      {7, c7, 600},
      {8, c8, 900},
      {9, c9, 300},
      {10, c10, 300},
      {11, c11, 900},
      {12, c12, 120},
      {13, c13, 600},
      {14, c14, 1e9},
  };
  int failed = 0;
  for (const auto& [id, check, budget] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s > budget) {
      o.pass = false;
      o.detail += fmt(" [over the %.0fs budget]", budget);
    }
    std::printf("criterion %2d: %s  (%.1fs)  %s\n", id, o.pass ? "PASS" : "FAIL", s, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
