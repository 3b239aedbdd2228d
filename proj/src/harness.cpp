#include "coxperc/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "coxperc/estimators.hpp"
#include "coxperc/oracles.hpp"
#include "coxperc/tessellation.hpp"

#ifndef COXPERC_PRESET_DIR
#define COXPERC_PRESET_DIR "presets"
#endif

namespace coxperc::harness {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinity; encode non-finite values as strings.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }
json jopt(const std::optional<double>& x) { return x ? jnum(*x) : json(nullptr); }

Cell opt_cell(const std::optional<double>& x) { return x ? Cell{*x} : Cell{}; }

json proportion(const Proportion& p) {
  const Interval ci = p.ci();
  return {{"hits", p.hits}, {"n", p.n}, {"estimate", p.estimate()}, {"se", p.se()}, {"ci", {ci.lo, ci.hi}}};
}

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

Model model(const Config& c) { return {*c.environment, *c.law, Window(c.dim, c.half_width, c.margin)}; }

CriticalOptions critical_options(const json& p) {
  CriticalOptions o;
  o.tolerance = p.at("tolerance").get<double>();
  if (!p.at("initial").is_null()) o.initial = p.at("initial").get<double>();
  o.max_expected_points = p.at("max_expected_points").get<double>();
  return o;
}

json critical_json(const CriticalResult& r) {
  json ev = json::array();
  for (const auto& e : r.evaluations) ev.push_back({{"lambda", e.lambda}, {"crossing", proportion(e.crossing)}});
  return {{"estimate", r.estimate}, {"ci_half_width", r.ci_half_width}, {"half_width", r.half_width},
          {"tolerance", r.tolerance}, {"evaluations", ev},
          {"note", "finite-size crossing point at the stated half width; no extrapolation in L"}};
}

Result vacant(const Config& c, const Exec& exec) {
  const auto rows = vacant_probability(model(c), doubles(c.params["lambdas"]), c.replicates, Seed{c.seed}, exec);
  Result r;
  r.table.columns = {"lambda", "estimate", "se", "closed_form", "n", "ci_lo", "ci_hi", "truncation"};
  json jr = json::array();
  for (const auto& row : rows) {
    const Interval ci = row.vacant.ci();
    r.table.rows.push_back({row.lambda, row.vacant.estimate(), row.vacant.se(), opt_cell(row.closed_form), row.vacant.n, ci.lo,
                            ci.hi, row.truncation});
    jr.push_back({{"lambda", row.lambda}, {"vacant", proportion(row.vacant)}, {"closed_form", jopt(row.closed_form)},
                  {"truncation", row.truncation}});
  }
  r.report = {{"rows", jr}};
  return r;
}

void curve_rows(Table& t, const std::vector<CurveRow>& rows, json& jr) {
  for (const auto& row : rows) {
    const Interval ci = row.crossing.ci();
    t.rows.push_back({row.lambda, row.half_width, row.crossing.estimate(), row.crossing.se(), row.crossing.n, ci.lo, ci.hi});
    jr.push_back({{"lambda", row.lambda}, {"half_width", row.half_width}, {"crossing", proportion(row.crossing)}});
  }
}

Result curve(const Config& c, const Exec& exec) {
  const auto rows = percolation_curve(model(c), doubles(c.params["lambdas"]), c.replicates, Seed{c.seed}, exec);
  Result r;
  r.table.columns = {"lambda", "half_width", "estimate", "se", "n", "ci_lo", "ci_hi"};
  json jr = json::array();
  curve_rows(r.table, rows, jr);
  r.report = {{"rows", jr}, {"non_monotone", curve_violates_monotonicity(rows)}};
  return r;
}

Result critical(const Config& c, const Exec& exec) {
  const CriticalResult res = critical_intensity(model(c), c.replicates, Seed{c.seed}, critical_options(c.params), exec);
  Result r;
  r.table.columns = {"role", "lambda", "half_width", "estimate", "se", "n"};
  for (const auto& e : res.evaluations) {
    r.table.rows.push_back({std::string("evaluation"), e.lambda, e.half_width, e.crossing.estimate(), e.crossing.se(), e.crossing.n});
  }
  r.table.rows.push_back({std::string("critical"), res.estimate, res.half_width, res.estimate, res.ci_half_width / 1.96, c.replicates});
  r.report = critical_json(res);
  return r;
}

Result ladder(const Config& c, const Exec& exec) {
  const json& p = c.params;
  LadderOptions o;
  o.enforce_subcritical = p.at("enforce_subcritical").get<bool>();
  o.check_replicates = p.at("check_replicates").get<std::int64_t>();
  o.volume_samples = p.at("volume_samples").get<std::int64_t>();
  const MomentLadder m = moment_ladder(*c.environment, *c.law, c.dim, p.at("lambda").get<double>(), p.at("s").get<double>(),
                                       observable_from_string(p.at("observable").get<std::string>()), c.ladder, c.margin,
                                       c.replicates, Seed{c.seed}, o, exec);
  Result r;
  r.table.columns = {"half_width", "estimate", "se", "n", "censored_fraction", "witness_alpha", "witness_estimate", "witness_se"};
  json jr = json::array();
  for (const auto& g : m.rungs) {
    r.table.rows.push_back({g.half_width, g.moment.mean, g.moment.se, g.moment.n, g.censored_fraction, g.witness_alpha,
                            g.witness.estimate(), g.witness.se()});
    jr.push_back({{"half_width", g.half_width}, {"mean", g.moment.mean}, {"se", g.moment.se}, {"n", g.moment.n},
                  {"censored_fraction", g.censored_fraction}, {"witness_alpha", g.witness_alpha},
                  {"witness", proportion(g.witness)}});
  }
  r.report = {{"observable", to_string(m.observable)}, {"s", m.s}, {"exponent", m.exponent}, {"lambda", m.lambda},
              {"rungs", jr}, {"verdict", m.verdict},
              {"subcritical_check", m.check_crossing ? proportion(*m.check_crossing) : json(nullptr)}};
  return r;
}

Result deviation(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const DeviationReport d = deviation_tail(*c.environment, c.dim, p.at("c").get<double>(), p.at("s").get<double>(),
                                           doubles(p.at("alphas")), c.replicates, Seed{c.seed}, p.at("beta").get<double>(), exec);
  Result r;
  r.table.columns = {"alpha", "estimate", "se", "n", "log_mgf_rate", "abs_moment", "integral"};
  json jr = json::array();
  for (const auto& row : d.rows) {
    r.table.rows.push_back({row.alpha, row.tail.estimate(), row.tail.se(), row.tail.n, row.log_mgf_rate, row.abs_moment, row.integral});
    jr.push_back({{"alpha", row.alpha}, {"tail", proportion(row.tail)}, {"log_mgf_rate", jnum(row.log_mgf_rate)},
                  {"abs_moment", row.abs_moment}, {"integral", row.integral}});
  }
  r.report = {{"c", d.c}, {"s", d.s}, {"beta", d.beta}, {"rows", jr}, {"relative_growth", d.relative_growth}, {"verdict", d.verdict}};
  return r;
}

Result recursion(const Config& c, const Exec& exec) {
  const json& p = c.params;
  std::vector<GVariant> variants;
  for (const auto& v : p.at("variants")) variants.push_back(v == "point_cluster" ? GVariant::point_cluster : GVariant::ball_cluster);
  const RecursionReport rep = scaling_recursion(model(c), p.at("lambda").get<double>(), doubles(p.at("alphas")), c.replicates,
                                                Seed{c.seed}, variants, exec);
  Result r;
  r.table.columns = {"variant",     "alpha",     "estimate",   "se",         "n",         "reach_estimate",
                     "reach_se",    "radius_tail", "phi_next", "phi_estimated", "square_bound", "scaled_bound",
                     "square_pass",   "scaled_pass", "linear_pass"};
  json jr = json::array();
  for (const auto& g : rep.rungs) {
    r.table.rows.push_back({to_string(g.variant), g.alpha, g.g.estimate(), g.g.se(), g.g.n, g.reach.estimate(), g.reach.se(),
                            g.radius_tail, g.phi_next, g.phi_estimated, opt_cell(g.square_bound), opt_cell(g.scaled_bound),
                            g.square_pass, g.scaled_pass, g.linear_pass});
    jr.push_back({{"variant", to_string(g.variant)}, {"alpha", g.alpha}, {"g", proportion(g.g)}, {"reach", proportion(g.reach)},
                  {"radius_tail", g.radius_tail}, {"phi_next", g.phi_next}, {"phi_estimated", g.phi_estimated},
                  {"square_bound", jopt(g.square_bound)}, {"scaled_bound", jopt(g.scaled_bound)}, {"square_pass", g.square_pass},
                  {"scaled_pass", g.scaled_pass}, {"linear_pass", g.linear_pass}});
  }
  r.report = {{"lambda", rep.lambda}, {"c", rep.c}, {"rungs", jr}, {"phi_unavailable", rep.phi_unavailable}, {"pass", rep.pass}};
  return r;
}

std::string histogram_text(const std::map<int, std::int64_t>& h) {
  std::string s;
  for (const auto& [k, v] : h) s += (s.empty() ? "" : ";") + std::to_string(k) + ":" + std::to_string(v);
  return s;
}

Result uniqueness(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const UniquenessReport u = uniqueness_report(*c.environment, *c.law, c.dim, p.at("lambda").get<double>(), c.ladder, c.margin,
                                               c.replicates, Seed{c.seed}, p.at("require_supercritical").get<bool>(), exec);
  Result r;
  r.table.columns = {"half_width", "estimate", "se", "n", "at_least_one", "at_least_one_se", "histogram"};
  json jr = json::array();
  for (const auto& row : u.rows) {
    r.table.rows.push_back({row.half_width, row.at_least_two.estimate(), row.at_least_two.se(), row.at_least_two.n,
                            row.at_least_one.estimate(), row.at_least_one.se(), histogram_text(row.histogram)});
    json h = json::object();
    for (const auto& [k, v] : row.histogram) h[std::to_string(k)] = v;
    jr.push_back({{"half_width", row.half_width}, {"at_least_two", proportion(row.at_least_two)},
                  {"at_least_one", proportion(row.at_least_one)}, {"histogram", h}});
  }
  r.report = {{"lambda", u.lambda}, {"rows", jr}, {"nonincreasing", u.nonincreasing}};
  return r;
}

Result one_dim(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const OneDimReport o = one_dim_triviality(*c.law, p.at("lambda").get<double>(), c.ladder, c.margin, c.replicates, Seed{c.seed},
                                            p.at("exact_max_half_width").get<double>(), exec);
  Result r;
  r.table.columns = {"half_width", "estimate", "se", "n", "exact"};
  json jr = json::array();
  for (const auto& row : o.rows) {
    r.table.rows.push_back({row.half_width, row.crossing.estimate(), row.crossing.se(), row.crossing.n, opt_cell(row.exact)});
    jr.push_back({{"half_width", row.half_width}, {"crossing", proportion(row.crossing)}, {"exact", jopt(row.exact)}});
  }
  r.report = {{"lambda", o.lambda}, {"rows", jr}, {"nonincreasing", o.nonincreasing}, {"strictly_decreasing", o.strictly_decreasing}};
  return r;
}

Result phi(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const PhiReport ph = phi_hat(*c.environment, c.dim, doubles(p.at("alphas")), p.at("grid_step").get<double>(), c.replicates,
                               Seed{c.seed}, exec);
  Result r;
  r.table.columns = {"alpha", "estimate", "se", "n", "campbell"};
  json jr = json::array();
  for (const auto& row : ph.rows) {
    r.table.rows.push_back({row.alpha, row.hits.estimate(), row.hits.se(), row.hits.n, opt_cell(row.campbell)});
    jr.push_back({{"alpha", row.alpha}, {"phi", proportion(row.hits)}, {"campbell", jopt(row.campbell)}});
  }
  r.report = {{"rows", jr}, {"grid_step", ph.grid_step}, {"experimental", ph.experimental}};
  return r;
}

Result decay(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const DecayReport d = subcritical_decay(*c.environment, *c.law, c.dim, p.at("critical_half_width").get<double>(), c.margin,
                                          p.at("critical_replicates").get<std::int64_t>(), critical_options(p),
                                          p.at("fraction").get<double>(), c.ladder, c.replicates, Seed{c.seed}, exec);
  Result r;
  r.table.columns = {"lambda", "half_width", "estimate", "se", "n", "ci_lo", "ci_hi"};
  json jr = json::array();
  curve_rows(r.table, d.rows, jr);
  r.report = {{"critical", critical_json(d.critical)}, {"fraction", d.fraction}, {"lambda", d.lambda}, {"rows", jr},
              {"strictly_decreasing", d.strictly_decreasing}};
  return r;
}

Result contrast(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const ContrastReport d = zero_critical_contrast(*c.environment, *c.law, c.dim, p.at("critical_half_width").get<double>(),
                                                  c.half_width, c.margin, p.at("critical_replicates").get<std::int64_t>(),
                                                  critical_options(p), p.at("fraction").get<double>(), c.replicates,
                                                  Seed{c.seed}, exec);
  Result r;
  r.table.columns = {"environment", "lambda", "half_width", "estimate", "se", "n", "ci_lo", "ci_hi"};
  for (const auto& [who, row] : {std::pair{std::string("target"), d.target}, std::pair{std::string("reference"), d.reference}}) {
    const Interval ci = row.crossing.ci();
    r.table.rows.push_back({who, row.lambda, row.half_width, row.crossing.estimate(), row.crossing.se(), row.crossing.n, ci.lo, ci.hi});
  }
  r.report = {{"reference_critical", critical_json(d.reference_critical)}, {"fraction", d.fraction}, {"lambda", d.lambda},
              {"target", proportion(d.target.crossing)}, {"reference", proportion(d.reference.crossing)}};
  return r;
}

Result audit(const Config& c, const Exec& exec) {
  const json& p = c.params;
  const double rr = p.at("r").get<double>(), alpha = p.at("alpha").get<double>();
  const Window w(c.dim, c.half_width, c.margin);
  const auto reps = run_replicates(static_cast<std::size_t>(c.replicates), exec.threads, [&](std::size_t i) {
    const EnvRealization e = make_environment(*c.environment, w, Seed{c.seed}.child(i).child(0));
    return essential_connectedness_audit(e, rr, alpha);
  });
  Result r;
  r.table.columns = {"replicate", "precondition", "sup_radius", "connected", "support_nodes"};
  std::int64_t held = 0, held_connected = 0, connected = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const AuditReport& a = reps[i];
    r.table.rows.push_back({static_cast<std::int64_t>(i), to_string(a.precondition), a.sup_radius, a.connected,
                            static_cast<std::int64_t>(a.support_nodes)});
    held += a.precondition == Precondition::held;
    held_connected += a.precondition == Precondition::held && a.connected;
    connected += a.connected;
  }
  r.report = {{"r", rr}, {"alpha", alpha}, {"replicates", c.replicates}, {"precondition_held", held},
              {"connected_when_held", held_connected}, {"connected", connected}};
  return r;
}

Result clustering(const Config& c) {
  const json& p = c.params;
  std::vector<int> dims;
  for (const auto& d : p.at("dims")) dims.push_back(d.get<int>());
  const auto rows = clustering_oracle(dims, static_cast<int>(p.at("trials").get<std::int64_t>()),
                                      static_cast<int>(p.at("max_points").get<std::int64_t>()), Seed{c.seed});
  Result r;
  r.table.columns = {"dim", "trials", "mismatches", "max_points"};
  json jr = json::array();
  std::int64_t bad = 0;
  for (const auto& row : rows) {
    r.table.rows.push_back({std::int64_t{row.dim}, std::int64_t{row.trials}, std::int64_t{row.mismatches}, std::int64_t{row.max_points}});
    jr.push_back({{"dim", row.dim}, {"trials", row.trials}, {"mismatches", row.mismatches}});
    bad += row.mismatches;
  }
  r.report = {{"rows", jr}, {"mismatches", bad}};
  return r;
}

Result diameter(const Config& c) {
  const json& p = c.params;
  const auto rows = diameter_oracle(static_cast<int>(p.at("clusters").get<std::int64_t>()), p.at("pitch").get<double>(), Seed{c.seed});
  Result r;
  r.table.columns = {"cluster", "balls", "formula", "sampled", "abs_diff"};
  double worst = 0.0;
  for (const auto& row : rows) {
    r.table.rows.push_back({std::int64_t{row.cluster}, std::int64_t{row.balls}, row.formula, row.sampled, row.abs_diff});
    worst = std::max(worst, row.abs_diff);
  }
  r.report = {{"clusters", rows.size()}, {"max_abs_diff", worst}};
  return r;
}

Result volume(const Config& c) {
  const json& p = c.params;
  const auto rows = volume_oracle(p.at("samples").get<std::int64_t>(), p.at("separation").get<double>(), Seed{c.seed});
  Result r;
  r.table.columns = {"case", "exact", "estimate", "se", "z"};
  json jr = json::array();
  for (const auto& row : rows) {
    r.table.rows.push_back({row.name, row.exact, row.estimate, row.se, row.z});
    jr.push_back({{"case", row.name}, {"exact", row.exact}, {"estimate", row.estimate}, {"se", row.se}, {"z", row.z}});
  }
  r.report = {{"rows", jr}};
  return r;
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) os << format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) os << v;
            else if constexpr (std::is_same_v<T, bool>) os << (v ? "true" : "false");
            else if constexpr (std::is_same_v<T, std::string>) os << v;
          },
          row[i]);
    }
    os << '\n';
  }
}

Result run_experiment(const Config& c, const Exec& exec) {
  Result r;
  const std::string& k = c.kind;
  if (k == "vacant_probability") r = vacant(c, exec);
  else if (k == "percolation_curve") r = curve(c, exec);
  else if (k == "critical_intensity") r = critical(c, exec);
  else if (k == "moment_ladder") r = ladder(c, exec);
  else if (k == "deviation_tail") r = deviation(c, exec);
  else if (k == "scaling_recursion") r = recursion(c, exec);
  else if (k == "uniqueness") r = uniqueness(c, exec);
  else if (k == "one_dim_triviality") r = one_dim(c, exec);
  else if (k == "phi_hat") r = phi(c, exec);
  else if (k == "subcritical_decay") r = decay(c, exec);
  else if (k == "zero_critical_contrast") r = contrast(c, exec);
  else if (k == "connectedness_audit") r = audit(c, exec);
  else if (k == "clustering_oracle") r = clustering(c);
  else if (k == "diameter_oracle") r = diameter(c);
  else if (k == "volume_oracle") r = volume(c);
  else throw ConfigError("kind: unknown value '" + k + "'");
  json result = std::move(r.report);
  r.report = {{"schema", kReportSchema}, {"name", c.name}, {"kind", c.kind}, {"seed", c.seed},
              {"config", to_json(c)},    {"columns", r.table.columns},     {"result", std::move(result)}};
  return r;
}

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("COXPERC_PRESETS"); env && *env) return env;
  return COXPERC_PRESET_DIR;
}

std::vector<PresetInfo> list_presets(const std::filesystem::path& dir) {
  std::vector<PresetInfo> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    const Config c = load_config(e.path());
    out.push_back({e.path().stem().string(), c.kind, c.description, e.path()});
  }
  std::sort(out.begin(), out.end(), [](const PresetInfo& a, const PresetInfo& b) { return a.name < b.name; });
  return out;
}

std::optional<std::filesystem::path> resolve_config(const std::string& arg) {
  const std::filesystem::path p(arg);
  if (std::filesystem::is_regular_file(p)) return p;
  for (const std::filesystem::path& q : {preset_dir() / arg, preset_dir() / (arg + ".json")}) {
    if (std::filesystem::is_regular_file(q)) return q;
  }
  return std::nullopt;
}

int run_command(const std::string& config_arg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  Config c;
  try {
    const auto path = resolve_config(config_arg);
    if (!path) throw ConfigError(config_arg + ": no such file or preset");
    c = load_config(*path);
    if (opt.seed) c.seed = *opt.seed;
    if (opt.out_dir) c.output_dir = *opt.out_dir;
    if (opt.threads < 1) throw ConfigError("--threads: must be >= 1");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    r = run_experiment(c, Exec{opt.threads});
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    const std::filesystem::path dir(c.output_dir);
    std::filesystem::create_directories(dir);
    const auto csv = dir / (c.name + ".csv");
    const auto rep = dir / (c.name + ".json");
    const auto man = dir / (c.name + ".manifest.json");
    {
      std::ofstream f(csv, std::ios::binary);
      write_csv(f, r.table);
      if (!f) throw std::runtime_error("cannot write " + csv.string());
    }
    {
      std::ofstream f(rep, std::ios::binary);
      f << r.report.dump(2) << '\n';
      if (!f) throw std::runtime_error("cannot write " + rep.string());
    }
    const json manifest{{"schema", kManifestSchema},
                        {"version", kVersion},
                        {"config", to_json(c)},
                        {"seed", c.seed},
                        {"threads", opt.threads},
                        {"wall_time_seconds", wall},
                        {"outputs", {csv.filename().string(), rep.filename().string()}},
                        {"rerun", "coxperc run <config> with the embedded config saved as JSON"}};
    {
      std::ofstream f(man, std::ios::binary);
      f << manifest.dump(2) << '\n';
      if (!f) throw std::runtime_error("cannot write " + man.string());
    }
    out << c.name << ": wrote " << csv.string() << ", " << rep.string() << ", " << man.string() << " (" << format_double(wall)
        << " s)\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace coxperc::harness
