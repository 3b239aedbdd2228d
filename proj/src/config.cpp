#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

#include "coxperc/harness.hpp"

namespace coxperc::harness {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// Shortest text that reads back as x.
std::string num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Range {
  double lo = -kInf;
  bool lo_open = false;
  double hi = kInf;
  bool hi_open = false;

  std::optional<std::string> violation(double x) const {
    const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
    if (ok) return std::nullopt;
    std::string m = "must be ";
    if (std::isfinite(lo) && std::isfinite(hi)) {
      m += "in " + std::string(lo_open ? "(" : "[") + num(lo) + ", " + num(hi) + (hi_open ? ")" : "]");
    } else if (std::isfinite(lo)) {
      m += std::string(lo_open ? "> " : ">= ") + num(lo);
    } else if (std::isfinite(hi)) {
      m += std::string(hi_open ? "< " : "<= ") + num(hi);
    } else {
      m += "finite";
    }
    return m + ", got " + num(x);
  }
};

const Range kAny{};
const Range kNonneg{0.0};
const Range kPositive{0.0, true};
const Range kProb{0.0, false, 1.0};

// Typed access to one JSON object; remembers which keys were read so the
// rest can be rejected, and collects the resolved values for the echo.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where("") + ": must be an object");
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const { throw ConfigError(where(key) + ": " + msg); }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key, std::optional<double> def, const Range& range = kAny) {
    const json* v = find(key);
    double x = 0.0;
    if (!v) {
      if (!def) fail(key, "required");
      x = *def;
    } else {
      if (!v->is_number()) fail(key, "must be a number");
      x = v->get<double>();
    }
    if (auto m = range.violation(x)) fail(key, *m);
    echo_[key] = x;
    return x;
  }

  std::optional<double> optional_number(const std::string& key, const Range& range = kAny) {
    if (!has(key)) {
      find(key);
      echo_[key] = nullptr;
      return std::nullopt;
    }
    return number(key, std::nullopt, range);
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def, std::int64_t min) {
    const json* v = find(key);
    std::int64_t x = 0;
    if (!v) {
      if (!def) fail(key, "required");
      x = *def;
    } else {
      x = as_integer(*v, key);
    }
    if (x < min) fail(key, "must be >= " + std::to_string(min) + ", got " + std::to_string(x));
    echo_[key] = x;
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    std::uint64_t x = def;
    if (v) {
      if (v->is_number_unsigned()) x = v->get<std::uint64_t>();
      else if (v->is_number_integer()) fail(key, "must be >= 0");
      else fail(key, "must be a nonnegative integer");
    }
    echo_[key] = x;
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    bool x = def;
    if (v) {
      if (!v->is_boolean()) fail(key, "must be true or false");
      x = v->get<bool>();
    }
    echo_[key] = x;
    return x;
  }

  std::string string(const std::string& key, std::optional<std::string> def, const std::vector<std::string>& choices = {}) {
    const json* v = find(key);
    std::string x;
    if (!v) {
      if (!def) fail(key, "required");
      x = *def;
    } else {
      if (!v->is_string()) fail(key, "must be a string");
      x = v->get<std::string>();
    }
    if (!choices.empty() && std::find(choices.begin(), choices.end(), x) == choices.end()) {
      std::string list;
      for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
      fail(key, "unknown value '" + x + "' (expected one of " + list + ")");
    }
    echo_[key] = x;
    return x;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def, const Range& range,
                              bool sorted = false) {
    const json* v = find(key);
    std::vector<double> xs;
    if (!v) {
      if (!def) fail(key, "required");
      xs = *def;
    } else {
      if (!v->is_array()) fail(key, "must be an array of numbers");
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string at = key + "[" + std::to_string(i) + "]";
        if (!e.is_number()) fail(at, "must be a number");
        xs.push_back(e.get<double>());
      }
    }
    if (xs.empty()) fail(key, "must not be empty");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (auto m = range.violation(xs[i])) fail(key + "[" + std::to_string(i) + "]", *m);
      if (sorted && i > 0 && !(xs[i] > xs[i - 1])) fail(key, "must be strictly increasing");
    }
    echo_[key] = xs;
    return xs;
  }

  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> def) {
    const json* v = find(key);
    std::vector<std::int64_t> xs = def;
    if (v) {
      if (!v->is_array()) fail(key, "must be an array of integers");
      xs.clear();
      for (std::size_t i = 0; i < v->size(); ++i) xs.push_back(as_integer((*v)[i], key + "[" + std::to_string(i) + "]"));
    }
    if (xs.empty()) fail(key, "must not be empty");
    echo_[key] = xs;
    return xs;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> def, const std::vector<std::string>& choices) {
    const json* v = find(key);
    std::vector<std::string> xs = def;
    if (v) {
      if (!v->is_array()) fail(key, "must be an array of strings");
      xs.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string at = key + "[" + std::to_string(i) + "]";
        if (!(*v)[i].is_string()) fail(at, "must be a string");
        xs.push_back((*v)[i].get<std::string>());
        if (std::find(choices.begin(), choices.end(), xs.back()) == choices.end()) fail(at, "unknown value '" + xs.back() + "'");
      }
    }
    if (xs.empty()) fail(key, "must not be empty");
    echo_[key] = xs;
    return xs;
  }

  /// Rejects keys that were never read.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

  json& echo() { return echo_; }

 private:
  std::int64_t as_integer(const json& v, const std::string& key) const {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    fail(key, "must be an integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

// ---------------------------------------------------------------------------

RadiusLaw parse_law(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string type = f.string("type", std::nullopt, {"constant", "exponential", "pareto", "two_point", "integer_tail"});
  std::optional<RadiusLaw> law;
  try {
    if (type == "constant") law = RadiusLaw::constant(f.number("r", std::nullopt, kNonneg));
    else if (type == "exponential") law = RadiusLaw::exponential(f.number("rate", std::nullopt, kPositive));
    else if (type == "pareto") {
      const double scale = f.number("scale", std::nullopt, kPositive);
      law = RadiusLaw::pareto(scale, f.number("tail", std::nullopt, kPositive));
    } else if (type == "two_point") {
      const double r1 = f.number("r1", std::nullopt, kNonneg);
      const double p1 = f.number("p1", std::nullopt, kProb);
      law = RadiusLaw::two_point(r1, p1, f.number("r2", std::nullopt, kNonneg));
    } else {
      law = RadiusLaw::integer_tail(f.number("tail", std::nullopt, kPositive));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  f.done();
  return *law;
}

EnvironmentSpec parse_environment(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string type = f.string("type", std::nullopt,
                                    {"homogeneous", "mixed_poisson", "indicator_field", "shot_noise", "boolean_count",
                                     "voronoi_edges", "delaunay_edges", "manhattan_grid"});
  std::optional<EnvironmentSpec> spec;
  auto sub = [&](const std::string& key) -> const json& {
    const json* v = f.find(key);
    if (!v) f.fail(key, "required");
    return *v;
  };
  try {
    if (type == "homogeneous") spec = EnvironmentSpec::homogeneous();
    else if (type == "mixed_poisson") spec = EnvironmentSpec::mixed_poisson(parse_law(sub("z"), f.where("z")));
    else if (type == "indicator_field") {
      const double l1 = f.number("lambda1", std::nullopt, kNonneg);
      const double l2 = f.number("lambda2", std::nullopt, kNonneg);
      const double mu = f.number("mu", std::nullopt, kPositive);
      spec = EnvironmentSpec::indicator_field(l1, l2, mu, f.number("radius", std::nullopt, kPositive));
    } else if (type == "shot_noise") {
      const double mu = f.number("mu", std::nullopt, kPositive);
      spec = EnvironmentSpec::shot_noise(mu, f.number("support_radius", std::nullopt, kPositive));
    } else if (type == "boolean_count") {
      const double mu = f.number("mu", std::nullopt, kPositive);
      const RadiusLaw law = parse_law(sub("law"), f.where("law"));
      if (!law.supports_size_biased()) throw ConfigError(f.where("law") + ": integer_tail cannot drive a boolean_count field");
      spec = EnvironmentSpec::boolean_count(mu, law);
    } else if (type == "voronoi_edges") spec = EnvironmentSpec::voronoi(f.number("mu", std::nullopt, kPositive));
    else if (type == "delaunay_edges") spec = EnvironmentSpec::delaunay(f.number("mu", std::nullopt, kPositive));
    else {
      const double mv = f.number("mu_vertical", std::nullopt, kNonneg);
      spec = EnvironmentSpec::manhattan(mv, f.number("mu_horizontal", std::nullopt, kNonneg));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  f.done();
  return *spec;
}

enum class WindowUse { none, dim_only, half_width, ladder };

struct KindInfo {
  const char* name;
  bool env;
  bool law;
  bool replicates;
  WindowUse window;
};

const std::vector<KindInfo>& kind_table() {
  static const std::vector<KindInfo> t{
      {"vacant_probability", true, true, true, WindowUse::half_width},
      {"percolation_curve", true, true, true, WindowUse::half_width},
      {"critical_intensity", true, true, true, WindowUse::half_width},
      {"moment_ladder", true, true, true, WindowUse::ladder},
      {"deviation_tail", true, false, true, WindowUse::dim_only},
      {"scaling_recursion", true, true, true, WindowUse::half_width},
      {"uniqueness", true, true, true, WindowUse::ladder},
      {"one_dim_triviality", false, true, true, WindowUse::ladder},
      {"phi_hat", true, false, true, WindowUse::dim_only},
      {"subcritical_decay", true, true, true, WindowUse::ladder},
      {"zero_critical_contrast", true, true, true, WindowUse::half_width},
      {"connectedness_audit", true, false, true, WindowUse::half_width},
      {"clustering_oracle", false, false, false, WindowUse::none},
      {"diameter_oracle", false, false, false, WindowUse::none},
      {"volume_oracle", false, false, false, WindowUse::none},
  };
  return t;
}

void critical_knobs(Fields& p) {
  p.number("tolerance", 0.01, kPositive);
  p.optional_number("initial", kPositive);
  p.number("max_expected_points", 2e6, kPositive);
}

json parse_params(const json& j, const Config& c) {
  Fields p(j, "params");
  const std::string& k = c.kind;
  if (k == "vacant_probability") {
    p.numbers("lambdas", std::nullopt, kNonneg);
  } else if (k == "percolation_curve") {
    p.numbers("lambdas", std::nullopt, kNonneg, true);
  } else if (k == "critical_intensity") {
    critical_knobs(p);
  } else if (k == "moment_ladder") {
    p.number("lambda", std::nullopt, kNonneg);
    p.number("s", 1.0, kPositive);
    p.string("observable", "diameter", {"volume", "diameter", "count"});
    p.boolean("enforce_subcritical", true);
    p.integer("check_replicates", 200, 1);
    p.integer("volume_samples", 10000, 1000);
  } else if (k == "deviation_tail") {
    const double vd = unit_ball_volume(c.dim);
    p.number("c", std::nullopt, Range{vd, true});
    p.number("s", 1.0, kPositive);
    p.numbers("alphas", std::nullopt, Range{1.0}, true);
    p.number("beta", 1.0, kPositive);
  } else if (k == "scaling_recursion") {
    p.number("lambda", std::nullopt, kNonneg);
    const auto alphas = p.numbers("alphas", std::nullopt, kPositive, true);
    for (std::size_t i = 1; i < alphas.size(); ++i) {
      if (std::abs(alphas[i] / alphas[i - 1] - 10.0) > 1e-9) p.fail("alphas", "must be geometric with ratio 10");
    }
    if (10.0 * alphas.back() > c.half_width + c.margin) {
      p.fail("alphas", "largest alpha needs a padded half width of at least " + num(10.0 * alphas.back()));
    }
    p.strings("variants", {"point_cluster", "ball_cluster"}, {"point_cluster", "ball_cluster"});
  } else if (k == "uniqueness") {
    p.number("lambda", std::nullopt, kNonneg);
    p.boolean("require_supercritical", true);
  } else if (k == "one_dim_triviality") {
    p.number("lambda", std::nullopt, kNonneg);
    p.number("exact_max_half_width", 50.0, kNonneg);
  } else if (k == "phi_hat") {
    const auto alphas = p.numbers("alphas", std::nullopt, kPositive, true);
    p.number("grid_step", alphas.front() / 10.0, Range{0.0, true, alphas.front() / 10.0 * (1.0 + 1e-12)});
  } else if (k == "subcritical_decay") {
    p.number("critical_half_width", std::nullopt, kPositive);
    p.integer("critical_replicates", c.replicates, 1);
    critical_knobs(p);
    p.number("fraction", 0.25, Range{0.0, true, 1.0, true});
  } else if (k == "zero_critical_contrast") {
    p.number("critical_half_width", std::nullopt, kPositive);
    p.integer("critical_replicates", c.replicates, 1);
    critical_knobs(p);
    p.number("fraction", 0.2, kPositive);
  } else if (k == "connectedness_audit") {
    p.number("r", std::nullopt, kPositive);
    const double alpha = p.number("alpha", std::nullopt, kPositive);
    if (2.0 * alpha > c.half_width + c.margin) p.fail("alpha", "Q_{2 alpha} must lie inside the padded window");
  } else if (k == "clustering_oracle") {
    const auto dims = p.integers("dims", {1, 2, 3});
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (dims[i] < 1 || dims[i] > 3) p.fail("dims[" + std::to_string(i) + "]", "must be 1, 2 or 3");
    p.integer("trials", 100, 1);
    p.integer("max_points", 200, 1);
  } else if (k == "diameter_oracle") {
    p.integer("clusters", 50, 1);
    p.number("pitch", 1e-3, kPositive);
  } else if (k == "volume_oracle") {
    p.integer("samples", 1000000, 1000);
    p.number("separation", 1.0, Range{0.0, false, 2.0, true});
  }
  p.done();
  return p.echo();
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kind_table()) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

Config parse_config(const json& j) {
  Fields f(j, "");
  Config c;
  c.name = f.string("name", std::nullopt);
  if (c.name.empty() || c.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                            std::string::npos) {
    f.fail("name", "must be nonempty and use only letters, digits, '_', '.', '-'");
  }
  c.description = f.string("description", "");
  c.kind = f.string("kind", std::nullopt, experiment_kinds());
  const KindInfo& info = *std::find_if(kind_table().begin(), kind_table().end(), [&](const KindInfo& k) { return c.kind == k.name; });
  c.seed = f.unsigned_integer("seed", 1);

  auto block = [&](const std::string& key, bool wanted) -> const json* {
    const json* v = f.find(key);
    if (wanted && !v) f.fail(key, "required for kind " + c.kind);
    if (!wanted && v) f.fail(key, "not used by kind " + c.kind);
    return v;
  };

  if (info.replicates) c.replicates = f.integer("replicates", std::nullopt, 1);
  else block("replicates", false);
  if (const json* e = block("environment", info.env)) c.environment = parse_environment(*e, "environment");
  if (const json* l = block("radius_law", info.law)) c.law = parse_law(*l, "radius_law");

  if (const json* w = block("window", info.window != WindowUse::none)) {
    Fields wf(*w, "window");
    c.dim = static_cast<int>(wf.integer("dim", std::nullopt, 1));
    if (c.dim > 3) wf.fail("dim", "must be 1, 2 or 3");
    if (c.kind == "one_dim_triviality" && c.dim != 1) wf.fail("dim", "one_dim_triviality requires dim 1");
    if (c.environment && !c.environment->supports_dim(c.dim)) {
      wf.fail("dim", c.environment->type_name() + " does not support dim " + std::to_string(c.dim));
    }
    const bool sized = info.window == WindowUse::half_width || info.window == WindowUse::ladder;
    if (info.window == WindowUse::half_width) c.half_width = wf.number("half_width", std::nullopt, kPositive);
    else if (wf.has("half_width")) wf.fail("half_width", "not used by kind " + c.kind);
    else wf.find("half_width");
    if (info.window == WindowUse::ladder) c.ladder = wf.numbers("ladder", std::nullopt, kPositive, true);
    else if (wf.has("ladder")) wf.fail("ladder", "not used by kind " + c.kind);
    else wf.find("ladder");
    if (sized) {
      const double need = c.environment ? c.environment->required_margin() : 0.0;
      double def = need;
      if (c.law && std::isfinite(c.law->esssup())) def += c.law->esssup();
      c.margin = wf.number("margin", def, kNonneg);
      if (c.margin < need) {
        wf.fail("margin", "must be >= " + num(need) + " for " + c.environment->type_name() + ", got " + num(c.margin));
      }
    } else if (wf.has("margin")) {
      wf.fail("margin", "not used by kind " + c.kind);
    } else {
      wf.find("margin");
    }
    wf.done();
  }

  const json* p = f.find("params");
  c.params = parse_params(p ? *p : json::object(), c);

  if (const json* o = f.find("output")) {
    Fields of(*o, "output");
    c.output_dir = of.string("dir", "results");
    if (c.output_dir.empty()) of.fail("dir", "must not be empty");
    of.done();
  }
  f.done();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RadiusLaw& law) {
  return std::visit(Overloaded{
                        [](const law::Constant& l) { return json{{"type", "constant"}, {"r", l.r}}; },
                        [](const law::Exponential& l) { return json{{"type", "exponential"}, {"rate", l.rate}}; },
                        [](const law::Pareto& l) { return json{{"type", "pareto"}, {"scale", l.scale}, {"tail", l.tail}}; },
                        [](const law::TwoPoint& l) {
                          return json{{"type", "two_point"}, {"r1", l.r1}, {"p1", l.p1}, {"r2", l.r2}};
                        },
                        [](const law::IntegerTail& l) { return json{{"type", "integer_tail"}, {"tail", l.tail}}; },
                    },
                    law.variant());
}

json to_json(const EnvironmentSpec& env) {
  return std::visit(Overloaded{
                        [](const env::Homogeneous&) { return json{{"type", "homogeneous"}}; },
                        [](const env::MixedPoisson& e) { return json{{"type", "mixed_poisson"}, {"z", to_json(e.z)}}; },
                        [](const env::IndicatorField& e) {
                          return json{{"type", "indicator_field"}, {"lambda1", e.lambda1}, {"lambda2", e.lambda2},
                                      {"mu", e.mu},                {"radius", e.radius}};
                        },
                        [](const env::ShotNoise& e) {
                          return json{{"type", "shot_noise"}, {"mu", e.mu}, {"support_radius", e.support_radius}};
                        },
                        [](const env::BooleanCount& e) {
                          return json{{"type", "boolean_count"}, {"mu", e.mu}, {"law", to_json(e.law)}};
                        },
                        [](const env::VoronoiEdges& e) { return json{{"type", "voronoi_edges"}, {"mu", e.mu}}; },
                        [](const env::DelaunayEdges& e) { return json{{"type", "delaunay_edges"}, {"mu", e.mu}}; },
                        [](const env::ManhattanGrid& e) {
                          return json{{"type", "manhattan_grid"}, {"mu_vertical", e.mu_vertical}, {"mu_horizontal", e.mu_horizontal}};
                        },
                    },
                    env.variant());
}

json to_json(const Config& c) {
  const KindInfo& info = *std::find_if(kind_table().begin(), kind_table().end(), [&](const KindInfo& k) { return c.kind == k.name; });
  json j{{"name", c.name}, {"description", c.description}, {"kind", c.kind}, {"seed", c.seed}};
  if (info.replicates) j["replicates"] = c.replicates;
  if (c.environment) j["environment"] = to_json(*c.environment);
  if (c.law) j["radius_law"] = to_json(*c.law);
  if (info.window != WindowUse::none) {
    json w{{"dim", c.dim}};
    if (info.window == WindowUse::half_width) w["half_width"] = c.half_width;
    if (info.window == WindowUse::ladder) w["ladder"] = c.ladder;
    if (info.window == WindowUse::half_width || info.window == WindowUse::ladder) w["margin"] = c.margin;
    j["window"] = w;
  }
  j["params"] = c.params;
  j["output"] = json{{"dir", c.output_dir}};
  return j;
}

}  // namespace coxperc::harness
