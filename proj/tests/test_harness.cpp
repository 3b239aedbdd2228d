#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "coxperc/harness.hpp"
#include "doctest.h"

using namespace coxperc;
namespace h = coxperc::harness;
namespace fs = std::filesystem;
using h::json;

namespace {

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("coxperc_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const json& j) const {
    const auto p = path / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }
};

json small_vacant() {
  json j = read_json(h::preset_dir() / "c01_vacant_poisson.json");
  j["replicates"] = 2000;
  j["name"] = "small_vacant";
  return j;
}

std::string config_error(const json& j) {
  try {
    h::parse_config(j);
  } catch (const h::ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string csv_of(const h::Result& r) {
  std::ostringstream os;
  h::write_csv(os, r.table);
  return os.str();
}

int run_cli(const std::string& args, const fs::path& err_file) {
  const std::string cmd = std::string(COXPERC_CLI) + " " + args + " >/dev/null 2>" + err_file.string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("presets load and round-trip through the canonical form") {
  const auto presets = h::list_presets();
  REQUIRE(presets.size() >= 10);
  std::set<std::string> kinds;
  for (const auto& p : presets) {
    INFO(p.name);
    const auto resolved = h::resolve_config(p.name);
    REQUIRE(resolved);
    CHECK(*resolved == p.path);
    CHECK(h::resolve_config(p.name + ".json"));
    const json file = read_json(p.path);
    const h::Config c = h::load_config(p.path);
    CHECK(c.name == p.name);
    CHECK(h::to_json(c) == file);
    CHECK(h::to_json(h::parse_config(h::to_json(c))) == h::to_json(c));
    kinds.insert(c.kind);
  }
  CHECK(kinds.size() >= 10);
  CHECK_FALSE(h::resolve_config("no_such_preset"));
}

TEST_CASE("validation errors name the offending field") {
  json j = small_vacant();
  j["params"]["lambdas"] = {0.1, -0.3};
  std::string msg = config_error(j);
  CHECK(msg.find("params.lambdas[1]") != std::string::npos);
  CHECK(msg.find("-0.3") != std::string::npos);

  j = small_vacant();
  j["colour"] = "red";
  CHECK(config_error(j).find("colour: unknown key") != std::string::npos);

  j = small_vacant();
  j["radius_law"]["rate"] = 1.0;
  CHECK(config_error(j).find("radius_law.rate") != std::string::npos);

  j = small_vacant();
  j.erase("kind");
  CHECK(config_error(j).find("kind") != std::string::npos);

  j = small_vacant();
  j["kind"] = "vacancy";
  CHECK_FALSE(config_error(j).empty());

  j = small_vacant();
  j["environment"] = {{"type", "shot_noise"}, {"mu", 1.0}, {"support_radius", 2.0}};
  j["window"]["margin"] = 0.5;
  CHECK(config_error(j).find("window.margin") != std::string::npos);

  j = small_vacant();
  j["window"]["ladder"] = {1.0, 2.0};
  CHECK(config_error(j).find("not used by kind") != std::string::npos);

  j = small_vacant();
  j["window"]["dim"] = 4;
  CHECK(config_error(j).find("window.dim") != std::string::npos);

  j = read_json(h::preset_dir() / "c11a_uniqueness_poisson.json");
  j["window"]["ladder"] = {16.0, 8.0};
  CHECK(config_error(j).find("window.ladder") != std::string::npos);

  CHECK(config_error(json::array()).size() > 0);
}

TEST_CASE("run_command writes outputs and maps errors to exit codes") {
  TempDir tmp;
  std::ostringstream out, err;
  const auto good = tmp.write("good.json", small_vacant());
  CHECK(h::run_command(good.string(), {1, std::nullopt, tmp.path.string()}, out, err) == 0);
  for (const char* ext : {".csv", ".json", ".manifest.json"}) CHECK(fs::exists(tmp.path / (std::string("small_vacant") + ext)));

  const json report = read_json(tmp.path / "small_vacant.json");
  CHECK(report["schema"] == h::kReportSchema);
  CHECK(report["seed"] == 101);
  const json manifest = read_json(tmp.path / "small_vacant.manifest.json");
  CHECK(manifest["schema"] == h::kManifestSchema);
  CHECK(manifest["threads"] == 1);
  // The manifest echoes the effective config, --out included.
  json effective = h::to_json(h::parse_config(small_vacant()));
  effective["output"]["dir"] = tmp.path.string();
  CHECK(manifest["config"] == effective);

  const std::string csv = slurp(tmp.path / "small_vacant.csv");
  CHECK(csv.rfind("lambda,estimate,se,closed_form,n,ci_lo,ci_hi,truncation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  json bad = small_vacant();
  bad["params"]["lambdas"] = {0.1, -1.0};
  std::ostringstream err2;
  CHECK(h::run_command(tmp.write("bad.json", bad).string(), {1, std::nullopt, tmp.path.string()}, out, err2) == 2);
  CHECK(err2.str().find("params.lambdas[1]") != std::string::npos);

  // Infinite E[rho^2] passes validation but the estimator refuses it.
  json heavy = small_vacant();
  heavy["radius_law"] = {{"type", "pareto"}, {"scale", 1.0}, {"tail", 2.0}};
  std::ostringstream err3;
  CHECK(h::run_command(tmp.write("heavy.json", heavy).string(), {1, std::nullopt, tmp.path.string()}, out, err3) == 3);
  CHECK(err3.str().find("infinite") != std::string::npos);

  std::ostringstream err4;
  CHECK(h::run_command((tmp.path / "missing.json").string(), {}, out, err4) == 2);
}

TEST_CASE("command line exit codes") {
  TempDir tmp;
  const auto err = tmp.path / "stderr.txt";
  json bad = small_vacant();
  bad["params"]["lambdas"] = {-0.5};
  CHECK(run_cli("run " + tmp.write("bad.json", bad).string(), err) == 2);
  CHECK(slurp(err).find("params.lambdas[0]") != std::string::npos);
  CHECK(run_cli("presets", err) == 0);
  CHECK(run_cli("check c01_vacant_poisson", err) == 0);
  CHECK(run_cli("run " + tmp.write("good.json", small_vacant()).string() + " --threads 2 --out " + tmp.path.string(), err) == 0);
  CHECK(fs::exists(tmp.path / "small_vacant.csv"));
  CHECK(run_cli("run", err) != 0);
  CHECK(run_cli("--threads 0 presets", err) != 0);
}

TEST_CASE("outputs are identical across runs and thread counts") {
  std::vector<json> configs{small_vacant()};
  {
    json j = read_json(h::preset_dir() / "c11a_uniqueness_poisson.json");
    j["replicates"] = 20;
    j["window"]["ladder"] = {8.0, 16.0};
    configs.push_back(j);
  }
  {
    json j = read_json(h::preset_dir() / "c09a_phi_boolean_count_pareto.json");
    j["replicates"] = 50;
    configs.push_back(j);
  }
  {
    json j = read_json(h::preset_dir() / "x01_indicator_field_islands.json");
    j["replicates"] = 10;
    j["window"]["half_width"] = 4.0;
    configs.push_back(j);
  }
  for (const auto& j : configs) {
    const h::Config c = h::parse_config(j);
    INFO(c.name);
    const auto a = h::run_experiment(c, Exec{1});
    const auto b = h::run_experiment(c, Exec{1});
    const auto t = h::run_experiment(c, Exec{4});
    CHECK(csv_of(a) == csv_of(b));
    CHECK(csv_of(a) == csv_of(t));
    CHECK(a.report.dump() == t.report.dump());
  }
  // A different seed changes the sample.
  h::Config c = h::parse_config(small_vacant());
  const auto base = csv_of(h::run_experiment(c));
  c.seed = 7;
  CHECK(csv_of(h::run_experiment(c)) != base);
}

TEST_CASE("csv cell formatting") {
  h::Table t;
  t.columns = {"a", "b", "c", "d", "e"};
  t.rows.push_back({0.1, std::int64_t{3}, true, std::monostate{}, std::string("x")});
  std::ostringstream os;
  h::write_csv(os, t);
  CHECK(os.str() == "a,b,c,d,e\n0.10000000000000001,3,true,,x\n");
}
