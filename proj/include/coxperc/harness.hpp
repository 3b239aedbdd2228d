#pragma once

// Experiment configs, dispatch to the estimators, and report files.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coxperc/environments.hpp"
#include "json.hpp"

namespace coxperc::harness {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "coxperc.report/1";
inline constexpr const char* kManifestSchema = "coxperc.manifest/1";

/// Schema violation; the message starts with the offending field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string name;
  std::string description;
  std::string kind;
  std::uint64_t seed = 1;
  std::int64_t replicates = 0;
  std::optional<EnvironmentSpec> environment;
  std::optional<RadiusLaw> law;
  int dim = 0;
  double half_width = 0.0;
  double margin = 0.0;
  std::vector<double> ladder;
  /// Kind-specific knobs with every default filled in.
  json params = json::object();
  std::string output_dir = "results";
};

const std::vector<std::string>& experiment_kinds();

Config parse_config(const json& j);
/// Reads and parses a file; JSON syntax errors are reported as ConfigError.
Config load_config(const std::filesystem::path& path);
/// Canonical form: parse_config(to_json(c)) reproduces c, defaults included.
json to_json(const Config& c);

json to_json(const RadiusLaw& law);
json to_json(const EnvironmentSpec& env);

using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Header line then one line per row; doubles as %.17g, missing values empty.
void write_csv(std::ostream& os, const Table& t);

struct Result {
  Table table;
  json report;
};

Result run_experiment(const Config& c, const Exec& exec = {});

struct PresetInfo {
  std::string name;
  std::string kind;
  std::string description;
  std::filesystem::path path;
};

/// COXPERC_PRESETS if set, else the presets/ directory of the source tree.
std::filesystem::path preset_dir();
std::vector<PresetInfo> list_presets(const std::filesystem::path& dir = preset_dir());
/// A path to an existing file, or the name of a bundled preset (with or without .json).
std::optional<std::filesystem::path> resolve_config(const std::string& arg);

struct RunOptions {
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Exit codes: 0 success, 2 validation error, 3 runtime error.
int run_command(const std::string& config_arg, const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace coxperc::harness
