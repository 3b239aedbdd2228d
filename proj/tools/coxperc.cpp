// coxperc command line: run experiments and list the bundled presets.

#include <iostream>

#include "CLI11.hpp"
#include "coxperc/harness.hpp"

namespace h = coxperc::harness;

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for Boolean models driven by Cox processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h::kVersion);

  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");

  std::string config;
  auto* run = app.add_subcommand("run", "Run an experiment config or a preset by name");
  run->add_option("config", config, "Config path or preset name")->required();

  auto* presets = app.add_subcommand("presets", "List the bundled presets");

  std::string check_arg;
  auto* check = app.add_subcommand("check", "Validate a config and print it with every default filled in");
  check->add_option("config", check_arg, "Config path or preset name")->required();

  // Global options are accepted after the subcommand too.
  for (auto* sub : {run, presets, check}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (*run) return h::run_command(config, h::RunOptions{threads, seed, out_dir}, std::cout, std::cerr);

  try {
    if (*presets) {
      const auto list = h::list_presets();
      if (list.empty()) {
        std::cerr << "no presets found in " << h::preset_dir().string() << '\n';
        return 3;
      }
      for (const auto& p : list) std::cout << p.name << "  [" << p.kind << "]  " << p.description << '\n';
      return 0;
    }
    const auto path = h::resolve_config(check_arg);
    if (!path) throw h::ConfigError(check_arg + ": no such file or preset");
    std::cout << h::to_json(h::load_config(*path)).dump(2) << '\n';
    return 0;
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
