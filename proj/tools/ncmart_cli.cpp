// ncmart: run verification suites from a JSON config or a preset.
//
//   ncmart all --preset hoeffding --seed 42 --out results
//   ncmart bounds --config run.json
//
// Flags override config values, which override the preset.

#include "ncmart/errors.hpp"
#include "ncmart/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

namespace {

ncmart::ExperimentConfig load_file(const std::string& path, ncmart::ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ncmart::Error(ncmart::ErrorKind::ConfigError, fmt::format("cannot open '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ncmart::Error(ncmart::ErrorKind::ConfigError, fmt::format("'{}': {}", path, e.what()));
  }
  return ncmart::load_config(j, std::move(base));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail bound verification for noncommutative supermartingales"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<std::int64_t> paths;
  std::string out;
  bool quiet = false;

  for (const std::string& mode : ncmart::experiment_modes()) {
    CLI::App* sub = app.add_subcommand(mode, fmt::format("run the {} suite", mode));
    sub->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("-p,--preset", preset, "hoeffding, asymmetric or khan-drift");
    sub->add_option("--seed", seed, "RNG seed (required by randomized suites)");
    sub->add_option("--horizon", horizon, "truncation horizon");
    sub->add_option("--paths", paths, "Monte Carlo paths per cell");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("-q,--quiet", quiet, "suppress the summary line");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  ncmart::ExperimentConfig cfg;
  try {
    if (!preset.empty()) cfg = ncmart::preset_config(preset);
    if (!config_path.empty()) cfg = load_file(config_path, cfg);
  } catch (const ncmart::Error& e) {
    std::cerr << e.what() << '\n';
    return static_cast<int>(ncmart::ExitCode::config_error);
  }
  cfg.mode = mode;
  if (seed) cfg.seed = *seed;
  if (horizon) cfg.horizon = *horizon;
  if (paths) cfg.n_paths = *paths;
  if (!out.empty()) cfg.output_dir = out;

  const ncmart::RunResult result = ncmart::run(cfg);
  if (result.exit_code != ncmart::ExitCode::config_error) {
    try {
      ncmart::write_outputs(result, cfg);
    } catch (const std::exception& e) {
      std::cerr << "cannot write outputs: " << e.what() << '\n';
      return static_cast<int>(ncmart::ExitCode::config_error);
    }
  }
  if (!quiet) {
    const auto& summary = result.report.value("summary", nlohmann::json::object());
    fmt::print("{}: exit {} (pass {}, warn {}, fail {}, errors {})\n", mode, static_cast<int>(result.exit_code),
               summary.value("pass", 0), summary.value("warn", 0), summary.value("fail", 0),
               result.report.value("errors", nlohmann::json::array()).size());
    for (const auto& e : result.report.value("errors", nlohmann::json::array())) {
      std::cerr << e.value("message", std::string()) << '\n';
    }
  }
  return static_cast<int>(result.exit_code);
}
