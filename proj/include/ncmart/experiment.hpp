#pragma once

// Batch experiment runner behind the ncmart command line tool.
//
// A run executes one suite (or all of them), collects rows tagged with the
// inequality they check, and produces a JSON report plus CSV tables. Exit
// codes: 0 all checks pass, 1 an inequality violation was found, 2 the
// configuration is invalid, 3 a numerical failure (NoFiniteIndex,
// StateSpaceTooLarge, ...) prevented a check.

#include "ncmart/martingale.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncmart {

inline constexpr int kReportSchemaVersion = 1;

enum class ExitCode : int { ok = 0, violation = 1, config_error = 2, numerical_failure = 3 };

struct ExperimentConfig {
  std::string mode = "all";  // gt-check, lemma-check, space-verify, nc-verify, mc-run, bounds, all
  std::string preset;        // informational: the preset the config started from
  std::vector<Index> space{2, 2, 2};
  BoundParams params;
  std::string envelope = "khan";  // khan, explicit-grid, saturated
  std::vector<std::pair<double, double>> envelope_grid;
  int horizon = 8;
  std::int64_t n_paths = 100000;
  std::optional<std::uint64_t> seed;
  int t_grid_points = 64;
  double t_grid_lo = 1e-3;
  double t_grid_hi_factor = 10.0;
  std::vector<Index> gt_dims{2, 4, 8, 16};
  int gt_pairs = 200;
  int space_samples = 50;
  std::string output_dir = "ncmart-out";
  std::string report_name = "report.json";
};

/// The modes a config may name.
[[nodiscard]] const std::vector<std::string>& experiment_modes();

/// hoeffding (alpha = beta = 1, gamma = 0), asymmetric (alpha = 2, beta = 1,
/// gamma = 0), khan-drift (alpha = 2, beta = 1, gamma = 0.5). ConfigError otherwise.
[[nodiscard]] ExperimentConfig preset_config(std::string_view name);

/// Overlays the keys present in `j` onto `base`. Unknown keys, wrong types and
/// unknown presets raise ConfigError. A "preset" key is applied first.
[[nodiscard]] ExperimentConfig load_config(const nlohmann::json& j, ExperimentConfig base = {});

/// Enforces the numeric constraints (BoundParams signs, horizon, paths, grid)
/// and that every randomized mode has a seed. ConfigError on failure.
void validate(const ExperimentConfig& config);

[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

struct RunResult {
  ExitCode exit_code = ExitCode::ok;
  nlohmann::json report;                     // includes generated_at
  std::map<std::string, std::string> csv;    // file name -> contents
};

/// Validates and executes the configured suite. Never throws for failures
/// inside a suite; they are reported and mapped to exit codes.
[[nodiscard]] RunResult run(const ExperimentConfig& config);

/// Writes report and CSV files under config.output_dir (created if missing).
void write_outputs(const RunResult& result, const ExperimentConfig& config);

/// The report with generated_at removed, serialized; equal across runs with
/// identical config and seed.
[[nodiscard]] std::string deterministic_dump(const nlohmann::json& report);

}  // namespace ncmart
