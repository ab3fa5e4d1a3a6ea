#include "ncmart/errors.hpp"
#include "ncmart/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

using namespace ncmart;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ncmart::Error");
  return ErrorKind::ConfigError;
}

ExperimentConfig small(std::string mode) {
  ExperimentConfig c = preset_config("hoeffding");
  c.mode = std::move(mode);
  c.space = {2, 2, 2, 2};
  c.horizon = 6;
  c.n_paths = 2000;
  c.seed = 7;
  c.gt_dims = {2, 4};
  c.gt_pairs = 20;
  c.space_samples = 10;
  return c;
}

std::set<std::string> tags(const json& report) {
  std::set<std::string> out;
  for (const auto& row : report["rows"]) out.insert(row["tag"].get<std::string>());
  return out;
}

}  // namespace

TEST_CASE("presets") {
  const ExperimentConfig h = preset_config("hoeffding");
  CHECK(h.params.alpha == 1.0);
  CHECK(h.params.beta == 1.0);
  CHECK(h.params.gamma == 0.0);
  const ExperimentConfig a = preset_config("asymmetric");
  CHECK(a.params.alpha == 2.0);
  CHECK(a.params.beta == 1.0);
  const ExperimentConfig k = preset_config("khan-drift");
  CHECK(k.params.gamma == 0.5);
  CHECK(kind_of([] { (void)preset_config("nope"); }) == ErrorKind::ConfigError);
}

TEST_CASE("config loading is strict") {
  const json good = {{"preset", "asymmetric"}, {"seed", 3}, {"params", {{"a", 0.25}}}, {"horizon", 4}};
  const ExperimentConfig c = load_config(good);
  CHECK(c.params.alpha == 2.0);
  CHECK(c.params.a == 0.25);
  CHECK(c.seed == 3u);
  CHECK(c.horizon == 4);
  CHECK(kind_of([] { (void)load_config(json{{"hrizon", 4}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { (void)load_config(json{{"params", {{"alpha", "x"}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { (void)load_config(json{{"params", {{"delta", 1}}}}); }) == ErrorKind::ConfigError);
  const json round = to_json(c);
  const ExperimentConfig again = load_config(round);
  CHECK(to_json(again) == round);
}

TEST_CASE("validation") {
  ExperimentConfig c = small("mc-run");
  CHECK_NOTHROW(validate(c));
  c.seed.reset();
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::ConfigError);
  c.mode = "lemma-check";
  CHECK_NOTHROW(validate(c));
  c.mode = "bounds";
  CHECK_NOTHROW(validate(c));
  c.params.alpha = -1.0;
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::ConfigError);
  c = small("nope");
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::ConfigError);
  c = small("all");
  c.envelope = "explicit-grid";
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::ConfigError);
}

TEST_CASE("invalid config maps to exit code 2") {
  ExperimentConfig c = small("gt-check");
  c.seed.reset();
  const RunResult r = run(c);
  CHECK(r.exit_code == ExitCode::config_error);
  CHECK(r.report["errors"][0]["kind"] == "ConfigError");
}

TEST_CASE("lemma-check passes") {
  ExperimentConfig c;
  c.mode = "lemma-check";
  const RunResult r = run(c);
  CHECK(r.exit_code == ExitCode::ok);
  CHECK(tags(r.report) == std::set<std::string>{"lemma"});
  CHECK(r.report["rows"][0]["detail"]["points"] == 101 * 1001);
}

TEST_CASE("saturated envelope is a numerical failure") {
  ExperimentConfig c = small("bounds");
  c.envelope = "saturated";
  const RunResult r = run(c);
  CHECK(r.exit_code == ExitCode::numerical_failure);
  bool found = false;
  for (const auto& e : r.report["errors"]) found = found || e["kind"] == "NoFiniteIndex";
  CHECK(found);
}

TEST_CASE("all suites on a small hoeffding run") {
  const RunResult r = run(small("all"));
  CHECK(r.exit_code == ExitCode::ok);
  CHECK(r.report["schema_version"] == 1);
  const auto t = tags(r.report);
  for (const char* expected : {"gt", "lemma", "tower", "eq32", "eq33", "cor_ncbr", "cor_azuma_nc", "cor_khan_a",
                               "cor_khan_b", "cor_azuma_classical"}) {
    CHECK_MESSAGE(t.count(expected) == 1, expected);
  }
  for (const auto& row : r.report["rows"]) CHECK(row["status"] != "fail");
  REQUIRE(r.csv.count("bounds.csv") == 1);
  CHECK(r.csv.at("bounds.csv").rfind("mode,t0,constant,minimal_index,m,rhs,lhs,margin,log_rhs\n", 0) == 0);
  CHECK(r.csv.at("mc.csv").rfind("mode,seed,n_paths,horizon,a,b,m,i,p_hat,ci_low,ci_high,rhs,verdict\n", 0) == 0);
  CHECK(r.csv.at("exact.csv").rfind("mode,m,exact_p,rhs,margin\n", 0) == 0);
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  const ExperimentConfig c = small("nc-verify");
  const RunResult first = run(c);
  const RunResult second = run(c);
  CHECK(first.report.contains("generated_at"));
  CHECK(deterministic_dump(first.report) == deterministic_dump(second.report));
  CHECK(first.csv == second.csv);
  ExperimentConfig other = c;
  other.seed = 8;
  CHECK(deterministic_dump(run(other).report) != deterministic_dump(first.report));
}

TEST_CASE("outputs honour the directory override") {
  const auto base = std::filesystem::temp_directory_path() / "ncmart_test_outputs";
  std::filesystem::remove_all(base);
  ExperimentConfig c;
  c.mode = "lemma-check";
  c.output_dir = (base / "configured").string();
  const RunResult r = run(c);
  write_outputs(r, c);
  CHECK(std::filesystem::exists(base / "configured" / "report.json"));
  CHECK(std::filesystem::exists(base / "configured" / "checks.csv"));
  ::setenv("NCMART_OUTPUT_DIR", (base / "env").c_str(), 1);
  write_outputs(r, c);
  ::unsetenv("NCMART_OUTPUT_DIR");
  CHECK(std::filesystem::exists(base / "env" / "report.json"));
  std::filesystem::remove_all(base);
}
