#include "ncmart/experiment.hpp"

#include "ncmart/bounds.hpp"
#include "ncmart/errors.hpp"
#include "ncmart/generators.hpp"
#include "ncmart/lattice.hpp"
#include "ncmart/mcsim.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>

namespace ncmart {

namespace {

using nlohmann::json;

constexpr double kGtTol = 1e-9;
constexpr double kLemmaTol = 1e-12;
constexpr double kAxiomTol = 1e-9;
constexpr double kMarginTol = 1e-9;
constexpr double kEmbeddingTol = 1e-9;

const std::set<std::string> kRandomizedModes{"gt-check", "space-verify", "nc-verify", "mc-run", "all"};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent seed for a named sub-stream, so suites do not share draws.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(seed ^ splitmix(stream)); }

struct Row {
  std::string suite;
  std::string tag;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  std::string status;  // pass, warn, fail
  json detail = json::object();
};

struct SuiteResult {
  explicit SuiteResult(std::string n) : name(std::move(n)) {}

  std::string name;
  std::vector<Row> rows;
  std::vector<json> bounds;
  std::vector<json> estimates;
  std::vector<json> errors;
  std::vector<std::string> bound_csv;
  std::vector<std::string> mc_csv;
  std::vector<std::string> exact_csv;
  bool numerical_failure = false;

  void add(std::string tag, std::string check, double value, double tol, bool ok, json detail = json::object()) {
    rows.push_back({name, std::move(tag), std::move(check), value, tol, ok ? "pass" : "fail", std::move(detail)});
  }

  void error(const std::string& where, const Error& e) {
    errors.push_back({{"suite", name}, {"where", where}, {"kind", to_string(e.kind())}, {"message", e.what()}});
    if (e.kind() == ErrorKind::NoFiniteIndex || e.kind() == ErrorKind::StateSpaceTooLarge ||
        e.kind() == ErrorKind::NonFiniteResult) {
      numerical_failure = true;
    } else {
      // Anything else escaping a suite is a broken premise, which is also a
      // failed check rather than a clean pass.
      rows.push_back({name, "", where, 0.0, 0.0, "fail", {{"error", e.what()}}});
    }
  }
};

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, fmt::format("key '{}': {}", key, e.what()));
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, std::string_view section) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, fmt::format("'{}' must be an object", section));
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw Error(ErrorKind::ConfigError, fmt::format("unknown key '{}' in {}", key, section));
  }
}

MgfEnvelope make_envelope(const ExperimentConfig& cfg) {
  const BoundParams& p = cfg.params;
  if (cfg.envelope == "khan") return khan_envelope(p.alpha, p.beta, p.gamma);
  if (cfg.envelope == "saturated") return MgfEnvelope::saturated(p.gamma, p.lambda);
  return MgfEnvelope::from_grid(cfg.envelope_grid, p.gamma, p.lambda);
}

bool martingale_regime(const BoundParams& p) { return p.gamma == 0.0; }

/// Modes whose hypotheses the configured regime can satisfy.
std::vector<BoundMode> applicable_modes(const BoundParams& p) {
  std::vector<BoundMode> modes{BoundMode::theorem2_a, BoundMode::theorem2_b, BoundMode::khan_a, BoundMode::khan_b};
  if (martingale_regime(p)) {
    modes.push_back(BoundMode::ncbr);
    modes.push_back(BoundMode::azuma_nc);
  }
  return modes;
}

BoundReport khan_report(BoundMode mode, const BoundParams& p) {
  auto [first, second] = khan_bounds(p);
  return mode == BoundMode::khan_a ? first : second;
}

BoundReport closed_form(BoundMode mode, const BoundParams& p, const MgfEnvelope& env) {
  if (mode == BoundMode::khan_a || mode == BoundMode::khan_b) return khan_report(mode, p);
  return bound_for_mode(mode, p, env);
}

std::string csv_number(double v) { return fmt::format("{}", v); }

// ---------------------------------------------------------------- suites

SuiteResult gt_suite(const ExperimentConfig& cfg) {
  SuiteResult out{"gt-check"};
  for (const Index d : cfg.gt_dims) {
    Rng rng(derive_seed(*cfg.seed, 0x67740000ULL + static_cast<std::uint64_t>(d)));
    double worst = kInf;
    double worst_commuting = 0.0;
    for (int k = 0; k < cfg.gt_pairs; ++k) {
      const HermitianOperator y1 = random_hermitian(d, rng);
      const HermitianOperator y2 = random_hermitian(d, rng);
      const GoldenThompsonTerms t = gt_terms(y1, y2);
      const double scale = std::max(1.0, t.product_trace);
      worst = std::min(worst, (t.product_trace - t.sum_trace) / scale);

      // A commuting pair: two functions of the same operator.
      const SpectralDecomposition dec = eigendecompose(y1);
      const HermitianOperator z = func_calculus(dec, [](double x) { return 0.5 * x * x - x; });
      const GoldenThompsonTerms c = gt_terms(y1, z);
      worst_commuting = std::max(worst_commuting, std::abs(c.product_trace - c.sum_trace) / std::max(1.0, c.product_trace));
    }
    const json detail{{"dim", d}, {"pairs", cfg.gt_pairs}};
    out.add("gt", fmt::format("gap_d{}", d), worst, kGtTol, worst >= -kGtTol, detail);
    out.add("gt", fmt::format("commuting_d{}", d), worst_commuting, kGtTol, worst_commuting <= kGtTol, detail);
  }
  return out;
}

SuiteResult lemma_suite(const ExperimentConfig&) {
  SuiteResult out{"lemma-check"};
  double worst = kInf;
  double at_lambda = 0.0;
  double at_x = 0.0;
  long points = 0;
  for (int li = 0; li <= 100; ++li) {
    const double lambda = li / 100.0;
    for (int xi = -500; xi <= 500; ++xi) {
      const double x = xi / 10.0;
      const double g = lemma_gap(lambda, x);
      ++points;
      if (g < worst) {
        worst = g;
        at_lambda = lambda;
        at_x = x;
      }
    }
  }
  out.add("lemma", "grid_min_gap", worst, kLemmaTol, worst >= -kLemmaTol,
          {{"points", points}, {"lambda", at_lambda}, {"x", at_x}});
  return out;
}

SuiteResult space_suite(const ExperimentConfig& cfg) {
  SuiteResult out{"space-verify"};
  const Filtration filt{TensorSpace(cfg.space)};
  const int depth = filt.depth();
  const Index dim = filt.dim();
  Rng rng(derive_seed(*cfg.seed, 0x73706163ULL));
  std::uniform_int_distribution<int> level_dist(0, depth);

  double tower = 0.0;
  double module = 0.0;
  double trace = 0.0;
  double positivity = kInf;
  for (int k = 0; k < cfg.space_samples; ++k) {
    const Matrix x = random_matrix(dim, rng);
    const double scale = 1.0 + op_norm(x);
    const int i = level_dist(rng);
    const int j = level_dist(rng);
    tower = std::max(tower, verify_tower(filt, i, j, x) / scale);

    const Matrix a = filt.lift(j, random_matrix(filt.space().leading_dim(j), rng));
    const Matrix b = filt.lift(j, random_matrix(filt.space().leading_dim(j), rng));
    module = std::max(module, verify_module_property(filt, j, a, x, b) / (scale * (1.0 + op_norm(a)) * (1.0 + op_norm(b))));

    trace = std::max(trace, std::abs(trace_state(Matrix(filt.cond_exp(j, x))) - trace_state(x)) / scale);

    const HermitianOperator p = random_psd(dim, rng);
    const HermitianOperator ep = filt.cond_exp(j, p);
    positivity = std::min(positivity, min_eigenvalue(ep) / (1.0 + op_norm(p)));
  }
  const json detail{{"space", cfg.space}, {"samples", cfg.space_samples}};
  out.add("tower", "tower_residual", tower, kAxiomTol, tower <= kAxiomTol, detail);
  out.add("tower", "module_residual", module, kAxiomTol, module <= kAxiomTol, detail);
  out.add("tower", "trace_residual", trace, kAxiomTol, trace <= kAxiomTol, detail);
  out.add("tower", "positivity_min_eig", positivity, kAxiomTol, positivity >= -kAxiomTol, detail);
  return out;
}

RealVector chain_template(const ExperimentConfig& cfg) {
  const BoundParams& p = cfg.params;
  const StepDistribution dist = StepDistribution::two_point(p.alpha, p.beta, p.gamma);
  const auto diag = dist.as_uniform_diagonal();
  if (!diag) {
    throw Error(ErrorKind::ConfigError, "step distribution has no uniform diagonal realization with dim <= 64");
  }
  for (const Index d : cfg.space) {
    if (d != diag->size()) {
      throw Error(ErrorKind::ConfigError,
                  fmt::format("chain needs every factor of dimension {}, the size of the step template", diag->size()));
    }
  }
  return *diag;
}

void record_bound(SuiteResult& out, const BoundReport& r, std::string_view context) {
  json j = to_json(r);
  j["context"] = context;
  out.bounds.push_back(j);
  for (std::string& line : bound_csv_rows(r)) out.bound_csv.push_back(std::move(line));
}

SuiteResult nc_suite(const ExperimentConfig& cfg) {
  SuiteResult out{"nc-verify"};
  const RealVector h = chain_template(cfg);
  const int steps = static_cast<int>(cfg.space.size());
  const int horizon = std::min(cfg.horizon, steps);
  Rng rng(derive_seed(*cfg.seed, 0x6e63ULL));
  const AdaptedSequence chain = make_chain(h, steps, ChainKind::conjugated, rng);
  Rng diag_rng(derive_seed(*cfg.seed, 0x64696167ULL));
  const AdaptedSequence diag_chain = make_chain(h, steps, ChainKind::diagonal, diag_rng);
  const StepDistribution dist = StepDistribution::two_point(cfg.params.alpha, cfg.params.beta, cfg.params.gamma);

  MgfEnvelope env = make_envelope(cfg);
  for (const BoundMode mode : applicable_modes(cfg.params)) {
    const std::string where = fmt::format("{}", to_string(mode));
    try {
      const BoundReport r = verify_inequality(chain, cfg.params, env, mode, horizon);
      record_bound(out, r, "conjugated_chain");
      for (const auto& [m, margin] : r.margins) {
        out.add(std::string(tag(mode)), fmt::format("margin_m{}", m), margin, kMarginTol, margin >= -kMarginTol,
                {{"lhs", r.lhs_by_m.at(m)}, {"rhs", r.rhs_by_m.at(m)}, {"log_rhs", r.log_rhs_by_m.at(m)},
                 {"horizon", horizon}});
      }

      // Diagonal embedding: the lattice trace is the classical probability.
      const int i = *r.minimal_index;
      for (int m = 1; m <= cfg.params.m; ++m) {
        if (m + i > horizon) continue;
        const double lattice = tail_event(diag_chain, r.threshold, m + i, horizon).trace;
        const double exact = enumerate_exact(dist, r.threshold.intercept, r.threshold.slope, m, i, horizon);
        const double diff = std::abs(lattice - exact);
        out.add(std::string(tag(mode)), fmt::format("diagonal_embedding_m{}", m), diff, kEmbeddingTol,
                diff <= kEmbeddingTol, {{"lattice", lattice}, {"exact", exact}});
      }

      if (mode == BoundMode::theorem2_a) {
        const MgfCheck mgf = check_mgf_condition(
            chain, env, t_grid(r.t0, cfg.t_grid_points, cfg.t_grid_lo, cfg.t_grid_hi_factor));
        out.add("eq32", "mgf_condition", mgf.worst_scaled, 1e-8, mgf.passed(), {{"at_n", mgf.at_n}, {"at_t", mgf.at_t}});

        // One-step contraction tau(y_n) <= A tau(y_{n-1}) behind the first bound.
        const auto y = aux_sequence(chain, cfg.params.a, cfg.params.b, r.t0);
        double worst = kInf;
        for (std::size_t n = 1; n < y.size(); ++n) {
          const double prev = trace_state(y[n - 1]);
          worst = std::min(worst, (r.constant * prev - trace_state(y[n])) / std::max(1.0, prev));
        }
        out.add("eq32", "aux_recursion", worst, kMarginTol, worst >= -kMarginTol, {{"t0", r.t0}, {"A", r.constant}});
      }

      // Limit behaviour: truncated tails shrink with m and dominate their meet.
      if (mode == BoundMode::theorem2_b) {
        std::vector<int> m_list;
        for (int m = 1; m <= horizon; ++m) m_list.push_back(m);
        const auto traces = tail_meet_trace(chain, r.threshold, m_list, horizon);
        double worst_step = kInf;
        for (std::size_t k = 1; k < traces.size(); ++k) {
          worst_step = std::min(worst_step, traces[k - 1].second - traces[k].second);
        }
        if (traces.size() < 2) worst_step = 0.0;
        out.add("eq33", "tail_monotone", worst_step, kMarginTol, worst_step >= -kMarginTol);

        const Projection limsup = tail_limsup(chain, r.threshold, m_list, horizon);
        bool dominated = true;
        for (const int m : m_list) {
          dominated = dominated && leq_proj(limsup, tail_event(chain, r.threshold, m, horizon).projection);
        }
        out.add("eq33", "limsup_dominated", limsup.trace(), 0.0, dominated);
      }
    } catch (const Error& e) {
      out.error(where, e);
    }
  }
  return out;
}

SuiteResult mc_suite(const ExperimentConfig& cfg) {
  SuiteResult out{"mc-run"};
  const BoundParams& p = cfg.params;
  const StepDistribution dist = StepDistribution::two_point(p.alpha, p.beta, p.gamma);
  MgfEnvelope env = make_envelope(cfg);

  std::vector<BoundMode> modes = applicable_modes(p);
  if (p.beta <= p.alpha) modes.push_back(BoundMode::azuma_classical);

  std::uint64_t cell = 0;
  for (const BoundMode mode : modes) {
    try {
      const BoundReport r = mode == BoundMode::azuma_classical ? azuma_classical_report(p) : closed_form(mode, p, env);
      const int i = *r.minimal_index;
      for (int m = 1; m <= p.m; ++m) {
        ++cell;
        if (m + i > cfg.horizon) continue;
        const std::uint64_t seed = derive_seed(*cfg.seed, 0x6d630000ULL + cell);
        const CrossingEstimate est = simulate_crossing(dist, r.threshold.intercept, r.threshold.slope, m, i,
                                                       cfg.horizon, cfg.n_paths, seed);
        const Comparison mc = compare_bound(est, r, m);
        out.estimates.push_back({{"tag", tag(mode)}, {"seed", seed}, {"n_paths", est.n_paths},
                                 {"horizon", est.horizon}, {"a", est.a}, {"b", est.b}, {"m", m}, {"i", i},
                                 {"hits", est.hits}, {"p_hat", est.p_hat}, {"ci_low", est.ci_low},
                                 {"ci_high", est.ci_high}, {"rhs", mc.rhs}, {"verdict", to_string(mc.verdict)}});
        out.mc_csv.push_back(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", tag(mode), seed, est.n_paths,
                                         est.horizon, csv_number(est.a), csv_number(est.b), m, i,
                                         csv_number(est.p_hat), csv_number(est.ci_low), csv_number(est.ci_high),
                                         csv_number(mc.rhs), to_string(mc.verdict)));
        Row row{out.name, std::string(tag(mode)), fmt::format("mc_m{}", m), mc.margin, 0.0,
                std::string(to_string(mc.verdict)), {{"p_hat", est.p_hat}, {"ci_low", est.ci_low}, {"rhs", mc.rhs}}};
        out.rows.push_back(std::move(row));

        const double exact = enumerate_exact(dist, r.threshold.intercept, r.threshold.slope, m, i, cfg.horizon);
        const Comparison ex = compare_bound(exact, r, m);
        out.exact_csv.push_back(fmt::format("{},{},{},{},{}", tag(mode), m, csv_number(exact), csv_number(ex.rhs),
                                            csv_number(ex.margin)));
        out.add(std::string(tag(mode)), fmt::format("exact_m{}", m), ex.margin, 1e-12,
                ex.verdict == Verdict::pass, {{"exact_p", exact}, {"rhs", ex.rhs}});
      }
    } catch (const Error& e) {
      out.error(std::string(to_string(mode)), e);
    }
  }
  return out;
}

SuiteResult bounds_suite(const ExperimentConfig& cfg) {
  SuiteResult out{"bounds"};
  std::optional<MgfEnvelope> env;
  try {
    env.emplace(make_envelope(cfg));
  } catch (const Error& e) {
    out.error("envelope", e);
    return out;
  }
  std::vector<BoundMode> modes{BoundMode::theorem2_a, BoundMode::theorem2_b};
  try {
    cfg.params.validate_khan();
    modes.push_back(BoundMode::khan_a);
    modes.push_back(BoundMode::khan_b);
  } catch (const Error&) {
  }
  modes.push_back(BoundMode::ncbr);
  modes.push_back(BoundMode::azuma_nc);
  modes.push_back(BoundMode::azuma_classical);

  for (const BoundMode mode : modes) {
    try {
      const BoundReport r =
          mode == BoundMode::azuma_classical ? azuma_classical_report(cfg.params) : closed_form(mode, cfg.params, *env);
      record_bound(out, r, "closed_form");
      out.add(std::string(tag(mode)), "constant", r.constant, 0.0, r.constant > 0.0 && r.constant <= 1.0,
              {{"t0", r.t0}, {"minimal_index", *r.minimal_index}});
    } catch (const Error& e) {
      out.error(std::string(to_string(mode)), e);
    }
  }
  return out;
}

SuiteResult run_suite(const std::string& mode, const ExperimentConfig& cfg) {
  try {
    if (mode == "gt-check") return gt_suite(cfg);
    if (mode == "lemma-check") return lemma_suite(cfg);
    if (mode == "space-verify") return space_suite(cfg);
    if (mode == "nc-verify") return nc_suite(cfg);
    if (mode == "mc-run") return mc_suite(cfg);
    return bounds_suite(cfg);
  } catch (const Error& e) {
    SuiteResult out{mode};
    out.error("suite", e);
    return out;
  }
}

json row_json(const Row& r) {
  json j{{"suite", r.suite}, {"tag", r.tag},   {"check", r.check},
         {"value", r.value}, {"tolerance", r.tolerance}, {"status", r.status}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

std::string csv_table(std::string_view header, const std::vector<std::string>& lines) {
  std::string s(header);
  s += '\n';
  for (const auto& line : lines) {
    s += line;
    s += '\n';
  }
  return s;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace

const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes{"gt-check", "lemma-check", "space-verify", "nc-verify",
                                              "mc-run",   "bounds",      "all"};
  return modes;
}

ExperimentConfig preset_config(std::string_view name) {
  ExperimentConfig c;
  c.preset = std::string(name);
  if (name == "hoeffding") {
    c.params = {.alpha = 1.0, .beta = 1.0, .gamma = 0.0, .lambda = 0.5, .a = 0.5, .b = 0.8, .c = 1.0, .m = 3};
    c.space = std::vector<Index>(8, 2);
    c.horizon = 8;
  } else if (name == "asymmetric") {
    c.params = {.alpha = 2.0, .beta = 1.0, .gamma = 0.0, .lambda = 1.125, .a = 0.5, .b = 0.8, .c = 1.0, .m = 3};
    c.space = std::vector<Index>(5, 3);
    c.horizon = 5;
  } else if (name == "khan-drift") {
    c.params = {.alpha = 2.0, .beta = 1.0, .gamma = 0.5, .lambda = 1.125, .a = 0.5, .b = 0.8, .c = 1.0, .m = 3};
    c.space = std::vector<Index>(8, 2);
    c.horizon = 8;
  } else {
    throw Error(ErrorKind::ConfigError, fmt::format("unknown preset '{}'", name));
  }
  return c;
}

ExperimentConfig load_config(const json& j, ExperimentConfig c) {
  reject_unknown(j,
                 {"mode", "preset", "space", "params", "envelope", "horizon", "n_paths", "seed", "t_grid", "gt",
                  "space_samples", "output"},
                 "config");
  if (j.contains("preset")) c = preset_config(get_as<std::string>(j["preset"], "preset"));
  if (j.contains("mode")) c.mode = get_as<std::string>(j["mode"], "mode");
  if (j.contains("space")) c.space = get_as<std::vector<Index>>(j["space"], "space");
  if (j.contains("params")) {
    const json& p = j["params"];
    reject_unknown(p, {"alpha", "beta", "gamma", "lambda", "a", "b", "c", "m"}, "params");
    if (p.contains("alpha")) c.params.alpha = get_as<double>(p["alpha"], "alpha");
    if (p.contains("beta")) c.params.beta = get_as<double>(p["beta"], "beta");
    if (p.contains("gamma")) c.params.gamma = get_as<double>(p["gamma"], "gamma");
    if (p.contains("lambda")) c.params.lambda = get_as<double>(p["lambda"], "lambda");
    if (p.contains("a")) c.params.a = get_as<double>(p["a"], "a");
    if (p.contains("b")) c.params.b = get_as<double>(p["b"], "b");
    if (p.contains("c")) c.params.c = get_as<double>(p["c"], "c");
    if (p.contains("m")) c.params.m = get_as<int>(p["m"], "m");
  }
  if (j.contains("envelope")) {
    const json& e = j["envelope"];
    if (e.is_string()) {
      c.envelope = e.get<std::string>();
    } else {
      reject_unknown(e, {"kind", "grid"}, "envelope");
      if (e.contains("kind")) c.envelope = get_as<std::string>(e["kind"], "envelope.kind");
      if (e.contains("grid")) c.envelope_grid = get_as<std::vector<std::pair<double, double>>>(e["grid"], "envelope.grid");
    }
  }
  if (j.contains("horizon")) c.horizon = get_as<int>(j["horizon"], "horizon");
  if (j.contains("n_paths")) c.n_paths = get_as<std::int64_t>(j["n_paths"], "n_paths");
  if (j.contains("seed")) {
    if (j["seed"].is_null()) {
      c.seed.reset();
    } else {
      c.seed = get_as<std::uint64_t>(j["seed"], "seed");
    }
  }
  if (j.contains("t_grid")) {
    const json& t = j["t_grid"];
    reject_unknown(t, {"points", "lo", "hi_factor"}, "t_grid");
    if (t.contains("points")) c.t_grid_points = get_as<int>(t["points"], "t_grid.points");
    if (t.contains("lo")) c.t_grid_lo = get_as<double>(t["lo"], "t_grid.lo");
    if (t.contains("hi_factor")) c.t_grid_hi_factor = get_as<double>(t["hi_factor"], "t_grid.hi_factor");
  }
  if (j.contains("gt")) {
    const json& g = j["gt"];
    reject_unknown(g, {"dims", "pairs"}, "gt");
    if (g.contains("dims")) c.gt_dims = get_as<std::vector<Index>>(g["dims"], "gt.dims");
    if (g.contains("pairs")) c.gt_pairs = get_as<int>(g["pairs"], "gt.pairs");
  }
  if (j.contains("space_samples")) c.space_samples = get_as<int>(j["space_samples"], "space_samples");
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"dir", "report"}, "output");
    if (o.contains("dir")) c.output_dir = get_as<std::string>(o["dir"], "output.dir");
    if (o.contains("report")) c.report_name = get_as<std::string>(o["report"], "output.report");
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& modes = experiment_modes();
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) {
    throw Error(ErrorKind::ConfigError, fmt::format("unknown mode '{}'", c.mode));
  }
  try {
    c.params.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  if (c.envelope != "khan" && c.envelope != "saturated" && c.envelope != "explicit-grid") {
    throw Error(ErrorKind::ConfigError, fmt::format("unknown envelope '{}'", c.envelope));
  }
  if (c.envelope == "explicit-grid" && c.envelope_grid.empty()) {
    throw Error(ErrorKind::ConfigError, "explicit-grid envelope needs grid points");
  }
  if (c.space.empty() || std::any_of(c.space.begin(), c.space.end(), [](Index d) { return d < 1; })) {
    throw Error(ErrorKind::ConfigError, "space must list positive factor dimensions");
  }
  if (c.horizon < 1) throw Error(ErrorKind::ConfigError, "horizon must be >= 1");
  if (c.n_paths < 1) throw Error(ErrorKind::ConfigError, "n_paths must be >= 1");
  if (c.t_grid_points < 2 || !(c.t_grid_lo > 0.0) || !(c.t_grid_hi_factor > 0.0)) {
    throw Error(ErrorKind::ConfigError, "t_grid needs points >= 2, lo > 0, hi_factor > 0");
  }
  if (c.gt_pairs < 1 || c.gt_dims.empty() ||
      std::any_of(c.gt_dims.begin(), c.gt_dims.end(), [](Index d) { return d < 1; })) {
    throw Error(ErrorKind::ConfigError, "gt needs pairs >= 1 and positive dims");
  }
  if (c.space_samples < 1) throw Error(ErrorKind::ConfigError, "space_samples must be >= 1");
  if (kRandomizedModes.count(c.mode) != 0 && !c.seed) {
    throw Error(ErrorKind::ConfigError, fmt::format("mode '{}' is randomized and needs a seed", c.mode));
  }
}

json to_json(const ExperimentConfig& c) {
  json grid = json::array();
  for (const auto& [t, f] : c.envelope_grid) grid.push_back({t, f});
  return {{"mode", c.mode},
          {"preset", c.preset},
          {"space", c.space},
          {"params",
           {{"alpha", c.params.alpha},
            {"beta", c.params.beta},
            {"gamma", c.params.gamma},
            {"lambda", c.params.lambda},
            {"a", c.params.a},
            {"b", c.params.b},
            {"c", c.params.c},
            {"m", c.params.m}}},
          {"envelope", {{"kind", c.envelope}, {"grid", grid}}},
          {"horizon", c.horizon},
          {"n_paths", c.n_paths},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"t_grid", {{"points", c.t_grid_points}, {"lo", c.t_grid_lo}, {"hi_factor", c.t_grid_hi_factor}}},
          {"gt", {{"dims", c.gt_dims}, {"pairs", c.gt_pairs}}},
          {"space_samples", c.space_samples},
          {"output", {{"dir", c.output_dir}, {"report", c.report_name}}}};
}

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  result.report["schema_version"] = kReportSchemaVersion;
  result.report["generated_at"] = timestamp();
  try {
    validate(config);
  } catch (const Error& e) {
    result.exit_code = ExitCode::config_error;
    result.report["config"] = to_json(config);
    result.report["errors"] = json::array({{{"suite", "config"}, {"kind", to_string(e.kind())}, {"message", e.what()}}});
    result.report["exit_code"] = static_cast<int>(result.exit_code);
    return result;
  }
  result.report["config"] = to_json(config);

  std::vector<std::string> suites;
  if (config.mode == "all") {
    suites = {"gt-check", "lemma-check", "space-verify", "nc-verify", "mc-run", "bounds"};
  } else {
    suites = {config.mode};
  }

  // Suites run concurrently; assembly below follows the fixed suite order.
  std::vector<std::future<SuiteResult>> futures;
  futures.reserve(suites.size());
  for (const auto& name : suites) {
    futures.push_back(std::async(std::launch::async, [&config, name] { return run_suite(name, config); }));
  }

  json rows = json::array();
  json bounds = json::array();
  json estimates = json::array();
  json errors = json::array();
  std::vector<std::string> bound_csv;
  std::vector<std::string> mc_csv;
  std::vector<std::string> exact_csv;
  std::vector<std::string> check_csv;
  bool violation = false;
  bool numerical = false;
  int n_pass = 0;
  int n_warn = 0;
  int n_fail = 0;

  for (auto& fut : futures) {
    SuiteResult s = fut.get();
    for (const Row& r : s.rows) {
      rows.push_back(row_json(r));
      check_csv.push_back(fmt::format("{},{},{},{},{},{}", r.suite, r.tag, r.check, csv_number(r.value),
                                      csv_number(r.tolerance), r.status));
      if (r.status == "fail") {
        violation = true;
        ++n_fail;
      } else if (r.status == "warn") {
        ++n_warn;
      } else {
        ++n_pass;
      }
    }
    for (auto& b : s.bounds) bounds.push_back(std::move(b));
    for (auto& e : s.estimates) estimates.push_back(std::move(e));
    for (auto& e : s.errors) errors.push_back(std::move(e));
    bound_csv.insert(bound_csv.end(), s.bound_csv.begin(), s.bound_csv.end());
    mc_csv.insert(mc_csv.end(), s.mc_csv.begin(), s.mc_csv.end());
    exact_csv.insert(exact_csv.end(), s.exact_csv.begin(), s.exact_csv.end());
    numerical = numerical || s.numerical_failure;
  }

  if (violation) {
    result.exit_code = ExitCode::violation;
  } else if (numerical) {
    result.exit_code = ExitCode::numerical_failure;
  }

  result.report["suites"] = suites;
  result.report["rows"] = std::move(rows);
  result.report["bounds"] = std::move(bounds);
  result.report["estimates"] = std::move(estimates);
  result.report["errors"] = std::move(errors);
  result.report["summary"] = {{"pass", n_pass}, {"warn", n_warn}, {"fail", n_fail}};
  result.report["exit_code"] = static_cast<int>(result.exit_code);

  result.csv["checks.csv"] = csv_table("suite,tag,check,value,tolerance,status", check_csv);
  if (!bound_csv.empty()) result.csv["bounds.csv"] = csv_table(kBoundCsvHeader, bound_csv);
  if (!mc_csv.empty()) {
    result.csv["mc.csv"] =
        csv_table("mode,seed,n_paths,horizon,a,b,m,i,p_hat,ci_low,ci_high,rhs,verdict", mc_csv);
  }
  if (!exact_csv.empty()) result.csv["exact.csv"] = csv_table("mode,m,exact_p,rhs,margin", exact_csv);
  return result;
}

void write_outputs(const RunResult& result, const ExperimentConfig& config) {
  std::filesystem::path dir = config.output_dir;
  if (const char* env = std::getenv("NCMART_OUTPUT_DIR"); env != nullptr && *env != '\0') dir = env;
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / config.report_name);
    f << result.report.dump(2) << '\n';
  }
  for (const auto& [name, contents] : result.csv) {
    std::ofstream f(dir / name);
    f << contents;
  }
}

std::string deterministic_dump(const json& report) {
  json copy = report;
  copy.erase("generated_at");
  return copy.dump(2);
}

}  // namespace ncmart
