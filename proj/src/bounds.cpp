#include "ncmart/bounds.hpp"

#include "ncmart/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace ncmart {

namespace {

constexpr int kIndexCap = 1'000'000;
constexpr double kMarginTol = 1e-9;

// log(w1 e^{x1} + w2 e^{x2}) for w1, w2 >= 0, not both zero.
double log_weighted_sum(double w1, double x1, double w2, double x2) {
  if (w1 <= 0.0) return std::log(w2) + x2;
  if (w2 <= 0.0) return std::log(w1) + x1;
  const double l1 = std::log(w1) + x1;
  const double l2 = std::log(w2) + x2;
  const double hi = std::max(l1, l2);
  return hi + std::log1p(std::exp(std::min(l1, l2) - hi));
}

double safe_exp(double x) { return x < -745.0 ? 0.0 : std::exp(x); }

// Fills the per-m columns of `r` from rhs(m) = exp(m * log_constant - exponent(m)).
template <class Exponent>
void fill_rhs(BoundReport& r, int m_max, Exponent exponent) {
  r.constant = safe_exp(r.log_constant);
  r.minimal_index = minimal_index(r.constant);
  for (int m = 1; m <= m_max; ++m) {
    const double log_rhs = m * r.log_constant - exponent(m);
    r.log_rhs_by_m[m] = log_rhs;
    r.rhs_by_m[m] = safe_exp(log_rhs);
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidParams, std::string(name) + " must be > 0");
}

}  // namespace

std::string_view to_string(BoundMode mode) {
  switch (mode) {
    case BoundMode::theorem2_a: return "theorem2_a";
    case BoundMode::theorem2_b: return "theorem2_b";
    case BoundMode::ncbr: return "ncbr";
    case BoundMode::azuma_nc: return "azuma_nc";
    case BoundMode::azuma_classical: return "azuma_classical";
    case BoundMode::khan_a: return "khan_a";
    case BoundMode::khan_b: return "khan_b";
  }
  return "unknown";
}

std::string_view tag(BoundMode mode) {
  switch (mode) {
    case BoundMode::theorem2_a: return "eq32";
    case BoundMode::theorem2_b: return "eq33";
    case BoundMode::ncbr: return "cor_ncbr";
    case BoundMode::azuma_nc: return "cor_azuma_nc";
    case BoundMode::azuma_classical: return "cor_azuma_classical";
    case BoundMode::khan_a: return "cor_khan_a";
    case BoundMode::khan_b: return "cor_khan_b";
  }
  return "unknown";
}

BoundMode bound_mode_from_string(std::string_view name) {
  for (BoundMode m : {BoundMode::theorem2_a, BoundMode::theorem2_b, BoundMode::ncbr, BoundMode::azuma_nc,
                      BoundMode::azuma_classical, BoundMode::khan_a, BoundMode::khan_b}) {
    if (name == to_string(m) || name == tag(m)) return m;
  }
  throw Error(ErrorKind::InvalidParams, "unknown bound mode '" + std::string(name) + "'");
}

bool BoundReport::passed(double tol) const {
  return std::all_of(margins.begin(), margins.end(), [tol](const auto& kv) { return kv.second >= -tol; });
}

int minimal_index(double constant) {
  if (!(constant > 0.0) || !(constant < 1.0)) {
    throw Error(ErrorKind::NoFiniteIndex, fmt::format("constant {} is not in (0, 1)", constant));
  }
  if (constant <= 0.5) return 1;
  const double log_c = std::log(constant);
  const double log_room = std::log1p(-constant);
  const double guess = std::ceil(log_room / log_c);
  if (!(guess <= kIndexCap)) {
    throw Error(ErrorKind::NoFiniteIndex, fmt::format("constant {} needs an index beyond {}", constant, kIndexCap));
  }
  int i = std::max(1, static_cast<int>(guess) - 1);
  while (i * log_c > log_room) ++i;
  if (i > kIndexCap) throw Error(ErrorKind::NoFiniteIndex, "index cap exceeded");
  return i;
}

double lemma_gap(double lambda, double x) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::InvalidParams, "lemma_gap needs lambda in [0, 1]");
  const double lhs_log = log_weighted_sum(lambda, (1.0 - lambda) * x, 1.0 - lambda, -lambda * x);
  const double rhs_log = x * x / 8.0;
  if (std::max(lhs_log, rhs_log) < 700.0) {
    return std::exp(rhs_log) - std::exp(lhs_log);
  }
  // e^{R} - e^{L} = sign * e^{max} * (1 - e^{-|R - L|})
  const double hi = std::max(lhs_log, rhs_log);
  const double rel = -std::expm1(-std::abs(rhs_log - lhs_log));
  const double mag = std::exp(hi) * rel;
  return rhs_log >= lhs_log ? mag : -mag;
}

BoundReport theorem2_bound_a(const BoundParams& params, const MgfEnvelope& env) {
  require_positive(params.a, "a");
  require_positive(params.b, "b");
  if (params.m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
  BoundReport r;
  r.mode = BoundMode::theorem2_a;
  r.threshold = {params.a, params.b};
  const double gamma = env.gamma();
  const double lambda = env.lambda();
  r.t0 = (params.b + gamma) / lambda;
  r.log_constant = -params.b * r.t0 + env.log_f(r.t0);
  const double tail = params.a * r.t0;
  fill_rhs(r, params.m, [tail](int) { return tail; });
  return r;
}

BoundReport theorem2_bound_b(const BoundParams& params, const MgfEnvelope& env) {
  require_positive(params.b, "b");
  if (params.m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
  BoundReport r;
  r.mode = BoundMode::theorem2_b;
  r.threshold = {0.0, params.b};
  const double gamma = env.gamma();
  const double lambda = env.lambda();
  r.t0 = (params.b + gamma) / (2.0 * lambda);
  r.log_constant = -0.5 * (params.b - gamma) * r.t0 + env.log_f(r.t0);
  const double per_m = (params.b + gamma) * (params.b + gamma) / (4.0 * lambda);
  fill_rhs(r, params.m, [per_m](int m) { return m * per_m; });
  return r;
}

MgfEnvelope khan_envelope(double alpha, double beta, double gamma) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  if (!(gamma >= 0.0) || !(alpha > gamma)) {
    throw Error(ErrorKind::InvalidParams, "Khan envelope needs alpha > gamma >= 0");
  }
  const double width = alpha + beta;
  const double p = (alpha - gamma) / width;
  const double q = (beta + gamma) / width;
  auto log_f = [=](double t) { return -gamma * t + log_weighted_sum(p, width * t * q, q, -width * t * p); };
  return MgfEnvelope(log_f, gamma, width * width / 8.0, "khan");
}

std::pair<BoundReport, BoundReport> khan_bounds(const BoundParams& params) {
  params.validate_khan();
  const double alpha = params.alpha;
  const double beta = params.beta;
  const double gamma = params.gamma;
  const double a = params.a;
  const double b = params.b;
  const double width2 = (alpha + beta) * (alpha + beta);
  const MgfEnvelope env = khan_envelope(alpha, beta, gamma);

  BoundReport first;
  first.mode = BoundMode::khan_a;
  first.threshold = {a, b};
  first.t0 = 8.0 * (b + gamma) / width2;
  first.log_constant = -b * first.t0 + env.log_f(first.t0);
  const double tail = 8.0 * a * (b + gamma) / width2;
  fill_rhs(first, params.m, [tail](int) { return tail; });

  BoundReport second;
  second.mode = BoundMode::khan_b;
  second.threshold = {0.0, b};
  second.t0 = 4.0 * (b + gamma) / width2;
  second.log_constant = -0.5 * (b - gamma) * second.t0 + env.log_f(second.t0);
  const double per_m = 2.0 * (b + gamma) * (b + gamma) / width2;
  fill_rhs(second, params.m, [per_m](int m) { return m * per_m; });
  return {first, second};
}

BoundReport ncbr_bound(const BoundParams& params) {
  require_positive(params.alpha, "alpha");
  require_positive(params.beta, "beta");
  require_positive(params.a, "a");
  require_positive(params.b, "b");
  if (params.m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
  const double alpha = params.alpha;
  const double beta = params.beta;
  const double b = params.b;
  const double width = alpha + beta;
  const double width2 = width * width;
  BoundReport r;
  r.mode = BoundMode::ncbr;
  r.threshold = {params.a, b};
  r.t0 = 8.0 * b / width2;
  r.log_constant = log_weighted_sum(beta / width, -8.0 * b * (b + alpha) / width2, alpha / width,
                                    -8.0 * b * (b - beta) / width2);
  const double tail = 8.0 * params.a * b / width2;
  fill_rhs(r, params.m, [tail](int) { return tail; });
  return r;
}

BoundReport azuma_nc_bound(const BoundParams& params) {
  require_positive(params.alpha, "alpha");
  require_positive(params.beta, "beta");
  require_positive(params.c, "c");
  if (params.m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
  const double alpha = params.alpha;
  const double beta = params.beta;
  const double c = params.c;
  const double width = alpha + beta;
  const double width2 = width * width;
  BoundReport r;
  r.mode = BoundMode::azuma_nc;
  r.threshold = {0.0, c};
  r.t0 = 4.0 * c / width2;
  r.log_constant = log_weighted_sum(beta / width, -2.0 * c * (c + 2.0 * alpha) / width2, alpha / width,
                                    -2.0 * c * (c - 2.0 * beta) / width2);
  const double per_m = 2.0 * c * c / width2;
  fill_rhs(r, params.m, [per_m](int m) { return m * per_m; });
  return r;
}

double azuma_classical_bound(double alpha, double c, int m) {
  require_positive(alpha, "alpha");
  require_positive(c, "c");
  if (m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
  return safe_exp(-m * c * c / (2.0 * alpha * alpha));
}

BoundReport azuma_classical_report(const BoundParams& params) {
  BoundParams symmetric = params;
  symmetric.beta = params.alpha;
  BoundReport r = azuma_nc_bound(symmetric);
  r.mode = BoundMode::azuma_classical;
  const double per_m = params.c * params.c / (2.0 * params.alpha * params.alpha);
  for (int m = 1; m <= params.m; ++m) {
    r.log_rhs_by_m[m] = -m * per_m;
    r.rhs_by_m[m] = azuma_classical_bound(params.alpha, params.c, m);
  }
  return r;
}

BoundReport bound_for_mode(BoundMode mode, const BoundParams& params, const MgfEnvelope& env) {
  switch (mode) {
    case BoundMode::theorem2_a: return theorem2_bound_a(params, env);
    case BoundMode::theorem2_b: return theorem2_bound_b(params, env);
    case BoundMode::ncbr: return ncbr_bound(params);
    case BoundMode::azuma_nc: return azuma_nc_bound(params);
    case BoundMode::azuma_classical: return azuma_classical_report(params);
    case BoundMode::khan_a: return khan_bounds(params).first;
    case BoundMode::khan_b: return khan_bounds(params).second;
  }
  throw Error(ErrorKind::InvalidParams, "unknown bound mode");
}

namespace {

void check_premises(const AdaptedSequence& seq, const BoundParams& params, const MgfEnvelope& env, BoundMode mode,
                    double t0) {
  auto fail = [mode](const std::string& what) {
    throw Error(ErrorKind::PreconditionFailed, std::string(to_string(mode)) + ": " + what);
  };
  if (op_norm(seq[0]) > 1e-12) fail("s_0 must be 0");

  const bool needs_martingale =
      mode == BoundMode::ncbr || mode == BoundMode::azuma_nc || mode == BoundMode::azuma_classical;
  if (needs_martingale && seq.kind() != SequenceKind::martingale) fail("sequence is not a martingale");
  if (!needs_martingale && seq.kind() == SequenceKind::unverified) fail("sequence is not a supermartingale");

  double scale = 1.0;
  for (const auto& s : seq.ops()) scale = std::max(scale, 1.0 + op_norm(s));

  switch (mode) {
    case BoundMode::theorem2_a:
    case BoundMode::theorem2_b: {
      const MgfCheck mgf = check_mgf_condition(seq, env, default_t_grid(t0));
      if (!mgf.passed()) fail(fmt::format("MGF condition violated ({} at n={}, t={})", mgf.worst, mgf.at_n, mgf.at_t));
      break;
    }
    case BoundMode::ncbr:
    case BoundMode::azuma_nc:
    case BoundMode::azuma_classical:
    case BoundMode::khan_a:
    case BoundMode::khan_b: {
      const double beta = mode == BoundMode::azuma_classical ? params.alpha : params.beta;
      const BoundedDifferenceCheck bd = check_bounded_differences(seq, params.alpha, beta);
      if (!bd.ok) fail(fmt::format("differences leave [-alpha, beta] (margins {}, {})", bd.lower_margin, bd.upper_margin));
      if (mode == BoundMode::khan_a || mode == BoundMode::khan_b) {
        const double drift = drift_margin(seq, params.gamma);
        if (drift < -kMarginTol * scale) fail(fmt::format("conditional drift exceeds -gamma (margin {})", drift));
      }
      break;
    }
  }
}

}  // namespace

BoundReport verify_inequality(const AdaptedSequence& seq, const BoundParams& params, const MgfEnvelope& env,
                              BoundMode mode, int horizon) {
  if (horizon < 0 || horizon > seq.last()) {
    throw Error(ErrorKind::RangeError, fmt::format("horizon {} outside 0..{}", horizon, seq.last()));
  }
  BoundReport r = bound_for_mode(mode, params, env);
  check_premises(seq, params, env, mode, r.t0);
  r.horizon = horizon;
  const LinearThreshold theta = r.threshold;
  for (const auto& [m, rhs] : r.rhs_by_m) {
    const int start = m + *r.minimal_index;
    const double lhs = start <= horizon ? tail_event(seq, theta, start, horizon).trace : 0.0;
    r.lhs_by_m[m] = lhs;
    r.margins[m] = rhs - lhs;
  }
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j;
  j["mode"] = to_string(r.mode);
  j["tag"] = tag(r.mode);
  j["t0"] = r.t0;
  j["constant"] = r.constant;
  j["log_constant"] = r.log_constant;
  j["minimal_index"] = r.minimal_index ? nlohmann::json(*r.minimal_index) : nlohmann::json(nullptr);
  j["threshold"] = {{"intercept", r.threshold.intercept}, {"slope", r.threshold.slope}};
  j["horizon"] = r.horizon ? nlohmann::json(*r.horizon) : nlohmann::json(nullptr);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [m, rhs] : r.rhs_by_m) {
    nlohmann::json row{{"m", m}, {"rhs", rhs}, {"log_rhs", r.log_rhs_by_m.at(m)}};
    if (auto it = r.lhs_by_m.find(m); it != r.lhs_by_m.end()) {
      row["lhs"] = it->second;
      row["margin"] = r.margins.at(m);
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  if (!r.lhs_by_m.empty()) j["passed"] = r.passed();
  return j;
}

std::vector<std::string> bound_csv_rows(const BoundReport& r) {
  std::vector<std::string> rows;
  const std::string index = r.minimal_index ? fmt::format("{}", *r.minimal_index) : std::string();
  for (const auto& [m, rhs] : r.rhs_by_m) {
    std::string lhs;
    std::string margin;
    if (auto it = r.lhs_by_m.find(m); it != r.lhs_by_m.end()) {
      lhs = fmt::format("{}", it->second);
      margin = fmt::format("{}", r.margins.at(m));
    }
    rows.push_back(fmt::format("{},{},{},{},{},{},{},{},{}", tag(r.mode), r.t0, r.constant, index, m, rhs, lhs, margin,
                               r.log_rhs_by_m.at(m)));
  }
  return rows;
}

}  // namespace ncmart
