#include "ncmart/mcsim.hpp"

#include "ncmart/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

namespace ncmart {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_window(int m, int i, int horizon) {
  if (m < 0 || i < 0 || horizon < m + i) {
    throw Error(ErrorKind::InvalidHorizon,
                fmt::format("need m, i >= 0 and horizon >= m + i (m={}, i={}, horizon={})", m, i, horizon));
  }
}

}  // namespace

StepDistribution::StepDistribution(std::vector<Atom> support, double alpha, double beta, double gamma)
    : support_(std::move(support)), alpha_(alpha), beta_(beta), gamma_(gamma) {
  if (support_.empty()) throw Error(ErrorKind::InvalidParams, "step distribution needs a nonempty support");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0) || !(gamma_ >= 0.0)) {
    throw Error(ErrorKind::InvalidParams, "step distribution needs alpha, beta > 0 and gamma >= 0");
  }
  double total = 0.0;
  for (const Atom& atom : support_) {
    if (!(atom.prob > 0.0)) throw Error(ErrorKind::InvalidParams, "atom probabilities must be positive");
    if (atom.value < -alpha_ - 1e-12 || atom.value > beta_ + 1e-12) {
      throw Error(ErrorKind::InvalidParams, fmt::format("atom {} outside [-{}, {}]", atom.value, alpha_, beta_));
    }
    total += atom.prob;
    mean_ += atom.prob * atom.value;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::InvalidParams, fmt::format("probabilities sum to {}", total));
  if (mean_ > -gamma_ + 1e-12) {
    throw Error(ErrorKind::InvalidParams, fmt::format("mean {} exceeds -gamma = {}", mean_, -gamma_));
  }
}

StepDistribution StepDistribution::two_point(double alpha, double beta, double gamma) {
  if (!(alpha > gamma)) throw Error(ErrorKind::InvalidParams, "two-point distribution needs alpha > gamma");
  const double width = alpha + beta;
  return StepDistribution({{-alpha, (beta + gamma) / width}, {beta, (alpha - gamma) / width}}, alpha, beta, gamma);
}

std::optional<RealVector> StepDistribution::as_uniform_diagonal(Index max_dim) const {
  for (Index d = 1; d <= max_dim; ++d) {
    std::vector<Index> counts;
    bool ok = true;
    for (const Atom& atom : support_) {
      const double scaled = atom.prob * static_cast<double>(d);
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > 1e-9 || rounded < 1.0) {
        ok = false;
        break;
      }
      counts.push_back(static_cast<Index>(rounded));
    }
    if (!ok) continue;
    RealVector diag(d);
    Index pos = 0;
    for (std::size_t k = 0; k < support_.size(); ++k) {
      for (Index c = 0; c < counts[k]; ++c) diag(pos++) = support_[k].value;
    }
    return diag;
  }
  return std::nullopt;
}

WilsonInterval wilson_interval(std::int64_t hits, std::int64_t n) {
  if (n < 1 || hits < 0 || hits > n) throw Error(ErrorKind::InvalidParams, "wilson interval needs 0 <= hits <= n, n >= 1");
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  // keep p inside the interval at the endpoints where rounding can bite
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t path) : key_(splitmix64(seed ^ splitmix64(path))) {}

double PathStream::uniform() {
  const std::uint64_t bits = splitmix64(key_ + kGolden * ++counter_);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

CrossingEstimate simulate_crossing(const StepDistribution& dist, double a, double b, int m, int i, int horizon,
                                   std::int64_t n_paths, std::uint64_t seed, unsigned threads) {
  check_window(m, i, horizon);
  if (n_paths < 1) throw Error(ErrorKind::InvalidHorizon, "n_paths must be >= 1");

  std::vector<double> cumulative;
  std::vector<double> values;
  double acc = 0.0;
  for (const Atom& atom : dist.support()) {
    acc += atom.prob;
    cumulative.push_back(acc);
    values.push_back(atom.value);
  }
  cumulative.back() = 1.0;
  const int start = m + i;

  auto run_range = [&](std::int64_t first, std::int64_t last) {
    std::int64_t hits = 0;
    for (std::int64_t p = first; p < last; ++p) {
      PathStream stream(seed, static_cast<std::uint64_t>(p));
      double sum = 0.0;
      bool hit = start == 0 && at_or_above(0.0, a);
      for (int n = 1; n <= horizon && !hit; ++n) {
        const double u = stream.uniform();
        const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                cumulative.begin());
        sum += values[std::min(k, values.size() - 1)];
        if (n >= start && at_or_above(sum, a + b * n)) hit = true;
      }
      hits += hit ? 1 : 0;
    }
    return hits;
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, n_paths));
  std::vector<std::int64_t> partial(workers, 0);
  if (workers == 1) {
    partial[0] = run_range(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t first = n_paths * w / workers;
      const std::int64_t last = n_paths * (w + 1) / workers;
      pool.emplace_back([&, w, first, last] { partial[w] = run_range(first, last); });
    }
    for (auto& t : pool) t.join();
  }

  CrossingEstimate est;
  est.n_paths = n_paths;
  est.hits = std::accumulate(partial.begin(), partial.end(), std::int64_t{0});
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(n_paths);
  const WilsonInterval ci = wilson_interval(est.hits, n_paths);
  est.ci_low = ci.low;
  est.ci_high = ci.high;
  est.horizon = horizon;
  est.seed = seed;
  est.a = a;
  est.b = b;
  est.m = m;
  est.i = i;
  return est;
}

namespace {

std::optional<long long> common_denominator(const std::vector<Atom>& support, int max_denominator) {
  for (long long l = 1; l <= max_denominator; ++l) {
    bool ok = true;
    for (const Atom& atom : support) {
      const double scaled = atom.value * static_cast<double>(l);
      if (std::abs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, std::abs(scaled))) {
        ok = false;
        break;
      }
    }
    if (ok) return l;
  }
  return std::nullopt;
}

double enumerate_paths(const StepDistribution& dist, double a, double b, int start, int horizon,
                       const ExactOptions& options) {
  const double count = std::pow(static_cast<double>(dist.support().size()), horizon);
  if (count > static_cast<double>(options.max_paths)) {
    throw Error(ErrorKind::StateSpaceTooLarge, fmt::format("{} paths exceed the cap {}", count, options.max_paths));
  }
  std::function<double(int, double)> descend = [&](int n, double sum) -> double {
    if (n >= start && at_or_above(sum, a + b * n)) return 1.0;
    if (n == horizon) return 0.0;
    double p = 0.0;
    for (const Atom& atom : dist.support()) p += atom.prob * descend(n + 1, sum + atom.value);
    return p;
  };
  return descend(0, 0.0);
}

}  // namespace

double enumerate_exact(const StepDistribution& dist, double a, double b, int m, int i, int horizon,
                       const ExactOptions& options) {
  check_window(m, i, horizon);
  if (horizon > options.max_horizon) {
    throw Error(ErrorKind::StateSpaceTooLarge, fmt::format("horizon {} exceeds cap {}", horizon, options.max_horizon));
  }
  const int start = m + i;
  const auto scale = common_denominator(dist.support(), options.max_denominator);
  if (!scale) return enumerate_paths(dist, a, b, start, horizon, options);

  const long long l = *scale;
  std::vector<long long> steps;
  for (const Atom& atom : dist.support()) steps.push_back(std::llround(atom.value * static_cast<double>(l)));
  const long long lo = *std::min_element(steps.begin(), steps.end());
  const long long hi = *std::max_element(steps.begin(), steps.end());
  const auto span = static_cast<std::size_t>(hi - lo);
  if (span * static_cast<std::size_t>(horizon) + 1 > options.max_states) {
    throw Error(ErrorKind::StateSpaceTooLarge, "scaled-integer state space exceeds the cap");
  }

  // alive[k] = P(S_n = (n * lo + k) / l, no crossing so far)
  std::vector<double> alive{1.0};
  double crossed = 0.0;
  auto absorb = [&](int n) {
    if (n < start) return;
    const double theta = a + b * n;
    for (std::size_t k = 0; k < alive.size(); ++k) {
      if (alive[k] == 0.0) continue;
      const double value = static_cast<double>(static_cast<long long>(n) * lo + static_cast<long long>(k)) /
                           static_cast<double>(l);
      if (at_or_above(value, theta)) {
        crossed += alive[k];
        alive[k] = 0.0;
      }
    }
  };
  absorb(0);
  for (int n = 1; n <= horizon; ++n) {
    std::vector<double> next(alive.size() + span, 0.0);
    for (std::size_t k = 0; k < alive.size(); ++k) {
      if (alive[k] == 0.0) continue;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        next[k + static_cast<std::size_t>(steps[s] - lo)] += alive[k] * dist.support()[s].prob;
      }
    }
    alive = std::move(next);
    absorb(n);
  }
  return crossed;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::fail: return "fail";
  }
  return "fail";
}

Comparison compare_bound(double exact, const BoundReport& report, int m) {
  const auto it = report.rhs_by_m.find(m);
  if (it == report.rhs_by_m.end()) throw Error(ErrorKind::ParameterMismatch, fmt::format("report has no rhs for m={}", m));
  Comparison c;
  c.value = exact;
  c.rhs = it->second;
  c.margin = c.rhs - exact;
  c.verdict = exact <= c.rhs + 1e-12 ? Verdict::pass : Verdict::fail;
  return c;
}

Comparison compare_bound(const CrossingEstimate& est, const BoundReport& report, int m) {
  const auto it = report.rhs_by_m.find(m);
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(y)); };
  if (it == report.rhs_by_m.end() || est.m != m || !report.minimal_index || est.i != *report.minimal_index ||
      !close(est.a, report.threshold.intercept) || !close(est.b, report.threshold.slope)) {
    throw Error(ErrorKind::ParameterMismatch,
                fmt::format("estimate (a={}, b={}, m={}, i={}) does not match the {} report", est.a, est.b, est.m,
                            est.i, tag(report.mode)));
  }
  Comparison c;
  c.value = est.p_hat;
  c.rhs = it->second;
  c.margin = c.rhs - est.p_hat;
  if (est.ci_low > c.rhs) {
    c.verdict = Verdict::fail;
  } else if (est.p_hat > c.rhs) {
    c.verdict = Verdict::warn;
  } else {
    c.verdict = Verdict::pass;
  }
  return c;
}

}  // namespace ncmart
