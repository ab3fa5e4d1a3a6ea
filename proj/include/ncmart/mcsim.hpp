#pragma once

// Classical crossing probabilities P(S_n >= a + b n for some n in [m+i, N])
// for i.i.d. bounded steps: Monte Carlo with Wilson intervals and an exact
// dynamic program over scaled-integer partial sums.

#include "ncmart/bounds.hpp"
#include "ncmart/operator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ncmart {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

class StepDistribution {
 public:
  /// Checks: probabilities positive and summing to 1 (1e-12), support in
  /// [-alpha, beta], mean <= -gamma + 1e-12. InvalidParams otherwise.
  StepDistribution(std::vector<Atom> support, double alpha, double beta, double gamma = 0.0);

  /// beta w.p. (alpha - gamma)/(alpha + beta), -alpha w.p. (beta + gamma)/(alpha + beta);
  /// mean exactly -gamma.
  static StepDistribution two_point(double alpha, double beta, double gamma = 0.0);
  static StepDistribution rademacher() { return two_point(1.0, 1.0, 0.0); }

  [[nodiscard]] const std::vector<Atom>& support() const { return support_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double gamma() const { return gamma_; }

  /// Diagonal of a d x d matrix whose uniform-weight spectrum is this
  /// distribution: smallest d <= max_dim with every d * prob integral (1e-9).
  [[nodiscard]] std::optional<RealVector> as_uniform_diagonal(Index max_dim = 64) const;

 private:
  std::vector<Atom> support_;
  double alpha_;
  double beta_;
  double gamma_;
  double mean_ = 0.0;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval at the 95% level (z = 1.959963984540054).
[[nodiscard]] WilsonInterval wilson_interval(std::int64_t hits, std::int64_t n);

struct CrossingEstimate {
  std::int64_t n_paths = 0;
  std::int64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int horizon = 0;
  std::uint64_t seed = 0;
  double a = 0.0;
  double b = 0.0;
  int m = 0;
  int i = 0;
};

/// Counter-based stream: the k-th draw of path p depends only on (seed, p, k),
/// so results do not depend on how paths are split across workers.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// A path hits if S_n >= a + b n (boundary slack as at_or_above) for some n
/// in [m + i, horizon]. InvalidHorizon unless horizon >= m + i, m, i >= 0 and
/// n_paths >= 1. threads = 0 picks the hardware concurrency.
[[nodiscard]] CrossingEstimate simulate_crossing(const StepDistribution& dist, double a, double b, int m, int i,
                                                 int horizon, std::int64_t n_paths, std::uint64_t seed,
                                                 unsigned threads = 0);

struct ExactOptions {
  int max_horizon = 24;
  std::size_t max_states = std::size_t{1} << 22;
  std::size_t max_paths = std::size_t{1} << 20;
  int max_denominator = 1024;
};

/// Exact crossing probability. Steps with a common denominator <= max_denominator
/// are propagated as integer multiples of 1/L with absorption at the first
/// crossing; other supports fall back to enumerating support^horizon paths.
/// StateSpaceTooLarge when a cap is exceeded.
[[nodiscard]] double enumerate_exact(const StepDistribution& dist, double a, double b, int m, int i, int horizon,
                                     const ExactOptions& options = {});

enum class Verdict { pass, warn, fail };

std::string_view to_string(Verdict v);

struct Comparison {
  Verdict verdict = Verdict::pass;
  double value = 0.0;  // exact p or p_hat
  double rhs = 0.0;
  double margin = 0.0;  // rhs - value
};

/// Exact: pass iff value <= rhs(m) + 1e-12, fail otherwise.
/// ParameterMismatch if the report has no rhs for m.
[[nodiscard]] Comparison compare_bound(double exact, const BoundReport& report, int m);

/// Monte Carlo: fail if ci_low > rhs(m); warn if p_hat > rhs(m) but the
/// interval straddles it; pass otherwise. ParameterMismatch unless the
/// estimate's threshold, m and start index match the report.
[[nodiscard]] Comparison compare_bound(const CrossingEstimate& est, const BoundReport& report, int m);

}  // namespace ncmart
