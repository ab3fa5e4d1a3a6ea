#pragma once

#include "ncmart/operator.hpp"
#include "ncmart/prob_space.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ncmart {

enum class SequenceKind { martingale, supermartingale, unverified };

std::string_view to_string(SequenceKind kind);

/// Operator sequence (s_0, ..., s_N) with s_j measurable at level min(j, K).
/// Partial sums are stored; differences are derived on demand.
class AdaptedSequence {
 public:
  /// Throws NotAdapted if some s_j is not measurable at its level (1e-9), and
  /// DimensionMismatch if an operator does not live on the filtration's space.
  AdaptedSequence(Filtration filt, std::vector<HermitianOperator> ops);

  [[nodiscard]] const Filtration& filtration() const { return filt_; }
  [[nodiscard]] const std::vector<HermitianOperator>& ops() const { return ops_; }
  [[nodiscard]] const HermitianOperator& operator[](int n) const { return ops_[static_cast<std::size_t>(n)]; }
  /// Largest index N.
  [[nodiscard]] int last() const { return static_cast<int>(ops_.size()) - 1; }
  [[nodiscard]] int level_of(int n) const { return std::min(n, filt_.depth()); }
  /// Classification at tolerance 1e-9, computed once at construction.
  [[nodiscard]] SequenceKind kind() const { return kind_; }

 private:
  Filtration filt_;
  std::vector<HermitianOperator> ops_;
  SequenceKind kind_;
};

/// dx_j = s_j - s_{j-1}, with s_{-1} = 0 (so dx_0 = s_0).
[[nodiscard]] std::vector<HermitianOperator> differences(const AdaptedSequence& seq);

/// martingale if every ||E_j(s_{j+1}) - s_j|| <= tol * scale; otherwise
/// supermartingale if every s_j - E_j(s_{j+1}) is PSD at tol; otherwise unverified.
/// scale = 1 + max_j ||s_j||.
[[nodiscard]] SequenceKind classify(const AdaptedSequence& seq, double tol);

struct BoundedDifferenceCheck {
  bool ok = true;
  double lower_margin = kInf;  // min_j lambda_min(dx_j + alpha)
  double upper_margin = kInf;  // min_j lambda_min(beta - dx_j)
};

/// -alpha <= dx_j <= beta for j >= 1, at PSD tolerance 1e-9.
[[nodiscard]] BoundedDifferenceCheck check_bounded_differences(const AdaptedSequence& seq, double alpha, double beta);

/// Worst drift margin min_j lambda_min(-gamma - E_{j-1}(dx_j)), j >= 1.
/// Non-negative (up to tolerance) iff E_{j-1}(dx_j) <= -gamma for all j.
[[nodiscard]] double drift_margin(const AdaptedSequence& seq, double gamma);

/// Conditional moment generating function envelope: a positive function f on
/// [0, inf) with f(t) <= exp(-gamma t + lambda t^2). Stored in log domain.
class MgfEnvelope {
 public:
  using LogFunction = std::function<double(double)>;

  /// Checks lambda > 0, gamma >= 0, log f finite and below the quadratic
  /// envelope on a 64-point log-spaced grid in [1e-3, 1e2]; InvalidParams otherwise.
  MgfEnvelope(LogFunction log_f, double gamma, double lambda, std::string name);

  /// f(t) = exp(-gamma t + lambda t^2).
  static MgfEnvelope saturated(double gamma, double lambda);
  /// Piecewise log-linear interpolation through (t_k, f_k), t_k > 0, capped
  /// by the quadratic envelope; the envelope itself beyond the last point and
  /// min(f_1, envelope) before the first.
  static MgfEnvelope from_grid(std::vector<std::pair<double, double>> points, double gamma, double lambda);

  [[nodiscard]] double log_f(double t) const { return log_f_(t); }
  [[nodiscard]] double f(double t) const { return std::exp(log_f_(t)); }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  /// log of exp(-gamma t + lambda t^2).
  [[nodiscard]] double log_bound(double t) const { return -gamma_ * t + lambda_ * t * t; }

 private:
  LogFunction log_f_;
  double gamma_;
  double lambda_;
  std::string name_;
};

/// Scalars shared by every bound. Which fields matter depends on the bound.
struct BoundParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
  double lambda = 0.5;
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  int m = 3;

  /// Sign constraints: alpha, beta, lambda, a, b, c > 0; gamma >= 0; m >= 1.
  void validate() const;
  /// Additionally gamma < alpha.
  void validate_khan() const;
};

/// `points` log-spaced values in [lo, hi_factor * t0], plus t0 itself.
[[nodiscard]] std::vector<double> t_grid(double t0, int points, double lo, double hi_factor);
/// t_grid(t0, 64, 1e-3, 10).
[[nodiscard]] std::vector<double> default_t_grid(double t0);

struct MgfCheck {
  double worst = kInf;         // most negative lambda_min(f(t) - E_{n-1}(e^{t dx_n}))
  double worst_scaled = kInf;  // same, divided by max(1, f(t))
  int at_n = -1;
  double at_t = 0.0;

  [[nodiscard]] bool passed(double tol = 1e-8) const { return worst_scaled >= -tol; }
};

/// Checks E_{n-1}(e^{t dx_n}) <= f(t) for n = 1..N and every t in the grid.
/// Violations are returned as data.
[[nodiscard]] MgfCheck check_mgf_condition(const AdaptedSequence& seq, const MgfEnvelope& env,
                                           const std::vector<double>& t_grid);

/// y_n = exp(t s_n - (a + b n) t), n = 0..N.
[[nodiscard]] std::vector<HermitianOperator> aux_sequence(const AdaptedSequence& seq, double a, double b, double t);

/// s_j = E_j(x) for j = 0..K; a martingale by the tower property.
[[nodiscard]] AdaptedSequence martingale_from_final(const Filtration& filt, const HermitianOperator& x);

/// Order-independent partial sums: element j acts on factor j, is embedded,
/// and s_j = sum_{k <= j} x_k with s_0 = 0. Requires tau(x_j) <= 0 on its
/// factor (NotSupermartingale otherwise) and returns the classified sequence.
[[nodiscard]] AdaptedSequence independent_sum_construction(const TensorSpace& space,
                                                           const std::vector<HermitianOperator>& elements);

/// s_0 = 0, s_n = s_{n-1} + dx_n.
[[nodiscard]] AdaptedSequence from_differences(const Filtration& filt, const std::vector<HermitianOperator>& dx);

}  // namespace ncmart
