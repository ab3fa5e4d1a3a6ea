#pragma once

// Closed-form right-hand sides of the tail inequalities, and the end-to-end
// check that compares them with projection-lattice traces.
//
// Every bound has the shape  rhs(m) = C^m * exp(-E(m))  where C is the
// per-step constant (A, A0 or B) and the tail starts at n = m + i with i the
// smallest positive integer such that C^i <= 1 - C. All exponentials are
// evaluated in log domain; reports carry both log and linear values.

#include "ncmart/lattice.hpp"
#include "ncmart/martingale.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncmart {

enum class BoundMode { theorem2_a, theorem2_b, ncbr, azuma_nc, azuma_classical, khan_a, khan_b };

/// theorem2_a, theorem2_b, ncbr, ...
std::string_view to_string(BoundMode mode);
/// Report tag of the inequality a mode checks: eq32, eq33, cor_ncbr, cor_azuma_nc,
/// cor_azuma_classical, cor_khan_a, cor_khan_b.
std::string_view tag(BoundMode mode);
/// Inverse of to_string; InvalidParams on unknown names.
BoundMode bound_mode_from_string(std::string_view name);

struct BoundReport {
  BoundMode mode = BoundMode::theorem2_a;
  double t0 = 0.0;
  double constant = 0.0;      // A, A0 or B
  double log_constant = 0.0;
  std::optional<int> minimal_index;
  LinearThreshold threshold;  // theta_n of the tail event the bound controls
  std::map<int, double> rhs_by_m;
  std::map<int, double> log_rhs_by_m;
  std::map<int, double> lhs_by_m;
  std::map<int, double> margins;
  std::optional<int> horizon;  // truncation of the infinite join, when lhs is filled

  /// All margins >= -tol.
  [[nodiscard]] bool passed(double tol = 1e-9) const;
};

/// Smallest i >= 1 with C^i <= 1 - C, searched up to 10^6. NoFiniteIndex if
/// C >= 1 or the cap is hit.
[[nodiscard]] int minimal_index(double constant);

/// e^{x^2/8} - (lambda e^{(1-lambda)x} + (1-lambda) e^{-lambda x}), lambda in [0, 1].
[[nodiscard]] double lemma_gap(double lambda, double x);

/// t0 = (b + gamma)/lambda, A = e^{-b t0} f(t0), rhs(m) = A^m e^{-a t0}, m = 1..params.m.
/// gamma and lambda are taken from the envelope.
[[nodiscard]] BoundReport theorem2_bound_a(const BoundParams& params, const MgfEnvelope& env);

/// t0 = (b + gamma)/(2 lambda), A0 = e^{-(b - gamma) t0 / 2} f(t0),
/// rhs(m) = A0^m e^{-m (b + gamma)^2 / (4 lambda)}; thresholds b n.
[[nodiscard]] BoundReport theorem2_bound_b(const BoundParams& params, const MgfEnvelope& env);

/// f(t) = e^{-gamma t}(p e^{(alpha+beta) t q} + q e^{-(alpha+beta) t p}),
/// p = (alpha - gamma)/(alpha + beta), q = (beta + gamma)/(alpha + beta),
/// with lambda = (alpha + beta)^2 / 8. InvalidParams unless alpha > gamma >= 0, beta > 0.
[[nodiscard]] MgfEnvelope khan_envelope(double alpha, double beta, double gamma);

/// The two bounded-difference supermartingale bounds, written directly in
/// alpha, beta, gamma (first: thresholds a + b n; second: thresholds b n).
[[nodiscard]] std::pair<BoundReport, BoundReport> khan_bounds(const BoundParams& params);

/// Martingale with -alpha <= dx <= beta, thresholds a + b n.
[[nodiscard]] BoundReport ncbr_bound(const BoundParams& params);

/// Martingale with -alpha <= dx <= beta, thresholds c n.
[[nodiscard]] BoundReport azuma_nc_bound(const BoundParams& params);

/// e^{-m c^2 / (2 alpha^2)}
[[nodiscard]] double azuma_classical_bound(double alpha, double c, int m);
/// Report form of azuma_classical_bound for m = 1..params.m (beta := alpha);
/// the start index comes from the azuma_nc constant.
[[nodiscard]] BoundReport azuma_classical_report(const BoundParams& params);

/// The closed-form report for `mode`. `env` is used by the theorem2 modes only.
[[nodiscard]] BoundReport bound_for_mode(BoundMode mode, const BoundParams& params, const MgfEnvelope& env);

/// Fills lhs_by_m with traces of the truncated tail events starting at
/// m + minimal_index (empty, hence 0, when the start exceeds the horizon) and
/// margins = rhs - lhs. Premises of the mode are checked first and reported
/// with PreconditionFailed: s_0 = 0, (super)martingale kind, bounded
/// differences, drift, and the MGF condition on the default t grid.
[[nodiscard]] BoundReport verify_inequality(const AdaptedSequence& seq, const BoundParams& params,
                                            const MgfEnvelope& env, BoundMode mode, int horizon);

[[nodiscard]] nlohmann::json to_json(const BoundReport& report);

/// Column order of bound_csv_rows.
inline constexpr std::string_view kBoundCsvHeader = "mode,t0,constant,minimal_index,m,rhs,lhs,margin,log_rhs";
/// One row per m: mode tag, t0, constant, minimal_index, m, rhs, lhs, margin, log_rhs.
[[nodiscard]] std::vector<std::string> bound_csv_rows(const BoundReport& report);

}  // namespace ncmart
