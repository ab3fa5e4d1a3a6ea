#pragma once

// Projection lattice: joins, meets and order, and the tail events
//   p = join_{n = start..horizon} 1_[theta_n, inf)(s_n)
// whose traces are the left-hand sides of the tail inequalities. Infinite
// joins are truncated at `horizon`; the truncated trace is monotone in the
// horizon so "truncated LHS <= RHS" is a sound check for every horizon.

#include "ncmart/martingale.hpp"
#include "ncmart/operator.hpp"

#include <functional>
#include <map>
#include <vector>

namespace ncmart {

/// Projection onto range(p) + range(q). Rank is decided by singular values
/// above 1e-9 * D * sigma_max of the concatenated range bases.
[[nodiscard]] Projection join(const Projection& p, const Projection& q);

/// Projection onto range(p) /\ range(q): the eigenspace of p + q at eigenvalue 2 (tolerance 1e-8).
[[nodiscard]] Projection meet(const Projection& p, const Projection& q);

/// Range inclusion: ||q p - p||_op <= 1e-8.
[[nodiscard]] bool leq_proj(const Projection& p, const Projection& q);

/// 1 - p
[[nodiscard]] Projection complement(const Projection& p);

using ThresholdFn = std::function<double(int)>;

/// theta_n = intercept + slope * n
struct LinearThreshold {
  double intercept = 0.0;
  double slope = 0.0;

  [[nodiscard]] double operator()(int n) const { return intercept + slope * n; }
};

struct TailEvent {
  int start = 0;
  int horizon = 0;
  std::map<int, double> thresholds;  // n -> theta_n
  Projection projection = Projection::zero(1);
  double trace = 0.0;
};

/// Join of spectral_projection(s_n, theta_n, inf) over n in [start, horizon],
/// accumulated left to right. RangeError unless 0 <= start <= horizon <= N.
[[nodiscard]] TailEvent tail_event(const AdaptedSequence& seq, const ThresholdFn& thresholds, int start, int horizon);

/// Trace of tail_event(seq, thresholds, m, horizon) for each m; m_list must be
/// strictly increasing with every m <= horizon. Non-increasing in m.
[[nodiscard]] std::vector<std::pair<int, double>> tail_meet_trace(const AdaptedSequence& seq,
                                                                  const ThresholdFn& thresholds,
                                                                  const std::vector<int>& m_list, int horizon);

/// Meet over m in m_list of the truncated tails; the finite-horizon analogue
/// of limsup_n 1_[theta_n, inf)(s_n).
[[nodiscard]] Projection tail_limsup(const AdaptedSequence& seq, const ThresholdFn& thresholds,
                                     const std::vector<int>& m_list, int horizon);

}  // namespace ncmart
