#include "ncmart/martingale.hpp"

#include "ncmart/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace ncmart {

namespace {

constexpr double kStructuralTol = 1e-9;

double hermitian_residual(const HermitianOperator& x, const HermitianOperator& y) { return op_norm(x - y); }

}  // namespace

std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::martingale: return "martingale";
    case SequenceKind::supermartingale: return "supermartingale";
    case SequenceKind::unverified: return "unverified";
  }
  return "unverified";
}

AdaptedSequence::AdaptedSequence(Filtration filt, std::vector<HermitianOperator> ops)
    : filt_(std::move(filt)), ops_(std::move(ops)), kind_(SequenceKind::unverified) {
  if (ops_.empty()) throw Error(ErrorKind::RangeError, "adapted sequence must be nonempty");
  for (std::size_t n = 0; n < ops_.size(); ++n) {
    const HermitianOperator& s = ops_[n];
    if (s.dim() != filt_.dim()) throw Error(ErrorKind::DimensionMismatch, "sequence operator dimension");
    const int level = level_of(static_cast<int>(n));
    const double resid = hermitian_residual(filt_.cond_exp(level, s), s);
    if (resid > kStructuralTol * (1.0 + op_norm(s))) {
      throw Error(ErrorKind::NotAdapted,
                  "s_" + std::to_string(n) + " is not measurable at level " + std::to_string(level) +
                      " (residual " + std::to_string(resid) + ")");
    }
  }
  kind_ = classify(*this, kStructuralTol);
}

std::vector<HermitianOperator> differences(const AdaptedSequence& seq) {
  std::vector<HermitianOperator> dx;
  dx.reserve(seq.ops().size());
  dx.push_back(seq[0]);
  for (int n = 1; n <= seq.last(); ++n) dx.push_back(seq[n] - seq[n - 1]);
  return dx;
}

SequenceKind classify(const AdaptedSequence& seq, double tol) {
  const Filtration& filt = seq.filtration();
  double scale = 1.0;
  for (const auto& s : seq.ops()) scale = std::max(scale, 1.0 + op_norm(s));

  bool martingale = true;
  bool supermartingale = true;
  for (int j = 0; j < seq.last(); ++j) {
    const HermitianOperator predicted = filt.cond_exp(seq.level_of(j), seq[j + 1]);
    const HermitianOperator gap = seq[j] - predicted;
    if (op_norm(gap) > tol * scale) martingale = false;
    if (!is_psd(gap, tol)) supermartingale = false;
  }
  if (martingale) return SequenceKind::martingale;
  if (supermartingale) return SequenceKind::supermartingale;
  return SequenceKind::unverified;
}

BoundedDifferenceCheck check_bounded_differences(const AdaptedSequence& seq, double alpha, double beta) {
  BoundedDifferenceCheck out;
  const auto dx = differences(seq);
  for (std::size_t j = 1; j < dx.size(); ++j) {
    const RealVector ev = eigenvalues(dx[j]);
    const double lo = ev(0) + alpha;
    const double hi = beta - ev(ev.size() - 1);
    out.lower_margin = std::min(out.lower_margin, lo);
    out.upper_margin = std::min(out.upper_margin, hi);
    // is_psd(dx + alpha) and is_psd(beta - dx) at 1e-9
    const double norm_lo = std::max(std::abs(ev(0) + alpha), std::abs(ev(ev.size() - 1) + alpha));
    const double norm_hi = std::max(std::abs(beta - ev(0)), std::abs(beta - ev(ev.size() - 1)));
    if (lo < -kStructuralTol * (1.0 + norm_lo) || hi < -kStructuralTol * (1.0 + norm_hi)) out.ok = false;
  }
  return out;
}

double drift_margin(const AdaptedSequence& seq, double gamma) {
  const auto dx = differences(seq);
  double worst = kInf;
  for (int j = 1; j <= seq.last(); ++j) {
    const HermitianOperator mean = seq.filtration().cond_exp(seq.level_of(j - 1), dx[static_cast<std::size_t>(j)]);
    worst = std::min(worst, min_eigenvalue((-mean).shifted(-gamma)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

MgfEnvelope::MgfEnvelope(LogFunction log_f, double gamma, double lambda, std::string name)
    : log_f_(std::move(log_f)), gamma_(gamma), lambda_(lambda), name_(std::move(name)) {
  if (!(lambda_ > 0.0) || !(gamma_ >= 0.0) || !std::isfinite(lambda_) || !std::isfinite(gamma_)) {
    throw Error(ErrorKind::InvalidParams, "envelope needs lambda > 0 and gamma >= 0");
  }
  constexpr int kPoints = 64;
  const double lo = std::log(1e-3);
  const double hi = std::log(1e2);
  for (int k = 0; k < kPoints; ++k) {
    const double t = std::exp(lo + (hi - lo) * k / (kPoints - 1));
    const double lf = log_f_(t);
    if (!std::isfinite(lf)) {
      throw Error(ErrorKind::InvalidParams, "envelope f(" + std::to_string(t) + ") is not finite and positive");
    }
    const double bound = log_bound(t);
    if (lf > bound + 1e-12 * (1.0 + std::abs(bound))) {
      throw Error(ErrorKind::InvalidParams, "envelope exceeds exp(-gamma t + lambda t^2) at t = " + std::to_string(t));
    }
  }
}

MgfEnvelope MgfEnvelope::saturated(double gamma, double lambda) {
  return MgfEnvelope([gamma, lambda](double t) { return -gamma * t + lambda * t * t; }, gamma, lambda, "saturated");
}

MgfEnvelope MgfEnvelope::from_grid(std::vector<std::pair<double, double>> points, double gamma, double lambda) {
  if (points.empty()) throw Error(ErrorKind::InvalidParams, "explicit envelope grid is empty");
  std::sort(points.begin(), points.end());
  std::vector<double> ts;
  std::vector<double> logs;
  for (const auto& [t, f] : points) {
    if (!(t > 0.0) || !(f > 0.0) || !std::isfinite(f)) {
      throw Error(ErrorKind::InvalidParams, "explicit envelope needs t > 0 and finite f > 0");
    }
    if (!ts.empty() && t == ts.back()) throw Error(ErrorKind::InvalidParams, "duplicate t in envelope grid");
    ts.push_back(t);
    logs.push_back(std::log(f));
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double bound = -gamma * ts[k] + lambda * ts[k] * ts[k];
    if (logs[k] > bound + 1e-12 * (1.0 + std::abs(bound))) {
      throw Error(ErrorKind::InvalidParams, "explicit envelope point exceeds the quadratic bound");
    }
  }
  // Chords of a convex function can cross it, so the interpolant is capped.
  auto log_f = [ts, logs, gamma, lambda](double t) {
    const double bound = -gamma * t + lambda * t * t;
    if (t <= ts.front()) return std::min(logs.front(), bound);
    if (t >= ts.back()) return bound;
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return std::min((1.0 - w) * logs[k - 1] + w * logs[k], bound);
  };
  return MgfEnvelope(std::move(log_f), gamma, lambda, "explicit-grid");
}

void BoundParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidParams, std::string(name) + " must be > 0");
  };
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(lambda, "lambda");
  positive(a, "a");
  positive(b, "b");
  positive(c, "c");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::InvalidParams, "gamma must be >= 0");
  if (m < 1) throw Error(ErrorKind::InvalidParams, "m must be >= 1");
}

void BoundParams::validate_khan() const {
  validate();
  if (!(gamma < alpha)) throw Error(ErrorKind::InvalidParams, "Khan envelope needs gamma < alpha");
}

std::vector<double> t_grid(double t0, int points, double lo, double hi_factor) {
  if (points < 2 || !(lo > 0.0) || !(hi_factor > 0.0) || !(t0 > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "t grid needs points >= 2 and positive lo, hi_factor, t0");
  }
  const double hi = std::max(hi_factor * t0, 2.0 * lo);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points) + 1);
  for (int k = 0; k < points; ++k) grid.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
  grid.push_back(t0);
  return grid;
}

std::vector<double> default_t_grid(double t0) { return t_grid(t0, 64, 1e-3, 10.0); }

namespace {

// E_level(U diag(v) U^*) as a block on the leading factors, without forming
// the full D x D product.
Matrix reduced_function(const Filtration& filt, int level, const SpectralDecomposition& dec,
                               const RealVector& values) {
  const Index lead = filt.space().leading_dim(level);
  const Index trail = filt.space().trailing_dim(level);
  const Index d = dec.dim();
  if (dec.coordinate) {
    Matrix block = Matrix::Zero(lead, lead);
    for (Index k = 0; k < d; ++k) {
      const Index pos = dec.order[static_cast<std::size_t>(k)];
      block(pos / trail, pos / trail) += values(k);
    }
    return block / static_cast<double>(trail);
  }
  Matrix block = Matrix::Zero(lead, lead);
  const Eigen::VectorXcd w = values.cast<Complex>();
  Matrix rows(lead, d);
  for (Index t = 0; t < trail; ++t) {
    for (Index a = 0; a < lead; ++a) rows.row(a) = dec.eigenvectors.row(a * trail + t);
    block.noalias() += rows * w.asDiagonal() * rows.adjoint();
  }
  block /= static_cast<double>(trail);
  return 0.5 * (block + block.adjoint());
}

}  // namespace

MgfCheck check_mgf_condition(const AdaptedSequence& seq, const MgfEnvelope& env, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw Error(ErrorKind::InvalidParams, "t grid is empty");
  MgfCheck out;
  const auto dx = differences(seq);
  const Filtration& filt = seq.filtration();
  for (int n = 1; n <= seq.last(); ++n) {
    const SpectralDecomposition dec = eigendecompose(dx[static_cast<std::size_t>(n)]);
    const int level = seq.level_of(n - 1);
    for (double t : t_grid) {
      RealVector values(dec.dim());
      for (Index k = 0; k < dec.dim(); ++k) values(k) = std::exp(t * dec.eigenvalues(k));
      const Matrix block = reduced_function(filt, level, dec, values);
      Eigen::SelfAdjointEigenSolver<Matrix> solver(block, Eigen::EigenvaluesOnly);
      const double top = solver.eigenvalues()(solver.eigenvalues().size() - 1);
      const double f = env.f(t);
      const double margin = f - top;
      const double scaled = margin / std::max(1.0, f);
      if (scaled < out.worst_scaled) {
        out.worst_scaled = scaled;
        out.worst = margin;
        out.at_n = n;
        out.at_t = t;
      }
    }
  }
  return out;
}

std::vector<HermitianOperator> aux_sequence(const AdaptedSequence& seq, double a, double b, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidParams, "aux_sequence needs t > 0");
  std::vector<HermitianOperator> ys;
  ys.reserve(seq.ops().size());
  for (int n = 0; n <= seq.last(); ++n) {
    const double shift = (a + b * n) * t;
    ys.push_back(func_calculus(seq[n], [t, shift](double s) { return std::exp(t * s - shift); }));
  }
  return ys;
}

AdaptedSequence martingale_from_final(const Filtration& filt, const HermitianOperator& x) {
  std::vector<HermitianOperator> ops;
  for (int j = 0; j <= filt.depth(); ++j) ops.push_back(filt.cond_exp(j, x));
  return AdaptedSequence(filt, std::move(ops));
}

AdaptedSequence independent_sum_construction(const TensorSpace& space, const std::vector<HermitianOperator>& elements) {
  if (static_cast<int>(elements.size()) > space.num_factors()) {
    throw Error(ErrorKind::RangeError, "more elements than tensor factors");
  }
  Filtration filt(space);
  std::vector<HermitianOperator> dx;
  for (std::size_t j = 0; j < elements.size(); ++j) {
    const HermitianOperator& x = elements[j];
    const double mean = trace_state(x);
    const double scale = 1.0 + op_norm(x);
    if (mean > 1e-12 * scale) {
      throw Error(ErrorKind::NotSupermartingale,
                  "element " + std::to_string(j + 1) + " has positive factor mean " + std::to_string(mean));
    }
    dx.push_back(filt.embed_factor(static_cast<int>(j) + 1, x));
  }
  AdaptedSequence seq = from_differences(filt, dx);
  if (seq.kind() == SequenceKind::unverified) {
    throw Error(ErrorKind::NotSupermartingale, "order-independent sum failed the supermartingale check");
  }
  return seq;
}

AdaptedSequence from_differences(const Filtration& filt, const std::vector<HermitianOperator>& dx) {
  std::vector<HermitianOperator> ops;
  ops.reserve(dx.size() + 1);
  ops.push_back(HermitianOperator::zero(filt.dim()));
  for (const auto& d : dx) ops.push_back(ops.back() + d);
  return AdaptedSequence(filt, std::move(ops));
}

}  // namespace ncmart
