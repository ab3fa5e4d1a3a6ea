#pragma once

// Dense Hermitian operator algebra. Every spectral quantity (functional
// calculus, exponentials, spectral projections) is computed from a single
// eigendecomposition so there is one tolerance story for the whole library.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace ncmart {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative slack for deciding whether an eigenvalue sits on an interval
/// endpoint. Open and closed endpoints are treated alike.
inline constexpr double kBoundaryEps = 1e-9;

/// value >= lo up to the boundary slack 1e-9 * (1 + |value|).
[[nodiscard]] inline bool at_or_above(double value, double lo) {
  return value >= lo - kBoundaryEps * (1.0 + std::abs(value));
}

[[nodiscard]] inline bool at_or_below(double value, double hi) {
  return value <= hi + kBoundaryEps * (1.0 + std::abs(value));
}

class HermitianOperator {
 public:
  /// Throws NonHermitianInput unless entries == entries^* within
  /// 1e-12 * max(1, max |entry|), and DimensionMismatch for non-square input.
  explicit HermitianOperator(Matrix entries);

  /// (m + m^*) / 2, for results of arithmetic that is Hermitian only up to
  /// rounding. Idempotent on exactly Hermitian input.
  static HermitianOperator symmetrized(const Matrix& m);
  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);
  static HermitianOperator diagonal(const RealVector& values);

  [[nodiscard]] Index dim() const { return entries_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }

  /// True iff every off-diagonal entry is exactly zero.
  [[nodiscard]] bool is_diagonal() const;

  friend HermitianOperator operator+(const HermitianOperator& x, const HermitianOperator& y);
  friend HermitianOperator operator-(const HermitianOperator& x, const HermitianOperator& y);
  friend HermitianOperator operator*(double s, const HermitianOperator& x);
  friend HermitianOperator operator-(const HermitianOperator& x);

  /// x + s * 1
  [[nodiscard]] HermitianOperator shifted(double s) const;

 private:
  struct Trusted {};
  HermitianOperator(Matrix entries, Trusted) : entries_(std::move(entries)) {}

  Matrix entries_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // non-decreasing
  Matrix eigenvectors;     // columns orthonormal; first nonzero component real positive
  bool coordinate = false; // eigenvectors are a permutation of the standard basis
  std::vector<Index> order; // coordinate mode only: eigenvectors.col(k) = e_{order[k]}

  [[nodiscard]] Index dim() const { return eigenvalues.size(); }
  [[nodiscard]] double spectral_radius() const;
};

/// Orthogonal projection, stored together with an orthonormal basis of its
/// range so lattice operations do not need to re-diagonalize.
class Projection {
 public:
  /// Validates idempotence and {0,1} spectrum at 1e-9.
  explicit Projection(const HermitianOperator& op);

  static Projection zero(Index dim);
  static Projection identity(Index dim);
  /// basis must have orthonormal columns; not re-checked.
  static Projection from_orthonormal_basis(Index dim, Matrix basis);
  /// Projection onto span{e_k : k in indices}.
  static Projection coordinate(Index dim, std::vector<Index> indices);

  [[nodiscard]] Index dim() const { return op_.dim(); }
  [[nodiscard]] Index rank() const;
  [[nodiscard]] const HermitianOperator& op() const { return op_; }
  [[nodiscard]] const Matrix& matrix() const { return op_.matrix(); }
  /// Orthonormal basis of the range (dim x rank).
  [[nodiscard]] Matrix basis() const;
  [[nodiscard]] bool is_coordinate() const { return coords_.has_value(); }
  [[nodiscard]] const std::vector<Index>& coordinates() const { return *coords_; }
  /// Normalized trace, rank / dim.
  [[nodiscard]] double trace() const;

 private:
  Projection(HermitianOperator op, Matrix basis, std::optional<std::vector<Index>> coords)
      : op_(std::move(op)), basis_(std::move(basis)), coords_(std::move(coords)) {}

  HermitianOperator op_;
  Matrix basis_;
  std::optional<std::vector<Index>> coords_;
};

using ScalarFunction = std::function<double(double)>;

[[nodiscard]] SpectralDecomposition eigendecompose(const HermitianOperator& x);

/// Throws NonFiniteResult when f is not finite on the spectrum.
[[nodiscard]] HermitianOperator func_calculus(const SpectralDecomposition& dec, const ScalarFunction& f);
[[nodiscard]] HermitianOperator func_calculus(const HermitianOperator& x, const ScalarFunction& f);
[[nodiscard]] HermitianOperator exp(const HermitianOperator& x);

/// Projection onto eigenvectors whose eigenvalue lies in [lo, hi] up to the
/// relative boundary slack (see at_or_above).
[[nodiscard]] Projection spectral_projection(const SpectralDecomposition& dec, double lo, double hi = kInf);
[[nodiscard]] Projection spectral_projection(const HermitianOperator& x, double lo, double hi = kInf);

/// tau(x) = Tr(x) / d.
[[nodiscard]] double trace_state(const HermitianOperator& x);
[[nodiscard]] Complex trace_state(const Matrix& x);
/// tau(x y) without forming the product.
[[nodiscard]] Complex trace_state_product(const Matrix& x, const Matrix& y);

struct GoldenThompsonTerms {
  double product_trace = 0.0;  // tau(e^{y1} e^{y2})
  double sum_trace = 0.0;      // tau(e^{y1 + y2})
};

[[nodiscard]] GoldenThompsonTerms gt_terms(const HermitianOperator& y1, const HermitianOperator& y2);

/// tau(e^{y1} e^{y2}) - tau(e^{y1 + y2}); non-negative by Golden-Thompson.
[[nodiscard]] double gt_gap(const HermitianOperator& y1, const HermitianOperator& y2);

[[nodiscard]] RealVector eigenvalues(const HermitianOperator& x);
[[nodiscard]] double min_eigenvalue(const HermitianOperator& x);
/// Largest |eigenvalue|.
[[nodiscard]] double op_norm(const HermitianOperator& x);
/// Largest singular value of an arbitrary square matrix.
[[nodiscard]] double op_norm(const Matrix& x);

/// lambda_min(x) >= -tol * (1 + ||x||_op).
[[nodiscard]] bool is_psd(const HermitianOperator& x, double tol);

}  // namespace ncmart
