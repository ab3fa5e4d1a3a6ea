#include "ncmart/operator.hpp"

#include "ncmart/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ncmart {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kProjectionTol = 1e-9;
constexpr double kPhaseTol = 1e-12;

// Rotate each eigenvector so its first nonzero component is real positive.
void fix_phases(Matrix& vecs) {
  for (Index c = 0; c < vecs.cols(); ++c) {
    for (Index r = 0; r < vecs.rows(); ++r) {
      const Complex z = vecs(r, c);
      const double mag = std::abs(z);
      if (mag > kPhaseTol) {
        vecs.col(c) *= std::conj(z) / mag;
        vecs(r, c) = Complex(std::abs(vecs(r, c)), 0.0);
        break;
      }
    }
  }
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch,
                "operator must be square with dim >= 1, got " + std::to_string(entries_.rows()) + "x" +
                    std::to_string(entries_.cols()));
  }
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= kHermitianTol * scale)) {
    throw Error(ErrorKind::NonHermitianInput, "max |x - x^*| = " + std::to_string(asym));
  }
}

HermitianOperator HermitianOperator::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "operator must be square with dim >= 1");
  }
  Matrix h = 0.5 * (m + m.adjoint());
  return HermitianOperator(std::move(h), Trusted{});
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Matrix::Identity(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Matrix::Zero(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::diagonal(const RealVector& values) {
  Matrix m = Matrix::Zero(values.size(), values.size());
  m.diagonal() = values.cast<Complex>();
  return HermitianOperator(std::move(m), Trusted{});
}

bool HermitianOperator::is_diagonal() const {
  const Index d = dim();
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r < d; ++r) {
      if (r != c && entries_(r, c) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

HermitianOperator operator+(const HermitianOperator& x, const HermitianOperator& y) {
  if (x.dim() != y.dim()) throw Error(ErrorKind::DimensionMismatch, "operator sum");
  return HermitianOperator(x.entries_ + y.entries_, HermitianOperator::Trusted{});
}

HermitianOperator operator-(const HermitianOperator& x, const HermitianOperator& y) {
  if (x.dim() != y.dim()) throw Error(ErrorKind::DimensionMismatch, "operator difference");
  return HermitianOperator(x.entries_ - y.entries_, HermitianOperator::Trusted{});
}

HermitianOperator operator*(double s, const HermitianOperator& x) {
  return HermitianOperator(s * x.entries_, HermitianOperator::Trusted{});
}

HermitianOperator operator-(const HermitianOperator& x) {
  return HermitianOperator(-x.entries_, HermitianOperator::Trusted{});
}

HermitianOperator HermitianOperator::shifted(double s) const {
  Matrix m = entries_;
  m.diagonal().array() += s;
  return HermitianOperator(std::move(m), Trusted{});
}

double SpectralDecomposition::spectral_radius() const {
  if (eigenvalues.size() == 0) return 0.0;
  return std::max(std::abs(eigenvalues(0)), std::abs(eigenvalues(eigenvalues.size() - 1)));
}

// ---------------------------------------------------------------------------

Projection::Projection(const HermitianOperator& op) : op_(op) {
  const Matrix& p = op.matrix();
  const double idem = op_norm(Matrix(p * p - p));
  if (!(idem <= kProjectionTol)) {
    throw Error(ErrorKind::PreconditionFailed, "not idempotent: ||p^2 - p|| = " + std::to_string(idem));
  }
  const SpectralDecomposition dec = eigendecompose(op);
  std::vector<Index> cols;
  for (Index k = 0; k < dec.dim(); ++k) {
    const double lam = dec.eigenvalues(k);
    if (std::abs(lam - 1.0) <= kProjectionTol) {
      cols.push_back(k);
    } else if (std::abs(lam) > kProjectionTol) {
      throw Error(ErrorKind::PreconditionFailed, "eigenvalue " + std::to_string(lam) + " not in {0,1}");
    }
  }
  basis_.resize(op.dim(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis_.col(static_cast<Index>(k)) = dec.eigenvectors.col(cols[k]);
}

Projection Projection::zero(Index dim) { return coordinate(dim, {}); }

Projection Projection::identity(Index dim) {
  std::vector<Index> all(static_cast<std::size_t>(dim));
  std::iota(all.begin(), all.end(), Index{0});
  return coordinate(dim, std::move(all));
}

Projection Projection::from_orthonormal_basis(Index dim, Matrix basis) {
  if (basis.rows() != dim) throw Error(ErrorKind::DimensionMismatch, "projection basis rows");
  HermitianOperator op = HermitianOperator::symmetrized(basis * basis.adjoint());
  return Projection(std::move(op), std::move(basis), std::nullopt);
}

Projection Projection::coordinate(Index dim, std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  RealVector diag = RealVector::Zero(dim);
  for (Index k : indices) {
    if (k < 0 || k >= dim) throw Error(ErrorKind::RangeError, "coordinate index out of range");
    diag(k) = 1.0;
  }
  return Projection(HermitianOperator::diagonal(diag), Matrix(), std::move(indices));
}

Index Projection::rank() const {
  return coords_ ? static_cast<Index>(coords_->size()) : basis_.cols();
}

Matrix Projection::basis() const {
  if (!coords_) return basis_;
  Matrix b = Matrix::Zero(dim(), static_cast<Index>(coords_->size()));
  for (std::size_t k = 0; k < coords_->size(); ++k) b((*coords_)[k], static_cast<Index>(k)) = 1.0;
  return b;
}

double Projection::trace() const { return static_cast<double>(rank()) / static_cast<double>(dim()); }

// ---------------------------------------------------------------------------

SpectralDecomposition eigendecompose(const HermitianOperator& x) {
  SpectralDecomposition dec;
  const Index d = x.dim();
  if (x.is_diagonal()) {
    // Exact: eigenvalues are the diagonal, eigenvectors a permutation of e_k.
    RealVector diag = x.matrix().diagonal().real();
    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return diag(a) < diag(b); });
    dec.eigenvalues.resize(d);
    dec.eigenvectors = Matrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
      dec.eigenvalues(k) = diag(order[static_cast<std::size_t>(k)]);
      dec.eigenvectors(order[static_cast<std::size_t>(k)], k) = 1.0;
    }
    dec.coordinate = true;
    dec.order = std::move(order);
    return dec;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFiniteResult, "eigensolver did not converge");
  }
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = solver.eigenvectors();
  fix_phases(dec.eigenvectors);
  return dec;
}

HermitianOperator func_calculus(const SpectralDecomposition& dec, const ScalarFunction& f) {
  const Index d = dec.dim();
  RealVector values(d);
  for (Index k = 0; k < d; ++k) {
    values(k) = f(dec.eigenvalues(k));
    if (!std::isfinite(values(k))) {
      throw Error(ErrorKind::NonFiniteResult,
                  "f(" + std::to_string(dec.eigenvalues(k)) + ") = " + std::to_string(values(k)));
    }
  }
  if (dec.coordinate) {
    RealVector diag(d);
    for (Index k = 0; k < d; ++k) diag(dec.order[static_cast<std::size_t>(k)]) = values(k);
    return HermitianOperator::diagonal(diag);
  }
  const Matrix& u = dec.eigenvectors;
  return HermitianOperator::symmetrized(u * values.cast<Complex>().asDiagonal() * u.adjoint());
}

HermitianOperator func_calculus(const HermitianOperator& x, const ScalarFunction& f) {
  return func_calculus(eigendecompose(x), f);
}

HermitianOperator exp(const HermitianOperator& x) {
  return func_calculus(x, [](double t) { return std::exp(t); });
}

Projection spectral_projection(const SpectralDecomposition& dec, double lo, double hi) {
  if (lo > hi) throw Error(ErrorKind::RangeError, "spectral interval has lo > hi");
  const Index d = dec.dim();
  std::vector<Index> cols;
  for (Index k = 0; k < d; ++k) {
    const double lam = dec.eigenvalues(k);
    if (at_or_above(lam, lo) && at_or_below(lam, hi)) cols.push_back(k);
  }
  if (dec.coordinate) {
    std::vector<Index> coords;
    coords.reserve(cols.size());
    for (Index k : cols) coords.push_back(dec.order[static_cast<std::size_t>(k)]);
    return Projection::coordinate(d, std::move(coords));
  }
  Matrix basis(d, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Index>(k)) = dec.eigenvectors.col(cols[k]);
  return Projection::from_orthonormal_basis(d, std::move(basis));
}

Projection spectral_projection(const HermitianOperator& x, double lo, double hi) {
  return spectral_projection(eigendecompose(x), lo, hi);
}

double trace_state(const HermitianOperator& x) {
  return x.matrix().trace().real() / static_cast<double>(x.dim());
}

Complex trace_state(const Matrix& x) { return x.trace() / static_cast<double>(x.rows()); }

Complex trace_state_product(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.rows() || x.rows() != y.cols()) throw Error(ErrorKind::DimensionMismatch, "trace of product");
  // Tr(xy) = sum_ij x_ij y_ji
  return x.cwiseProduct(y.transpose()).sum() / static_cast<double>(x.rows());
}

GoldenThompsonTerms gt_terms(const HermitianOperator& y1, const HermitianOperator& y2) {
  if (y1.dim() != y2.dim()) throw Error(ErrorKind::DimensionMismatch, "Golden-Thompson operands");
  const HermitianOperator e1 = exp(y1);
  const HermitianOperator e2 = exp(y2);
  // tau(e1 e2) is real: trace of a product of two positive operators.
  return {trace_state_product(e1.matrix(), e2.matrix()).real(), trace_state(exp(y1 + y2))};
}

double gt_gap(const HermitianOperator& y1, const HermitianOperator& y2) {
  const GoldenThompsonTerms terms = gt_terms(y1, y2);
  return terms.product_trace - terms.sum_trace;
}

RealVector eigenvalues(const HermitianOperator& x) {
  if (x.is_diagonal()) {
    RealVector diag = x.matrix().diagonal().real();
    std::sort(diag.data(), diag.data() + diag.size());
    return diag;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonFiniteResult, "eigensolver did not converge");
  return solver.eigenvalues();
}

double min_eigenvalue(const HermitianOperator& x) { return eigenvalues(x)(0); }

double op_norm(const HermitianOperator& x) {
  const RealVector ev = eigenvalues(x);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double op_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(x);
  return svd.singularValues()(0);
}

bool is_psd(const HermitianOperator& x, double tol) {
  const RealVector ev = eigenvalues(x);
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol * (1.0 + norm);
}

}  // namespace ncmart
