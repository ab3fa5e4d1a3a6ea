#include "ncmart/generators.hpp"

#include "ncmart/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <numeric>

namespace ncmart {

Matrix random_matrix(Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    for (Index r = 0; r < dim; ++r) g(r, c) = Complex(normal(rng), normal(rng));
  }
  return g;
}

HermitianOperator random_hermitian(Index dim, Rng& rng, double scale) {
  const Matrix g = random_matrix(dim, rng);
  return HermitianOperator::symmetrized(0.5 * scale * (g + g.adjoint()));
}

Matrix random_unitary(Index dim, Rng& rng) {
  const Matrix g = random_matrix(dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

Projection random_projection(Index dim, Index rank, Rng& rng) {
  if (rank < 0 || rank > dim) throw Error(ErrorKind::RangeError, "projection rank outside 0..dim");
  const Matrix u = random_unitary(dim, rng);
  return Projection::from_orthonormal_basis(dim, u.leftCols(rank));
}

HermitianOperator random_level_hermitian(const Filtration& filt, int level, Rng& rng) {
  const Index lead = filt.space().leading_dim(level);
  const HermitianOperator block = random_hermitian(lead, rng);
  return HermitianOperator::symmetrized(filt.lift(level, block.matrix()));
}

HermitianOperator random_psd(Index dim, Rng& rng) {
  const Matrix g = random_matrix(dim, rng);
  return HermitianOperator::symmetrized(g * g.adjoint() / static_cast<double>(dim));
}

Matrix random_rotation(Index dim, double theta, Rng& rng) {
  const HermitianOperator g = random_hermitian(dim, rng);
  const SpectralDecomposition dec = eigendecompose(g);
  const double norm = std::max(dec.spectral_radius(), 1e-300);
  Eigen::VectorXcd phases(dim);
  for (Index k = 0; k < dim; ++k) phases(k) = std::polar(1.0, theta * dec.eigenvalues(k) / norm);
  return dec.eigenvectors * phases.asDiagonal() * dec.eigenvectors.adjoint();
}

AdaptedSequence make_chain(const RealVector& step_template, int steps, ChainKind kind, Rng& rng,
                           std::optional<double> rotation) {
  auto unitary = [&](Index dim) { return rotation ? random_rotation(dim, *rotation, rng) : random_unitary(dim, rng); };
  const Index d = step_template.size();
  if (d < 1 || steps < 1) throw Error(ErrorKind::InvalidParams, "chain needs a nonempty template and steps >= 1");
  Filtration filt(TensorSpace(std::vector<Index>(static_cast<std::size_t>(steps), d)));
  std::vector<HermitianOperator> dx;
  dx.reserve(static_cast<std::size_t>(steps));

  for (int j = 1; j <= steps; ++j) {
    if (kind == ChainKind::diagonal) {
      std::vector<Index> perm(static_cast<std::size_t>(d));
      std::iota(perm.begin(), perm.end(), Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      RealVector h(d);
      for (Index k = 0; k < d; ++k) h(k) = step_template(perm[static_cast<std::size_t>(k)]);
      dx.push_back(filt.embed_factor(j, HermitianOperator::diagonal(h)));
      continue;
    }
    // Block on the first j factors, index (k, i) -> k * d + i.
    const Index lead = filt.space().leading_dim(j - 1);
    const Matrix h = step_template.cast<Complex>().asDiagonal();
    Matrix controlled = Matrix::Zero(lead * d, lead * d);
    for (Index k = 0; k < lead; ++k) {
      const Matrix v = unitary(d);
      controlled.block(k * d, k * d, d, d) = v * h * v.adjoint();
    }
    Matrix basis_change = Matrix::Identity(lead * d, lead * d);
    if (lead > 1) {
      const Matrix w = unitary(lead);
      basis_change.setZero();
      for (Index b = 0; b < lead; ++b) {
        for (Index a = 0; a < lead; ++a) {
          for (Index i = 0; i < d; ++i) basis_change(a * d + i, b * d + i) = w(a, b);
        }
      }
    }
    const Matrix block = basis_change * controlled * basis_change.adjoint();
    dx.push_back(HermitianOperator::symmetrized(filt.lift(j, block)));
  }
  return from_differences(filt, dx);
}

}  // namespace ncmart
