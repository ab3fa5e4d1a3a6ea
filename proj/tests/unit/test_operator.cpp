#include "ncmart/errors.hpp"
#include "ncmart/generators.hpp"
#include "ncmart/operator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ncmart;

namespace {

Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace

TEST_CASE("construction rejects non-Hermitian and non-square input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator{m}, Error);
  try {
    HermitianOperator bad{m};
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonHermitianInput);
  }
  try {
    HermitianOperator bad{Matrix::Zero(2, 3)};
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  // Tiny asymmetry below 1e-12 relative is tolerated.
  m(1, 0) = 1.0 + 1e-14;
  CHECK_NOTHROW(HermitianOperator{m});
}

TEST_CASE("symmetrized is idempotent on Hermitian input") {
  Rng rng(1);
  const HermitianOperator x = random_hermitian(5, rng);
  const HermitianOperator y = HermitianOperator::symmetrized(x.matrix());
  CHECK((x.matrix() - y.matrix()).norm() == 0.0);
}

TEST_CASE("eigendecomposition reconstructs the operator") {
  Rng rng(2);
  for (Index d : {1, 2, 5, 16}) {
    const HermitianOperator x = random_hermitian(d, rng);
    const SpectralDecomposition dec = eigendecompose(x);
    CHECK(dec.coordinate == (d == 1));
    for (Index k = 1; k < d; ++k) CHECK(dec.eigenvalues(k - 1) <= dec.eigenvalues(k));
    const Matrix v = dec.eigenvectors;
    const Matrix rec = v * dec.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
    CHECK((rec - x.matrix()).norm() <= 1e-12 * (1.0 + x.matrix().norm()));
    CHECK((v.adjoint() * v - Matrix::Identity(d, d)).norm() <= 1e-12);
  }
}

TEST_CASE("diagonal input takes the coordinate path") {
  RealVector vals(4);
  vals << 3.0, -1.0, 2.0, -1.0;
  const SpectralDecomposition dec = eigendecompose(HermitianOperator::diagonal(vals));
  CHECK(dec.coordinate);
  CHECK(dec.eigenvalues(0) == -1.0);
  CHECK(dec.eigenvalues(3) == 3.0);
  const Projection p = spectral_projection(dec, 0.0);
  CHECK(p.is_coordinate());
  CHECK(p.rank() == 2);
  CHECK(p.trace() == doctest::Approx(0.5));
}

TEST_CASE("exp agrees with a Pade scaling-and-squaring oracle") {
  Rng rng(3);
  for (Index d : {2, 4, 8, 16}) {
    for (int k = 0; k < 5; ++k) {
      const HermitianOperator x = random_hermitian(d, rng, 0.7);
      const Matrix ours = exp(x).matrix();
      const Matrix ref = oracle::expm(x.matrix());
      CHECK((ours - ref).norm() <= 1e-10 * ref.norm());
    }
  }
}

TEST_CASE("functional calculus composes like scalar functions") {
  Rng rng(4);
  const HermitianOperator x = random_hermitian(6, rng);
  const HermitianOperator sq = func_calculus(x, [](double v) { return v * v; });
  CHECK((sq.matrix() - x.matrix() * x.matrix()).norm() <= 1e-11 * (1.0 + sq.matrix().norm()));
  const HermitianOperator id = func_calculus(x, [](double v) { return v; });
  CHECK((id.matrix() - x.matrix()).norm() <= 1e-12 * (1.0 + x.matrix().norm()));
  const HermitianOperator negative = x.shifted(-op_norm(x) - 1.0);
  CHECK_THROWS_AS((void)func_calculus(negative, [](double v) { return std::log(v); }), Error);
}

TEST_CASE("spectral projections are projections with the right rank") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const HermitianOperator x = random_hermitian(7, rng);
    const double lo = -0.5 + 0.05 * k;
    const Projection p = spectral_projection(x, lo);
    const Matrix& m = p.matrix();
    CHECK((m * m - m).norm() <= 1e-10);
    Index expected = 0;
    for (double v : eigenvalues(x)) expected += v >= lo ? 1 : 0;
    CHECK(p.rank() == expected);
    // The range is invariant under x.
    CHECK((x.matrix() * m - m * x.matrix()).norm() <= 1e-10 * (1.0 + op_norm(x)));
  }
}

TEST_CASE("endpoints of the spectral interval are closed") {
  RealVector vals(3);
  vals << 0.1 + 0.2, 1.0, -2.0;  // 0.30000000000000004
  const HermitianOperator x = HermitianOperator::diagonal(vals);
  CHECK(spectral_projection(x, 0.3).rank() == 2);
  CHECK(spectral_projection(x, 1.0, 1.0).rank() == 1);
  CHECK(spectral_projection(x, -2.0, 0.3).rank() == 2);
}

TEST_CASE("trace state is tracial and normalized") {
  Rng rng(6);
  const Matrix x = random_matrix(5, rng);
  const Matrix y = random_matrix(5, rng);
  CHECK(std::abs(trace_state(Matrix(Matrix::Identity(5, 5))) - 1.0) < 1e-15);
  CHECK(std::abs(trace_state_product(x, y) - trace_state_product(y, x)) <= 1e-12 * (x.norm() * y.norm()));
  CHECK(std::abs(trace_state_product(x, y) - (x * y).trace() / 5.0) <= 1e-12 * (x.norm() * y.norm()));
}

TEST_CASE("Golden-Thompson gap for two Pauli matrices") {
  // tau(e^X e^Z) = cosh^2(1); tau(e^{X+Z}) = cosh(sqrt 2).
  const HermitianOperator x{pauli_x()};
  const HermitianOperator z{pauli_z()};
  const double expected = std::cosh(1.0) * std::cosh(1.0) - std::cosh(std::sqrt(2.0));
  CHECK(gt_gap(x, z) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.2029142889).epsilon(1e-9));
}

TEST_CASE("Golden-Thompson gap is non-negative and vanishes on commuting pairs") {
  Rng rng(7);
  for (Index d : {2, 3, 8}) {
    for (int k = 0; k < 50; ++k) {
      const HermitianOperator y1 = random_hermitian(d, rng);
      const HermitianOperator y2 = random_hermitian(d, rng);
      const GoldenThompsonTerms t = gt_terms(y1, y2);
      CHECK(t.product_trace - t.sum_trace >= -1e-9 * std::max(1.0, t.product_trace));
      const HermitianOperator y3 = func_calculus(y1, [](double v) { return std::sin(v); });
      const GoldenThompsonTerms c = gt_terms(y1, y3);
      CHECK(std::abs(c.product_trace - c.sum_trace) <= 1e-9 * std::max(1.0, c.product_trace));
    }
  }
}

TEST_CASE("operator norms and positivity") {
  Rng rng(8);
  const HermitianOperator p = random_psd(6, rng);
  CHECK(is_psd(p, 1e-12));
  CHECK_FALSE(is_psd(p.shifted(-op_norm(p) - 0.1), 1e-9));
  const Matrix g = random_matrix(5, rng);
  Eigen::JacobiSVD<Matrix> svd(g);
  CHECK(op_norm(g) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
  const HermitianOperator x = random_hermitian(5, rng);
  CHECK(op_norm(x) == doctest::Approx(eigenvalues(x).cwiseAbs().maxCoeff()));
  CHECK(min_eigenvalue(x) == doctest::Approx(eigenvalues(x).minCoeff()));
}

TEST_CASE("projection constructors") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  const Projection p{HermitianOperator{m}};
  CHECK(p.rank() == 1);
  m(1, 1) = 0.5;
  CHECK_THROWS_AS(Projection{HermitianOperator{m}}, Error);
  CHECK(Projection::identity(4).trace() == 1.0);
  CHECK(Projection::zero(4).rank() == 0);
  CHECK_THROWS_AS((void)Projection::coordinate(3, {3}), Error);
}
