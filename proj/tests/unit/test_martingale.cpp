#include "ncmart/bounds.hpp"
#include "ncmart/errors.hpp"
#include "ncmart/generators.hpp"
#include "ncmart/martingale.hpp"
#include "ncmart/mcsim.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ncmart;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ncmart::Error");
  return ErrorKind::ConfigError;
}

RealVector two_point_template(double alpha, double beta, double gamma) {
  return *StepDistribution::two_point(alpha, beta, gamma).as_uniform_diagonal();
}

}  // namespace

TEST_CASE("martingale_from_final is a martingale") {
  Rng rng(21);
  const Filtration filt{TensorSpace({2, 3, 2})};
  const HermitianOperator x = random_hermitian(filt.dim(), rng);
  const AdaptedSequence seq = martingale_from_final(filt, x);
  CHECK(seq.kind() == SequenceKind::martingale);
  CHECK(seq.last() == 3);
  CHECK((seq[3].matrix() - x.matrix()).norm() <= 1e-12 * (1.0 + x.matrix().norm()));
  const auto dx = differences(seq);
  for (int j = 1; j <= 3; ++j) {
    const Matrix e = oracle::cond_exp({2, 3, 2}, j - 1, dx[static_cast<std::size_t>(j)].matrix());
    CHECK(e.norm() <= 1e-12 * (1.0 + x.matrix().norm()));
  }
}

TEST_CASE("adaptedness is enforced") {
  Rng rng(22);
  const Filtration filt{TensorSpace({2, 2})};
  const HermitianOperator full = random_hermitian(4, rng);
  CHECK(kind_of([&] { AdaptedSequence(filt, {HermitianOperator::zero(4), full}); }) == ErrorKind::NotAdapted);
  CHECK(kind_of([&] { AdaptedSequence(filt, {HermitianOperator::zero(3)}); }) == ErrorKind::DimensionMismatch);
  // Beyond the depth the level saturates at K.
  CHECK_NOTHROW(AdaptedSequence(filt, {HermitianOperator::zero(4), filt.cond_exp(1, full), full, full}));
}

TEST_CASE("partial sums are recovered exactly from dyadic differences") {
  const Filtration filt{TensorSpace({2, 2, 2})};
  std::vector<HermitianOperator> dx;
  for (int j = 1; j <= 3; ++j) {
    RealVector h(2);
    h << 0.75 * j, -0.375 * j;
    dx.push_back(filt.embed_factor(j, HermitianOperator::diagonal(h)));
  }
  const AdaptedSequence seq = from_differences(filt, dx);
  const auto back = differences(seq);
  CHECK(back[0].matrix().norm() == 0.0);
  for (int j = 1; j <= 3; ++j) {
    CHECK((back[static_cast<std::size_t>(j)].matrix() - dx[static_cast<std::size_t>(j - 1)].matrix()).norm() == 0.0);
  }
}

TEST_CASE("partial sums round-trip within a few ulp for generic differences") {
  Rng rng(23);
  const AdaptedSequence seq = make_chain(two_point_template(1.0, 1.0, 0.0), 4, ChainKind::conjugated, rng);
  const auto dx = differences(seq);
  Matrix sum = Matrix::Zero(seq.filtration().dim(), seq.filtration().dim());
  for (int n = 0; n <= seq.last(); ++n) {
    sum += dx[static_cast<std::size_t>(n)].matrix();
    CHECK((sum - seq[n].matrix()).cwiseAbs().maxCoeff() <= 8 * 2.3e-16 * (1.0 + seq[n].matrix().cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("independent sums classify by the sign of the factor means") {
  const TensorSpace space({2, 2, 2});
  RealVector centered(2);
  centered << 1.0, -1.0;
  RealVector drifted(2);
  drifted << 0.5, -1.5;
  const auto zero_mean = independent_sum_construction(space, {HermitianOperator::diagonal(centered),
                                                              HermitianOperator::diagonal(centered)});
  CHECK(zero_mean.kind() == SequenceKind::martingale);
  const auto negative = independent_sum_construction(space, {HermitianOperator::diagonal(drifted),
                                                             HermitianOperator::diagonal(centered)});
  CHECK(negative.kind() == SequenceKind::supermartingale);
  RealVector up(2);
  up << 1.5, -0.5;
  CHECK(kind_of([&] { (void)independent_sum_construction(space, {HermitianOperator::diagonal(up)}); }) ==
        ErrorKind::NotSupermartingale);
  CHECK(classify(negative, 1e-9) == SequenceKind::supermartingale);
}

TEST_CASE("bounded differences and drift on generated chains") {
  Rng rng(24);
  for (const ChainKind kind : {ChainKind::diagonal, ChainKind::conjugated}) {
    const AdaptedSequence seq = make_chain(two_point_template(2.0, 1.0, 0.5), 4, kind, rng);
    const auto bd = check_bounded_differences(seq, 2.0, 1.0);
    CHECK(bd.ok);
    CHECK(bd.lower_margin == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bd.upper_margin == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_FALSE(check_bounded_differences(seq, 2.0, 0.9).ok);
    // E_{j-1}(dx_j) = -gamma exactly.
    CHECK(std::abs(drift_margin(seq, 0.5)) <= 1e-9);
    CHECK(drift_margin(seq, 0.6) < -0.09);
    CHECK(seq.kind() == SequenceKind::supermartingale);
  }
}

TEST_CASE("conditional MGF of conjugated chains is the scalar two-point MGF") {
  Rng rng(25);
  const double alpha = 2.0;
  const double beta = 1.0;
  const double gamma = 0.5;
  const AdaptedSequence seq = make_chain(two_point_template(alpha, beta, gamma), 3, ChainKind::conjugated, rng);
  const auto dx = differences(seq);
  const std::vector<Index> dims{2, 2, 2};
  const double p = (alpha - gamma) / (alpha + beta);
  for (double t : {0.1, 0.7, 1.9}) {
    const double scalar = p * std::exp(t * beta) + (1.0 - p) * std::exp(-t * alpha);
    for (int j = 1; j <= 3; ++j) {
      const Matrix e = oracle::cond_exp(dims, j - 1, oracle::expm(t * dx[static_cast<std::size_t>(j)].matrix()));
      CHECK((e - scalar * Matrix::Identity(8, 8)).norm() <= 1e-10 * scalar);
    }
  }
}

TEST_CASE("small rotations stay unitary and near the identity") {
  Rng rng(28);
  for (const double theta : {0.0, 0.05, 0.3, 2.0}) {
    const Matrix u = random_rotation(4, theta, rng);
    CHECK((u.adjoint() * u - Matrix::Identity(4, 4)).norm() <= 1e-12);
    // ||exp(i theta G) - 1|| <= theta for ||G|| = 1.
    CHECK(op_norm(Matrix(u - Matrix::Identity(4, 4))) <= theta + 1e-12);
  }
}

TEST_CASE("rotation chains keep the scalar conditional MGF and do not commute") {
  Rng rng(29);
  const AdaptedSequence seq =
      make_chain(two_point_template(2.0, 1.0, 0.5), 3, ChainKind::conjugated, rng, 0.2);
  const auto dx = differences(seq);
  const double p = 1.5 / 3.0;
  for (double t : {0.3, 1.1}) {
    const double scalar = p * std::exp(t) + (1.0 - p) * std::exp(-2.0 * t);
    for (int j = 1; j <= 3; ++j) {
      const Matrix e = oracle::cond_exp({2, 2, 2}, j - 1, oracle::expm(t * dx[static_cast<std::size_t>(j)].matrix()));
      CHECK((e - scalar * Matrix::Identity(8, 8)).norm() <= 1e-10 * scalar);
    }
  }
  const Matrix& x = dx[2].matrix();
  const Matrix& y = dx[3].matrix();
  CHECK(op_norm(Matrix(x * y - y * x)) > 1e-4);
  CHECK(check_bounded_differences(seq, 2.0, 1.0).ok);
}

TEST_CASE("Khan envelope satisfies the MGF condition on bounded chains") {
  Rng rng(26);
  struct Case {
    double alpha, beta, gamma;
  };
  for (const Case c : {Case{1.0, 1.0, 0.0}, Case{2.0, 1.0, 0.0}, Case{2.0, 1.0, 0.5}, Case{1.0, 3.0, 0.0}}) {
    const MgfEnvelope env = khan_envelope(c.alpha, c.beta, c.gamma);
    const RealVector h = two_point_template(c.alpha, c.beta, c.gamma);
    for (const ChainKind kind : {ChainKind::diagonal, ChainKind::conjugated}) {
      const AdaptedSequence seq = make_chain(h, 3, kind, rng);
      const MgfCheck check = check_mgf_condition(seq, env, default_t_grid(1.0));
      CHECK(check.passed());
    }
  }
}

TEST_CASE("an envelope below the true MGF is reported as a violation") {
  Rng rng(27);
  const AdaptedSequence seq = make_chain(two_point_template(1.0, 1.0, 0.0), 2, ChainKind::conjugated, rng);
  const MgfCheck check = check_mgf_condition(seq, MgfEnvelope::saturated(0.0, 0.05), default_t_grid(1.0));
  CHECK_FALSE(check.passed());
  CHECK(check.at_n >= 1);
  CHECK(check.worst < 0.0);
}

TEST_CASE("envelope validation") {
  CHECK(kind_of([] { (void)MgfEnvelope::saturated(0.0, 0.0); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([] { (void)MgfEnvelope([](double t) { return t * t; }, 0.0, 0.5, "too big"); }) ==
        ErrorKind::InvalidParams);
  const MgfEnvelope grid = MgfEnvelope::from_grid({{1.0, std::exp(0.25)}, {2.0, std::exp(1.0)}}, 0.0, 0.5);
  CHECK(grid.log_f(1.5) == doctest::Approx(0.625));
  CHECK(grid.log_f(0.5) == doctest::Approx(0.125));
  CHECK(grid.log_f(0.9) == doctest::Approx(0.25));
  CHECK(grid.log_f(3.0) == doctest::Approx(4.5));
  CHECK(kind_of([] { (void)MgfEnvelope::from_grid({{1.0, 2.0}}, 0.0, 0.5); }) == ErrorKind::InvalidParams);
}

TEST_CASE("bound parameters") {
  BoundParams p;
  CHECK_NOTHROW(p.validate());
  p.gamma = 1.0;
  CHECK_NOTHROW(p.validate());
  CHECK(kind_of([&] { p.validate_khan(); }) == ErrorKind::InvalidParams);
  p.gamma = -0.1;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidParams);
  p.gamma = 0.0;
  p.m = 0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidParams);
}

TEST_CASE("t grid") {
  const auto g = t_grid(2.0, 10, 1e-2, 5.0);
  CHECK(g.size() == 11);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g[9] == doctest::Approx(10.0));
  CHECK(g.back() == 2.0);
  CHECK(default_t_grid(1.0).size() == 65);
}

TEST_CASE("aux sequence starts at exp(-a t)") {
  Rng rng(28);
  const AdaptedSequence seq = make_chain(two_point_template(1.0, 1.0, 0.0), 3, ChainKind::conjugated, rng);
  const auto y = aux_sequence(seq, 0.5, 0.8, 2.0);
  CHECK(y.size() == 4);
  CHECK(trace_state(y[0]) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  const Matrix ref = oracle::expm(2.0 * seq[2].matrix()) * std::exp(-(0.5 + 1.6) * 2.0);
  CHECK((y[2].matrix() - ref).norm() <= 1e-10 * ref.norm());
}
