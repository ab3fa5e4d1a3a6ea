#include "ncmart/errors.hpp"
#include "ncmart/generators.hpp"
#include "ncmart/lattice.hpp"
#include "ncmart/mcsim.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/QR>

using namespace ncmart;

namespace {

Index numeric_rank(const Matrix& m) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(1e-9);
  return qr.rank();
}

bool same(const Projection& p, const Projection& q) { return (p.matrix() - q.matrix()).norm() <= 1e-8; }

}  // namespace

TEST_CASE("join and meet of random projections") {
  Rng rng(31);
  for (int k = 0; k < 30; ++k) {
    const Index d = 6;
    const Projection p = random_projection(d, 1 + k % 4, rng);
    const Projection q = random_projection(d, 1 + (k / 4) % 5, rng);
    Matrix both(d, 2 * d);
    both << p.matrix(), q.matrix();
    const Projection j = join(p, q);
    const Projection m = meet(p, q);
    CHECK(j.rank() == numeric_rank(both));
    CHECK(m.rank() == p.rank() + q.rank() - j.rank());
    CHECK(leq_proj(p, j));
    CHECK(leq_proj(q, j));
    CHECK(leq_proj(m, p));
    CHECK(leq_proj(m, q));
    CHECK(same(m, complement(join(complement(p), complement(q)))));
  }
}

TEST_CASE("projections sharing a subspace meet in it") {
  Rng rng(32);
  const Matrix u = random_unitary(5, rng);
  const Projection p = Projection::from_orthonormal_basis(5, u.leftCols(3));
  Matrix qb(5, 2);
  qb << u.col(0), u.col(4);
  const Projection q = Projection::from_orthonormal_basis(5, qb);
  const Projection m = meet(p, q);
  CHECK(m.rank() == 1);
  CHECK(same(m, Projection::from_orthonormal_basis(5, u.leftCols(1))));
  CHECK(join(p, q).rank() == 4);
  CHECK_FALSE(leq_proj(q, p));
}

TEST_CASE("coordinate fast path agrees with the dense path") {
  const Projection a = Projection::coordinate(6, {0, 2, 3});
  const Projection b = Projection::coordinate(6, {3, 4});
  const Projection ad = Projection::from_orthonormal_basis(6, a.basis());
  const Projection bd = Projection::from_orthonormal_basis(6, b.basis());
  CHECK(join(a, b).is_coordinate());
  CHECK(same(join(a, b), join(ad, bd)));
  CHECK(same(meet(a, b), meet(ad, bd)));
  CHECK(meet(a, b).rank() == 1);
  CHECK(complement(a).rank() == 3);
}

TEST_CASE("lattice operations reject mismatched dimensions") {
  try {
    (void)join(Projection::identity(2), Projection::identity(3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("diagonal tail events equal classical crossing probabilities") {
  Rng rng(33);
  const StepDistribution dist = StepDistribution::two_point(2.0, 1.0, 0.0);
  const RealVector h = *dist.as_uniform_diagonal();
  const AdaptedSequence seq = make_chain(h, 5, ChainKind::diagonal, rng);
  std::vector<oracle::Step> steps;
  for (const Atom& a : dist.support()) steps.push_back({a.value, a.prob});
  for (const LinearThreshold th : {LinearThreshold{0.5, 0.2}, LinearThreshold{1.0, 0.0}, LinearThreshold{0.0, 0.4}}) {
    for (int start = 0; start <= 5; ++start) {
      const TailEvent ev = tail_event(seq, th, start, 5);
      CHECK(ev.trace == doctest::Approx(oracle::crossing_probability(steps, th.intercept, th.slope, start, 5)).epsilon(1e-12));
      CHECK(ev.thresholds.size() == static_cast<std::size_t>(6 - start));
    }
  }
}

TEST_CASE("truncated tails grow with the horizon and shrink with the start") {
  Rng rng(34);
  const AdaptedSequence seq = make_chain(*StepDistribution::rademacher().as_uniform_diagonal(), 5,
                                         ChainKind::conjugated, rng);
  const LinearThreshold th{0.5, 0.1};
  double prev = 0.0;
  for (int horizon = 2; horizon <= 5; ++horizon) {
    const double tr = tail_event(seq, th, 2, horizon).trace;
    CHECK(tr >= prev - 1e-12);
    prev = tr;
  }
  const auto traces = tail_meet_trace(seq, th, {1, 2, 3, 4, 5}, 5);
  for (std::size_t k = 1; k < traces.size(); ++k) CHECK(traces[k].second <= traces[k - 1].second + 1e-12);
  const Projection ls = tail_limsup(seq, th, {1, 2, 3, 4, 5}, 5);
  for (int m = 1; m <= 5; ++m) CHECK(leq_proj(ls, tail_event(seq, th, m, 5).projection));
}

TEST_CASE("tail event range checks") {
  Rng rng(35);
  const AdaptedSequence seq = make_chain(*StepDistribution::rademacher().as_uniform_diagonal(), 3,
                                         ChainKind::diagonal, rng);
  const LinearThreshold th{1.0, 0.0};
  for (auto [start, horizon] : {std::pair{-1, 2}, std::pair{3, 2}, std::pair{0, 4}}) {
    try {
      (void)tail_event(seq, th, start, horizon);
      FAIL("expected RangeError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RangeError);
    }
  }
  CHECK_THROWS_AS((void)tail_meet_trace(seq, th, {2, 1}, 3), Error);
}
