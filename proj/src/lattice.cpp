#include "ncmart/lattice.hpp"

#include "ncmart/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <iterator>
#include <string>

namespace ncmart {

namespace {

constexpr double kRankTol = 1e-9;
constexpr double kMeetTol = 1e-8;
constexpr double kOrderTol = 1e-8;

void same_dim(const Projection& p, const Projection& q) {
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "projections of dim " + std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
  }
}

}  // namespace

Projection join(const Projection& p, const Projection& q) {
  same_dim(p, q);
  const Index d = p.dim();
  if (p.is_coordinate() && q.is_coordinate()) {
    std::vector<Index> u;
    std::set_union(p.coordinates().begin(), p.coordinates().end(), q.coordinates().begin(), q.coordinates().end(),
                   std::back_inserter(u));
    return Projection::coordinate(d, std::move(u));
  }
  if (p.rank() == 0) return q;
  if (q.rank() == 0) return p;
  Matrix stacked(d, p.rank() + q.rank());
  stacked << p.basis(), q.basis();
  Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  const double cutoff = kRankTol * static_cast<double>(d) * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return Projection::from_orthonormal_basis(d, svd.matrixU().leftCols(rank));
}

Projection meet(const Projection& p, const Projection& q) {
  same_dim(p, q);
  const Index d = p.dim();
  if (p.is_coordinate() && q.is_coordinate()) {
    std::vector<Index> i;
    std::set_intersection(p.coordinates().begin(), p.coordinates().end(), q.coordinates().begin(),
                          q.coordinates().end(), std::back_inserter(i));
    return Projection::coordinate(d, std::move(i));
  }
  const SpectralDecomposition dec = eigendecompose(p.op() + q.op());
  std::vector<Index> cols;
  for (Index k = 0; k < dec.dim(); ++k) {
    if (dec.eigenvalues(k) >= 2.0 - kMeetTol) cols.push_back(k);
  }
  if (dec.coordinate) {
    std::vector<Index> coords;
    for (Index k : cols) coords.push_back(dec.order[static_cast<std::size_t>(k)]);
    return Projection::coordinate(d, std::move(coords));
  }
  Matrix basis(d, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Index>(k)) = dec.eigenvectors.col(cols[k]);
  return Projection::from_orthonormal_basis(d, std::move(basis));
}

bool leq_proj(const Projection& p, const Projection& q) {
  same_dim(p, q);
  if (p.is_coordinate() && q.is_coordinate()) {
    return std::includes(q.coordinates().begin(), q.coordinates().end(), p.coordinates().begin(),
                         p.coordinates().end());
  }
  if (p.rank() == 0) return true;
  // ||q p - p|| = ||(q - 1) P_basis||; with an orthonormal basis B of range(p)
  // this is the largest singular value of q B - B.
  const Matrix b = p.basis();
  return op_norm(Matrix(q.matrix() * b - b)) <= kOrderTol;
}

Projection complement(const Projection& p) {
  const Index d = p.dim();
  if (p.is_coordinate()) {
    std::vector<Index> rest;
    std::size_t k = 0;
    for (Index i = 0; i < d; ++i) {
      if (k < p.coordinates().size() && p.coordinates()[k] == i) {
        ++k;
      } else {
        rest.push_back(i);
      }
    }
    return Projection::coordinate(d, std::move(rest));
  }
  return spectral_projection(HermitianOperator::identity(d) - p.op(), 0.5);
}

TailEvent tail_event(const AdaptedSequence& seq, const ThresholdFn& thresholds, int start, int horizon) {
  if (start < 0 || start > horizon || horizon > seq.last()) {
    throw Error(ErrorKind::RangeError, "tail event needs 0 <= start <= horizon <= " + std::to_string(seq.last()) +
                                           ", got start " + std::to_string(start) + ", horizon " +
                                           std::to_string(horizon));
  }
  TailEvent ev;
  ev.start = start;
  ev.horizon = horizon;
  ev.projection = Projection::zero(seq[0].dim());
  for (int n = start; n <= horizon; ++n) {
    const double theta = thresholds(n);
    ev.thresholds[n] = theta;
    ev.projection = join(ev.projection, spectral_projection(seq[n], theta));
  }
  ev.trace = ev.projection.trace();
  return ev;
}

std::vector<std::pair<int, double>> tail_meet_trace(const AdaptedSequence& seq, const ThresholdFn& thresholds,
                                                    const std::vector<int>& m_list, int horizon) {
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    if (m_list[k] > horizon || (k > 0 && m_list[k] <= m_list[k - 1])) {
      throw Error(ErrorKind::RangeError, "m_list must be strictly increasing and <= horizon");
    }
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(m_list.size());
  for (int m : m_list) out.emplace_back(m, tail_event(seq, thresholds, m, horizon).trace);
  return out;
}

Projection tail_limsup(const AdaptedSequence& seq, const ThresholdFn& thresholds, const std::vector<int>& m_list,
                       int horizon) {
  if (m_list.empty()) throw Error(ErrorKind::RangeError, "m_list is empty");
  Projection acc = Projection::identity(seq[0].dim());
  for (int m : m_list) acc = meet(acc, tail_event(seq, thresholds, m, horizon).projection);
  return acc;
}

}  // namespace ncmart
