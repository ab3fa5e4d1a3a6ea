#include "ncmart/prob_space.hpp"

#include "ncmart/errors.hpp"

#include <algorithm>
#include <string>

namespace ncmart {

TensorSpace::TensorSpace(std::vector<Index> factor_dims) : dims_(std::move(factor_dims)) {
  if (dims_.empty()) throw Error(ErrorKind::InvalidParams, "tensor space needs at least one factor");
  for (Index d : dims_) {
    if (d < 1) throw Error(ErrorKind::InvalidParams, "factor dimension must be >= 1");
    total_ *= d;
  }
}

Index TensorSpace::leading_dim(int level) const {
  Index l = 1;
  for (int k = 0; k < level; ++k) l *= dims_[static_cast<std::size_t>(k)];
  return l;
}

Index TensorSpace::trailing_dim(int level) const { return total_ / leading_dim(level); }

void Filtration::check(int level, Index rows, Index cols) const {
  if (level < 0 || level > depth()) {
    throw Error(ErrorKind::LevelOutOfRange,
                "level " + std::to_string(level) + " outside 0.." + std::to_string(depth()));
  }
  if (rows != dim() || cols != dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "operator of size " + std::to_string(rows) + " on space of dim " + std::to_string(dim()));
  }
}

Matrix Filtration::reduce(int level, const Matrix& x) const {
  check(level, x.rows(), x.cols());
  const Index lead = space_.leading_dim(level);
  const Index trail = space_.trailing_dim(level);
  Matrix block = Matrix::Zero(lead, lead);
  for (Index c = 0; c < lead; ++c) {
    for (Index r = 0; r < lead; ++r) {
      Complex acc(0.0, 0.0);
      for (Index t = 0; t < trail; ++t) acc += x(r * trail + t, c * trail + t);
      block(r, c) = acc / static_cast<double>(trail);
    }
  }
  return block;
}

Matrix Filtration::lift(int level, const Matrix& block) const {
  const Index lead = space_.leading_dim(level);
  if (level < 0 || level > depth()) throw Error(ErrorKind::LevelOutOfRange, "lift level");
  if (block.rows() != lead || block.cols() != lead) throw Error(ErrorKind::DimensionMismatch, "lift block size");
  const Index trail = space_.trailing_dim(level);
  Matrix out = Matrix::Zero(dim(), dim());
  for (Index c = 0; c < lead; ++c) {
    for (Index r = 0; r < lead; ++r) {
      const Complex v = block(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      for (Index t = 0; t < trail; ++t) out(r * trail + t, c * trail + t) = v;
    }
  }
  return out;
}

Matrix Filtration::cond_exp(int level, const Matrix& x) const {
  check(level, x.rows(), x.cols());
  if (level == depth()) return x;
  return lift(level, reduce(level, x));
}

HermitianOperator Filtration::cond_exp(int level, const HermitianOperator& x) const {
  return HermitianOperator::symmetrized(cond_exp(level, x.matrix()));
}

bool Filtration::is_measurable(int level, const Matrix& x, double tol) const {
  const double resid = op_norm(Matrix(cond_exp(level, x) - x));
  return resid <= tol * (1.0 + op_norm(x));
}

HermitianOperator Filtration::embed_factor(int factor, const HermitianOperator& op) const {
  if (factor < 1 || factor > depth()) throw Error(ErrorKind::LevelOutOfRange, "factor index");
  const Index d = space_.factor_dims()[static_cast<std::size_t>(factor - 1)];
  if (op.dim() != d) throw Error(ErrorKind::DimensionMismatch, "factor operator dimension");
  const Index before = space_.leading_dim(factor - 1);
  const Index after = space_.trailing_dim(factor);
  const Matrix& m = op.matrix();
  Matrix out = Matrix::Zero(dim(), dim());
  // index = (b * d + i) * after + t
  for (Index b = 0; b < before; ++b) {
    for (Index j = 0; j < d; ++j) {
      for (Index i = 0; i < d; ++i) {
        const Complex v = m(i, j);
        if (v == Complex(0.0, 0.0)) continue;
        for (Index t = 0; t < after; ++t) out((b * d + i) * after + t, (b * d + j) * after + t) = v;
      }
    }
  }
  return HermitianOperator::symmetrized(out);
}

HermitianOperator cond_exp(const Filtration& filt, int level, const HermitianOperator& x) {
  return filt.cond_exp(level, x);
}

double verify_module_property(const Filtration& filt, int level, const Matrix& a, const Matrix& x, const Matrix& b) {
  constexpr double kMeasurableTol = 1e-9;
  if (!filt.is_measurable(level, a, kMeasurableTol) || !filt.is_measurable(level, b, kMeasurableTol)) {
    throw Error(ErrorKind::PreconditionFailed, "module property needs a, b measurable at the level");
  }
  const Matrix lhs = filt.cond_exp(level, Matrix(a * x * b));
  const Matrix rhs = a * filt.cond_exp(level, x) * b;
  return op_norm(Matrix(lhs - rhs));
}

double verify_tower(const Filtration& filt, int i, int j, const Matrix& x) {
  const Matrix target = filt.cond_exp(std::min(i, j), x);
  const Matrix ij = filt.cond_exp(i, filt.cond_exp(j, x));
  const Matrix ji = filt.cond_exp(j, filt.cond_exp(i, x));
  return std::max(op_norm(Matrix(ij - target)), op_norm(Matrix(ji - target)));
}

}  // namespace ncmart
