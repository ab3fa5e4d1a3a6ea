#pragma once

// Finite-dimensional noncommutative probability spaces: a tensor product of
// matrix algebras M_{d1} (x) ... (x) M_{dK} with the normalized trace, filtered
// by "acts on the first j factors".
//
// Basis ordering is row-major over factor indices: factor 1 is the most
// significant digit. Level j therefore splits the total index as
// (leading, trailing) = (i / R_j, i % R_j) with R_j = prod_{k>j} d_k, and the
// conditional expectation onto level j is the normalized partial trace over
// the trailing block, tensored back with the identity.

#include "ncmart/operator.hpp"

#include <vector>

namespace ncmart {

class TensorSpace {
 public:
  /// Throws InvalidParams unless K >= 1 and every d_k >= 1.
  explicit TensorSpace(std::vector<Index> factor_dims);

  [[nodiscard]] const std::vector<Index>& factor_dims() const { return dims_; }
  [[nodiscard]] int num_factors() const { return static_cast<int>(dims_.size()); }
  [[nodiscard]] Index total_dim() const { return total_; }
  /// prod_{k <= level} d_k (1 at level 0).
  [[nodiscard]] Index leading_dim(int level) const;
  /// prod_{k > level} d_k (D at level 0).
  [[nodiscard]] Index trailing_dim(int level) const;

  friend bool operator==(const TensorSpace&, const TensorSpace&) = default;

 private:
  std::vector<Index> dims_;
  Index total_ = 1;
};

class Filtration {
 public:
  explicit Filtration(TensorSpace space) : space_(std::move(space)) {}

  [[nodiscard]] const TensorSpace& space() const { return space_; }
  /// K; levels run 0..K.
  [[nodiscard]] int depth() const { return space_.num_factors(); }
  [[nodiscard]] Index dim() const { return space_.total_dim(); }

  /// Normalized partial trace over factors level+1..K, as a matrix on the
  /// leading factors.
  [[nodiscard]] Matrix reduce(int level, const Matrix& x) const;
  /// block (x) identity on factors level+1..K.
  [[nodiscard]] Matrix lift(int level, const Matrix& block) const;

  [[nodiscard]] Matrix cond_exp(int level, const Matrix& x) const;
  [[nodiscard]] HermitianOperator cond_exp(int level, const HermitianOperator& x) const;

  /// ||E_level(x) - x||_op <= tol * (1 + ||x||_op)
  [[nodiscard]] bool is_measurable(int level, const Matrix& x, double tol) const;

  /// Embeds an operator on factor `factor` (1-based) as 1 (x) .. (x) op (x) .. (x) 1.
  [[nodiscard]] HermitianOperator embed_factor(int factor, const HermitianOperator& op) const;

  friend bool operator==(const Filtration&, const Filtration&) = default;

 private:
  void check(int level, Index rows, Index cols) const;

  TensorSpace space_;
};

/// E_j(x); throws LevelOutOfRange or DimensionMismatch.
[[nodiscard]] HermitianOperator cond_exp(const Filtration& filt, int level, const HermitianOperator& x);

/// ||E_j(a x b) - a E_j(x) b||_op for level-j measurable a, b.
/// Throws PreconditionFailed if a or b is not measurable at level j.
[[nodiscard]] double verify_module_property(const Filtration& filt, int level, const Matrix& a, const Matrix& x,
                                            const Matrix& b);

/// max(||E_i E_j x - E_min x||, ||E_j E_i x - E_min x||).
[[nodiscard]] double verify_tower(const Filtration& filt, int i, int j, const Matrix& x);

}  // namespace ncmart
