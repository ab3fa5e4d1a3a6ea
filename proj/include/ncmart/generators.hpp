#pragma once

// Seeded random instances: Hermitian matrices, Haar unitaries, projections,
// and adapted chains built from a per-step diagonal template h.
//
// Chains live on K copies of C^d where d = h.size(). The difference at step j
// acts on the first j factors:
//   diagonal:   dx_j = 1 (x) .. (x) P_j h P_j^T (x) .. (x) 1 with a random permutation P_j,
//               so every operator is diagonal and the chain is the classical
//               i.i.d. walk whose step law is uniform on the entries of h;
//   conjugated: dx_j = u_j (1 (x) h) u_j^* with u_j = sum_k |psi_k><psi_k| (x) v_k,
//               {psi_k} a random orthonormal basis of the first j-1 factors and
//               v_k random unitaries on factor j. E_{j-1}(g(dx_j)) = tau(g(h)) 1
//               for every function g, but consecutive differences do not commute.
//               With a rotation angle theta the unitaries are exp(i theta G), G a
//               random Hermitian matrix of unit norm, instead of Haar; small
//               angles give nearly commuting differences.

#include "ncmart/martingale.hpp"
#include "ncmart/operator.hpp"

#include <optional>
#include <random>

namespace ncmart {

using Rng = std::mt19937_64;

/// (G + G^*)/2 with G i.i.d. standard complex Gaussian entries, times scale.
[[nodiscard]] HermitianOperator random_hermitian(Index dim, Rng& rng, double scale = 1.0);
/// Haar-distributed unitary via QR with phase correction.
[[nodiscard]] Matrix random_unitary(Index dim, Rng& rng);
/// Random complex Gaussian matrix (not Hermitian).
[[nodiscard]] Matrix random_matrix(Index dim, Rng& rng);
/// Projection onto the span of `rank` random vectors.
[[nodiscard]] Projection random_projection(Index dim, Index rank, Rng& rng);
/// Random Hermitian operator measurable at `level`: block (x) identity.
[[nodiscard]] HermitianOperator random_level_hermitian(const Filtration& filt, int level, Rng& rng);
/// Random PSD operator B B^* / dim.
[[nodiscard]] HermitianOperator random_psd(Index dim, Rng& rng);

enum class ChainKind { diagonal, conjugated };

/// exp(i theta G) with G = random_hermitian / ||.||_op.
[[nodiscard]] Matrix random_rotation(Index dim, double theta, Rng& rng);

/// Chain s_0 = 0, ..., s_K on K factors of dimension h.size(). `rotation`
/// only affects the conjugated kind.
[[nodiscard]] AdaptedSequence make_chain(const RealVector& step_template, int steps, ChainKind kind, Rng& rng,
                                         std::optional<double> rotation = std::nullopt);

}  // namespace ncmart
