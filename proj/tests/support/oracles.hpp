#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks: explicit index loops instead of
// block reshapes, Pade exponentials instead of eigendecompositions, and plain
// path enumeration instead of the state DP.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline Matrix expm(const Matrix& x) { return x.exp(); }

/// Normalized partial trace over the factors after `level`, by explicit loops
/// over multi-indices.
inline Matrix partial_trace(const std::vector<Index>& dims, int level, const Matrix& x) {
  Index lead = 1;
  Index trail = 1;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) (k < level ? lead : trail) *= dims[static_cast<std::size_t>(k)];
  Matrix out = Matrix::Zero(lead, lead);
  for (Index r = 0; r < lead; ++r) {
    for (Index c = 0; c < lead; ++c) {
      std::complex<double> s = 0.0;
      for (Index t = 0; t < trail; ++t) s += x(r * trail + t, c * trail + t);
      out(r, c) = s / static_cast<double>(trail);
    }
  }
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// E_level(x) = partial_trace(x) (x) identity.
inline Matrix cond_exp(const std::vector<Index>& dims, int level, const Matrix& x) {
  Index trail = 1;
  for (std::size_t k = static_cast<std::size_t>(level); k < dims.size(); ++k) trail *= dims[k];
  return kron(partial_trace(dims, level, x), Matrix::Identity(trail, trail));
}

struct Step {
  double value;
  double prob;
};

/// P(S_n >= a + b n for some n in [start, horizon]) by visiting every path.
/// The comparison uses the same relative slack as the library boundary rule.
inline double crossing_probability(const std::vector<Step>& steps, double a, double b, int start, int horizon) {
  const auto hits = [&](double s, int n) {
    const double lo = a + b * n;
    return s >= lo - 1e-9 * (1.0 + std::abs(s));
  };
  double total = 0.0;
  std::function<void(int, double, double)> walk = [&](int n, double s, double p) {
    if (n >= start && hits(s, n)) {
      total += p;
      return;
    }
    if (n == horizon) return;
    for (const Step& st : steps) walk(n + 1, s + st.value, p * st.prob);
  };
  walk(0, 0.0, 1.0);
  return total;
}

/// Wilson score interval written out from the textbook formula.
inline std::pair<double, double> wilson(std::int64_t hits, std::int64_t n, double z) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace oracle
