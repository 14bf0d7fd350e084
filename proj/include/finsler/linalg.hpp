#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "errors.hpp"

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Structural identities (exact-arithmetic expectations).
inline constexpr double kStructuralTol = 1e-12;
// Identities derived through several floating point operations.
inline constexpr double kDerivedTol = 1e-10;
// Singular value cutoff for rank decisions.
inline constexpr double kRankTol = 1e-10;
// Relative Gram-determinant cutoff below which a flag is degenerate.
inline constexpr double kDegenerateFlagTol = 1e-14;

inline void require_size(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InputError(std::string(what) + ": expected length " + std::to_string(n) +
                     ", got " + std::to_string(v.size()));
  }
}

inline Vec unit_vector(Eigen::Index n, Eigen::Index i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

// Numerical rank from singular values, relative to max(1, sigma_max).
inline Eigen::Index numerical_rank(const Mat& m, double tol = kRankTol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++r;
  return r;
}

}  // namespace finsler
