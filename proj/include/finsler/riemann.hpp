#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "lie_core.hpp"
#include "linalg.hpp"

namespace finsler {

enum class Hypotheses { enforce, force };

// Levi-Civita connection of a left-invariant metric on a Lie group (h = 0),
// obtained from the Koszul formula
//   2 g(∇_U V, W) = g([U,V],W) - g([V,W],U) + g([W,U],V).
// Serves as the ground-truth curvature oracle; it never touches the
// naturally reductive closed forms.
class ConnectionTable {
 public:
  static ConnectionTable levi_civita(const ReductiveSpace& rs) {
    if (rs.h_dim() != 0)
      throw UnsupportedError("Koszul connection table requires h_dim = 0 (Lie group case)");
    const int n = rs.dim();
    const auto& a = rs.algebra();
    const Mat& g = rs.gram();
    Eigen::LDLT<Mat> solver(g);
    ConnectionTable t;
    t.n_ = n;
    t.gamma_.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec ei = a.basis(i), ej = a.basis(j);
        Vec rhs(n);
        for (int l = 0; l < n; ++l) {
          const Vec el = a.basis(l);
          rhs(l) = 0.5 * (g.row(l).dot(a.bracket(ei, ej)) - ei.dot(g * a.bracket(ej, el)) +
                          ej.dot(g * a.bracket(el, ei)));
        }
        t.gamma_[static_cast<std::size_t>(i) * n + j] = solver.solve(rhs);
      }
    return t;
  }

  int dim() const { return n_; }

  // Γ^k_{ij}: ∇_{e_i} e_j = sum_k Γ^k_{ij} e_k.
  double gamma(int i, int j, int k) const { return column(i, j)(k); }

  // ∇_U V for left-invariant fields U, V.
  Vec nabla(const Vec& u, const Vec& v) const {
    require_size(u, n_, "connection lhs");
    require_size(v, n_, "connection rhs");
    Vec out = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (u(i) == 0.0) continue;
      for (int j = 0; j < n_; ++j)
        if (v(j) != 0.0) out += u(i) * v(j) * column(i, j);
    }
    return out;
  }

 private:
  const Vec& column(int i, int j) const { return gamma_[static_cast<std::size_t>(i) * n_ + j]; }

  int n_ = 0;
  std::vector<Vec> gamma_;
};

// R(U,V)W = ∇_U∇_V W - ∇_V∇_U W - ∇_{[U,V]}W on left-invariant fields.
inline Vec curvature_oracle(const ReductiveSpace& rs, const ConnectionTable& t, const Vec& u,
                            const Vec& v, const Vec& w) {
  const Vec uv = rs.algebra().bracket(u, v);
  return t.nabla(u, t.nabla(v, w)) - t.nabla(v, t.nabla(u, w)) - t.nabla(uv, w);
}

inline double flag_gram_determinant(double yy, double uu, double yu) { return yy * uu - yu * yu; }

inline void require_plane(double yy, double uu, double yu) {
  if (!(yy > 0.0)) throw DegenerateFlagError("flagpole Y must be nonzero");
  if (!(flag_gram_determinant(yy, uu, yu) > kDegenerateFlagTol * yy * uu))
    throw DegenerateFlagError("Y and U do not span a plane");
}

// Riemannian sectional curvature g(R(U,Y)Y,U) / (g(U,U)g(Y,Y) - g(U,Y)^2)
// from the Koszul oracle. Compact bi-invariant groups come out nonnegative.
inline double sectional_oracle(const ReductiveSpace& rs, const ConnectionTable& t, const Vec& y,
                               const Vec& u) {
  const double yy = rs.inner(y, y), uu = rs.inner(u, u), yu = rs.inner(y, u);
  require_plane(yy, uu, yu);
  const Vec r = curvature_oracle(rs, t, u, y, y);
  return rs.inner(r, u) / flag_gram_determinant(yy, uu, yu);
}

inline double sectional_oracle(const ReductiveSpace& rs, const Vec& y, const Vec& u) {
  return sectional_oracle(rs, ConnectionTable::levi_civita(rs), y, u);
}

inline void require_naturally_reductive(const ReductiveSpace& rs, Hypotheses mode) {
  if (mode == Hypotheses::force) return;
  const auto nr = check_naturally_reductive(rs);
  if (!nr.holds)
    throw HypothesisError("space '" + rs.algebra().name() +
                          "' is not naturally reductive (residual " +
                          std::to_string(nr.max_residual) + ")");
}

// Levi-Civita curvature at the origin of a naturally reductive space, for
// m-vectors U, V, W:
//   1/4[U,[V,W]_m]_m - 1/4[V,[U,W]_m]_m - 1/2[[U,V]_m,W]_m - [[U,V]_h,W].
// Returns m-coordinates.
inline Vec curvature_nat_reductive(const ReductiveSpace& rs, const Vec& u, const Vec& v,
                                   const Vec& w, Hypotheses mode = Hypotheses::enforce) {
  require_naturally_reductive(rs, mode);
  const auto& a = rs.algebra();
  const Vec U = rs.embed(u), V = rs.embed(v), W = rs.embed(w);
  const Vec uv = a.bracket(U, V);
  const Vec t1 = a.bracket(U, rs.project(a.bracket(V, W), Part::m));
  const Vec t2 = a.bracket(V, rs.project(a.bracket(U, W), Part::m));
  const Vec t3 = a.bracket(rs.project(uv, Part::m), W);
  const Vec t4 = a.bracket(rs.project(uv, Part::h), W);
  // t4 lies in m by reductivity; the m-part is exact up to rounding.
  return rs.m_coords(0.25 * t1 - 0.25 * t2 - 0.5 * t3 - t4);
}

// Sectional curvature of g computed from the naturally reductive curvature.
inline double sectional_nat_reductive(const ReductiveSpace& rs, const Vec& y, const Vec& u,
                                      Hypotheses mode = Hypotheses::enforce) {
  const double yy = rs.inner(y, y), uu = rs.inner(u, u), yu = rs.inner(y, u);
  require_plane(yy, uu, yu);
  return rs.inner(curvature_nat_reductive(rs, u, y, y, mode), u) /
         flag_gram_determinant(yy, uu, yu);
}

enum class AlphaVariant {
  // 1/2[[U,Y]_m,Y]_m + [Y,[Y,U]_h], exactly as the closed form prints it.
  paper_literal,
  // R(U,Y)Y from the naturally reductive curvature; reproduces the Koszul
  // sectional curvature when X = 0.
  oracle_consistent,
};

// The curvature vector entering the numerator g_Y(alpha, U). m-coordinates.
inline Vec alpha(const ReductiveSpace& rs, const Vec& y, const Vec& u, AlphaVariant variant,
                 Hypotheses mode = Hypotheses::enforce) {
  if (variant == AlphaVariant::oracle_consistent)
    return curvature_nat_reductive(rs, u, y, y, mode);
  require_naturally_reductive(rs, mode);
  const auto& a = rs.algebra();
  const Vec Y = rs.embed(y), U = rs.embed(u);
  const Vec first = rs.project(a.bracket(rs.project(a.bracket(U, Y), Part::m), Y), Part::m);
  const Vec second = a.bracket(Y, rs.project(a.bracket(Y, U), Part::h));
  return rs.m_coords(0.5 * first + second);
}

// Curvature -[[U,V]_h, W] of the canonical connection of the second kind.
// Not the Levi-Civita curvature; identically zero when h = 0. g-vector.
inline Vec curvature_second_kind(const ReductiveSpace& rs, const Vec& u, const Vec& v,
                                 const Vec& w) {
  const auto& a = rs.algebra();
  return -a.bracket(rs.project(a.bracket(u, v), Part::h), w);
}

}  // namespace finsler
