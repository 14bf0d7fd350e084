#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "lie_core.hpp"
#include "linalg.hpp"
#include "riemann.hpp"

namespace finsler {

// Invariant Randers metric F(y) = sqrt(g(y,y)) + g(X,y) at the origin.
// Construction requires g(X,X) < 1 and [h,X] = 0; whether X is parallel is
// recorded and only enforced by the curvature formulas that need Berwald type.
class RandersMetric {
 public:
  static RandersMetric create(ReductiveSpace space, DriftVector drift) {
    const auto adm = check_drift_admissible(space, drift);
    if (!adm.norm_below_one)
      throw InputError("drift vector must satisfy g(X,X) < 1 (got " +
                       std::to_string(adm.norm_sq) + ")");
    if (!adm.h_invariant)
      throw InputError("drift vector is not ad(h)-invariant (residual " +
                       std::to_string(adm.h_residual) + ")");
    return RandersMetric(std::move(space), std::move(drift), adm);
  }

  static RandersMetric riemannian(ReductiveSpace space) {
    const int q = space.m_dim();
    return create(std::move(space), DriftVector::zero(q));
  }

  const ReductiveSpace& space() const { return space_; }
  const DriftVector& drift() const { return drift_; }
  const Vec& x() const { return drift_.coords; }
  const DriftAdmissibility& admissibility() const { return admissibility_; }

 private:
  RandersMetric(ReductiveSpace space, DriftVector drift, DriftAdmissibility adm)
      : space_(std::move(space)), drift_(std::move(drift)), admissibility_(adm) {}

  ReductiveSpace space_;
  DriftVector drift_;
  DriftAdmissibility admissibility_;
};

// Plane P = span{y, u} with flagpole y; both in m-coordinates.
struct Flag {
  Vec y;
  Vec u;
};

inline double randers_norm(const RandersMetric& f, const Vec& y) {
  const auto& rs = f.space();
  return std::sqrt(rs.inner(y, y)) + rs.inner(f.x(), y);
}

// Closed-form fundamental tensor
//   g_Y(U,V) = g(U,V) + g(X,U)g(X,V) - g(X,Y)g(Y,V)g(Y,U)/g(Y,Y)^{3/2}
//            + {g(X,U)g(Y,V) + g(X,Y)g(U,V) + g(X,V)g(Y,U)} / sqrt(g(Y,Y)).
inline double fundamental_tensor(const RandersMetric& f, const Vec& y, const Vec& u, const Vec& v) {
  const auto& rs = f.space();
  const double yy = rs.inner(y, y);
  if (!(yy > 0.0)) throw DegenerateFlagError("fundamental tensor undefined at Y = 0");
  const double ny = std::sqrt(yy);
  const Vec& x = f.x();
  const double xu = rs.inner(x, u), xv = rs.inner(x, v), xy = rs.inner(x, y);
  const double yu = rs.inner(y, u), yv = rs.inner(y, v), uv = rs.inner(u, v);
  // Grouped so that swapping u and v gives the bit-identical result.
  return uv + xu * xv - xy * (yu * yv) / (yy * ny) + ((xu * yv + xv * yu) + xy * uv) / ny;
}

// Matrix [g_Y(e_i, e_j)] over the m-basis.
inline Mat fundamental_tensor_matrix(const RandersMetric& f, const Vec& y) {
  const int q = f.space().m_dim();
  Mat out(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      out(i, j) = fundamental_tensor(f, y, f.space().m_basis(i), f.space().m_basis(j));
  return out;
}

namespace detail {

// Mixed central difference of 1/2 F^2 at steps (hs, ht). F^2 is evaluated in
// extended precision: the four-point difference cancels about 2 log10(1/h)
// digits, which at h = 1e-5 leaves only ~1e-6 in double.
inline double mixed_difference(const RandersMetric& f, const Vec& y, const Vec& u, const Vec& v,
                               double hs, double ht) {
  using ld = long double;
  const Mat& g = f.space().gram();
  const Vec& x = f.x();
  const auto q = y.size();
  std::vector<ld> w(static_cast<std::size_t>(q));
  auto f2 = [&](ld s, ld t) {
    for (Eigen::Index i = 0; i < q; ++i)
      w[static_cast<std::size_t>(i)] = ld(y(i)) + s * ld(u(i)) + t * ld(v(i));
    ld ww = 0, xw = 0;
    for (Eigen::Index i = 0; i < q; ++i) {
      ld gw = 0;
      for (Eigen::Index j = 0; j < q; ++j) gw += ld(g(i, j)) * w[static_cast<std::size_t>(j)];
      ww += w[static_cast<std::size_t>(i)] * gw;
      xw += ld(x(i)) * gw;
    }
    const ld n = std::sqrt(ww) + xw;
    return n * n;
  };
  const ld d = f2(hs, ht) - f2(hs, -ht) - f2(-hs, ht) + f2(-hs, -ht);
  return static_cast<double>(d / (8.0L * ld(hs) * ld(ht)));
}

// Steps scaled so that the perturbation is `step` relative to |Y|.
inline std::pair<double, double> scaled_steps(const RandersMetric& f, const Vec& y, const Vec& u,
                                              const Vec& v, double step) {
  const auto& rs = f.space();
  const double ny = std::sqrt(rs.inner(y, y));
  const double nu = std::sqrt(rs.inner(u, u)), nv = std::sqrt(rs.inner(v, v));
  return {nu > 0.0 ? step * ny / nu : step, nv > 0.0 ? step * ny / nv : step};
}

inline void require_fd_input(const RandersMetric& f, const Vec& y, double step) {
  if (!(f.space().inner(y, y) > 0.0))
    throw DegenerateFlagError("fundamental tensor undefined at Y = 0");
  if (!(step > 0.0)) throw InputError("finite-difference step must be positive");
}

}  // namespace detail

// g_Y(U,V) = 1/2 d^2/ds dt F^2(Y + sU + tV) at s = t = 0, by central
// differences. `step` is relative to |Y|_g.
inline double fundamental_tensor_fd(const RandersMetric& f, const Vec& y, const Vec& u,
                                    const Vec& v, double step = 1e-5) {
  detail::require_fd_input(f, y, step);
  const auto [hs, ht] = detail::scaled_steps(f, y, u, v, step);
  return detail::mixed_difference(f, y, u, v, hs, ht);
}

struct FiniteDifferenceEstimate {
  double coarse = 0.0;        // step h
  double fine = 0.0;          // step h/2
  double extrapolated = 0.0;  // (4 fine - coarse) / 3
  double truncation_estimate = 0.0;
};

inline FiniteDifferenceEstimate fundamental_tensor_fd_richardson(const RandersMetric& f,
                                                                 const Vec& y, const Vec& u,
                                                                 const Vec& v,
                                                                 double step = 1e-5) {
  detail::require_fd_input(f, y, step);
  const auto [hs, ht] = detail::scaled_steps(f, y, u, v, step);
  FiniteDifferenceEstimate e;
  e.coarse = detail::mixed_difference(f, y, u, v, hs, ht);
  e.fine = detail::mixed_difference(f, y, u, v, 0.5 * hs, 0.5 * ht);
  e.extrapolated = (4.0 * e.fine - e.coarse) / 3.0;
  e.truncation_estimate = std::abs(e.fine - e.coarse) / 3.0;
  return e;
}

// Step used by flag_curvature_assembled (Richardson-extrapolated).
inline constexpr double kAssemblyStep = 1e-3;

inline void require_flag(const RandersMetric& f, const Flag& flag) {
  const auto& rs = f.space();
  require_size(flag.y, rs.m_dim(), "flagpole");
  require_size(flag.u, rs.m_dim(), "transverse edge");
  require_plane(rs.inner(flag.y, flag.y), rs.inner(flag.u, flag.u), rs.inner(flag.y, flag.u));
}

// Hypotheses of the closed form: naturally reductive space and X parallel.
struct ClosedFormHypotheses {
  bool naturally_reductive = false;
  double nr_residual = 0.0;
  bool drift_parallel = false;

  bool hold() const { return naturally_reductive && drift_parallel; }
};

inline ClosedFormHypotheses closed_form_hypotheses(const RandersMetric& f) {
  const auto nr = check_naturally_reductive(f.space());
  return {nr.holds, nr.max_residual, f.admissibility().parallel};
}

// Flag curvature of a Berwald-type invariant Randers metric on a naturally
// reductive space, K(P,Y) = A / (B - C).
//
// oracle_consistent: K = g_Y(alpha,U) / (g_Y(Y,Y) g_Y(U,U) - g_Y(Y,U)^2)
// with the closed-form g_Y and alpha = R(U,Y)Y.
// paper_literal: A, B, C and alpha evaluated exactly as printed, including
// the minus sign in front of the brace of B's second factor.
inline double flag_curvature_closed_form(const RandersMetric& f, const Flag& flag,
                                         AlphaVariant variant,
                                         Hypotheses mode = Hypotheses::enforce) {
  require_flag(f, flag);
  if (mode == Hypotheses::enforce) {
    const auto h = closed_form_hypotheses(f);
    if (!h.naturally_reductive)
      throw HypothesisError("closed-form flag curvature requires a naturally reductive space "
                            "(residual " + std::to_string(h.nr_residual) + ")");
    if (!h.drift_parallel)
      throw HypothesisError("closed-form flag curvature requires a parallel drift vector "
                            "(residual " + std::to_string(f.admissibility().parallel_residual) +
                            ")");
  }
  const auto& rs = f.space();
  const Vec& y = flag.y;
  const Vec& u = flag.u;
  const Vec a = alpha(rs, y, u, variant, Hypotheses::force);

  if (variant == AlphaVariant::oracle_consistent) {
    const double gyy = fundamental_tensor(f, y, y, y);
    const double guu = fundamental_tensor(f, y, u, u);
    const double gyu = fundamental_tensor(f, y, y, u);
    return fundamental_tensor(f, y, a, u) / (gyy * guu - gyu * gyu);
  }

  const Vec& x = f.x();
  const double yy = rs.inner(y, y), ny = std::sqrt(yy);
  const double xy = rs.inner(x, y), xu = rs.inner(x, u), xa = rs.inner(x, a);
  const double yu = rs.inner(y, u), ya = rs.inner(y, a), au = rs.inner(a, u);
  const double uu = rs.inner(u, u);
  const double A = au + xa * xu - xy * yu * ya / std::pow(yy, 1.5) +
                   (xa * yu + xy * au + xu * ya) / ny;
  const double B = (yy + xy * xy + 2.0 * xy * ny) *
                   (uu + xu * xu - (xy * yu * yu / yy + xy * uu + 2.0 * xu * yu) / ny);
  const double c_root = yu * (1.0 + xy / ny) + xu * (xy + ny);
  const double C = c_root * c_root;
  return A / (B - C);
}

// max |∇_{e_i} X| over the basis, from the Koszul table (h = 0 only).
inline double koszul_parallel_residual(const RandersMetric& f, const ConnectionTable& t) {
  const auto& rs = f.space();
  double worst = 0.0;
  for (int i = 0; i < rs.m_dim(); ++i)
    worst = std::max(worst, t.nabla(rs.m_basis(i), f.x()).cwiseAbs().maxCoeff());
  return worst;
}

// Flag curvature assembled from independent pieces: the Koszul curvature
// R(U,Y)Y and a Richardson-extrapolated finite-difference g_Y, combined as
//   g_Y(R(U,Y)Y, U) / (g_Y(Y,Y) g_Y(U,U) - g_Y(Y,U)^2).
// Valid when X is parallel (Berwald type); Lie group case only.
inline double flag_curvature_assembled(const RandersMetric& f, const ConnectionTable& t,
                                       const Flag& flag) {
  const auto& rs = f.space();
  if (rs.h_dim() != 0)
    throw UnsupportedError("assembled flag curvature requires h_dim = 0 (Koszul oracle scope)");
  require_flag(f, flag);
  const double residual = koszul_parallel_residual(f, t);
  if (residual > kDerivedTol)
    throw HypothesisError("assembled flag curvature requires a parallel drift vector "
                          "(Koszul residual " + std::to_string(residual) + ")");
  const Vec& y = flag.y;
  const Vec& u = flag.u;
  const Vec r = curvature_oracle(rs, t, u, y, y);
  auto gy = [&](const Vec& a, const Vec& b) {
    return fundamental_tensor_fd_richardson(f, y, a, b, kAssemblyStep).extrapolated;
  };
  const double gyy = gy(y, y), guu = gy(u, u), gyu = gy(y, u);
  return gy(r, u) / (gyy * guu - gyu * gyu);
}

inline double flag_curvature_assembled(const RandersMetric& f, const Flag& flag) {
  return flag_curvature_assembled(f, ConnectionTable::levi_civita(f.space()), flag);
}

// KNOWN INCORRECT. Flag curvature built on the curvature of the canonical
// connection of the second kind instead of the Levi-Civita connection,
//   K(P,Y) = 2|Y| / (2|Y| + g(X,Y)) * g([[Y,U]_h,Y],U) / (g(U,U)g(Y,Y) - g(U,Y)^2).
// Kept for comparison: it vanishes identically on every Lie group, which
// contradicts the nonzero curvature of e.g. the Heisenberg group.
inline double flag_curvature_second_kind(const RandersMetric& f, const Flag& flag) {
  require_flag(f, flag);
  const auto& rs = f.space();
  const auto& a = rs.algebra();
  const Vec& y = flag.y;
  const Vec& u = flag.u;
  const double yy = rs.inner(y, y), uu = rs.inner(u, u), yu = rs.inner(y, u);
  const Vec Y = rs.embed(y), U = rs.embed(u);
  const Vec top = a.bracket(rs.project(a.bracket(Y, U), Part::h), Y);
  const double k_plane = rs.inner(rs.m_coords(top), u) / (uu * yy - yu * yu);
  const double ny = std::sqrt(yy);
  return 2.0 * ny / (2.0 * ny + rs.inner(f.x(), y)) * k_plane;
}

struct Discrepancy {
  std::string lhs;
  std::string rhs;
  double abs = 0.0;
  double rel = 0.0;
};

inline Discrepancy make_discrepancy(std::string lhs, double a, std::string rhs, double b) {
  const double d = std::abs(a - b);
  const double scale = std::max(std::abs(a), std::abs(b));
  return {std::move(lhs), std::move(rhs), d, scale > 0.0 ? d / scale : 0.0};
}

struct ReportOptions {
  Hypotheses mode = Hypotheses::enforce;
  bool include_paper_literal = true;
};

struct CurvatureReport {
  Flag flag;
  double randers_norm = 0.0;
  double gy_yy = 0.0, gy_yu = 0.0, gy_uu = 0.0;
  // Closed form vs plain central differences (step 1e-5) on the three entries.
  double gy_fd_max_abs_diff = 0.0;
  double gy_fd_truncation_estimate = 0.0;

  std::optional<double> k_closed_form_consistent;
  std::optional<double> k_closed_form_literal;
  std::optional<double> k_assembled;
  double k_second_kind = 0.0;  // known incorrect
  std::optional<double> sectional_koszul;

  std::vector<Discrepancy> discrepancies;

  bool naturally_reductive = false;
  double nr_residual = 0.0;
  bool drift_norm_below_one = false;
  bool drift_h_invariant = false;
  bool drift_parallel = false;
  bool forced = false;
  std::vector<std::string> caveats;
};

// Every variant the hypotheses allow (all closed-form variants when forced),
// plus pairwise discrepancies in a fixed order. Deterministic.
inline CurvatureReport curvature_report(const RandersMetric& f, const Flag& flag,
                                        const ReportOptions& opt = {}) {
  require_flag(f, flag);
  const auto& rs = f.space();
  CurvatureReport r;
  r.flag = flag;
  r.randers_norm = randers_norm(f, flag.y);
  r.gy_yy = fundamental_tensor(f, flag.y, flag.y, flag.y);
  r.gy_yu = fundamental_tensor(f, flag.y, flag.y, flag.u);
  r.gy_uu = fundamental_tensor(f, flag.y, flag.u, flag.u);
  {
    const std::pair<const Vec*, const Vec*> pairs[] = {
        {&flag.y, &flag.y}, {&flag.y, &flag.u}, {&flag.u, &flag.u}};
    const double closed[] = {r.gy_yy, r.gy_yu, r.gy_uu};
    for (int i = 0; i < 3; ++i) {
      const auto e = fundamental_tensor_fd_richardson(f, flag.y, *pairs[i].first,
                                                      *pairs[i].second);
      r.gy_fd_max_abs_diff = std::max(r.gy_fd_max_abs_diff, std::abs(e.coarse - closed[i]));
      r.gy_fd_truncation_estimate = std::max(r.gy_fd_truncation_estimate, e.truncation_estimate);
    }
  }

  const auto hyp = closed_form_hypotheses(f);
  const auto& adm = f.admissibility();
  r.naturally_reductive = hyp.naturally_reductive;
  r.nr_residual = hyp.nr_residual;
  r.drift_norm_below_one = adm.norm_below_one;
  r.drift_h_invariant = adm.h_invariant;
  r.drift_parallel = adm.parallel;
  r.forced = opt.mode == Hypotheses::force;

  if (!hyp.naturally_reductive) {
    r.caveats.push_back("space is not naturally reductive: the closed form does not apply");
    r.caveats.push_back(
        "drift_parallel is evaluated with the naturally reductive criterion [U,X]_m = 0");
  }
  if (!hyp.drift_parallel)
    r.caveats.push_back("drift vector is not parallel: the metric is not of Berwald type");

  if (hyp.hold() || r.forced) {
    if (!hyp.hold()) r.caveats.push_back("closed form evaluated outside its hypotheses (forced)");
    r.k_closed_form_consistent =
        flag_curvature_closed_form(f, flag, AlphaVariant::oracle_consistent, Hypotheses::force);
    if (opt.include_paper_literal)
      r.k_closed_form_literal =
          flag_curvature_closed_form(f, flag, AlphaVariant::paper_literal, Hypotheses::force);
  }

  r.k_second_kind = flag_curvature_second_kind(f, flag);

  if (rs.h_dim() == 0) {
    const auto table = ConnectionTable::levi_civita(rs);
    r.sectional_koszul = sectional_oracle(rs, table, flag.y, flag.u);
    if (koszul_parallel_residual(f, table) <= kDerivedTol)
      r.k_assembled = flag_curvature_assembled(f, table, flag);
    else
      r.caveats.push_back("assembled curvature skipped: drift not parallel for the Koszul connection");
  }

  auto add = [&](const char* a, const std::optional<double>& va, const char* b,
                 const std::optional<double>& vb) {
    if (va && vb) r.discrepancies.push_back(make_discrepancy(a, *va, b, *vb));
  };
  add("closed_form_paper_literal", r.k_closed_form_literal, "closed_form_oracle_consistent",
      r.k_closed_form_consistent);
  add("closed_form_oracle_consistent", r.k_closed_form_consistent, "assembled", r.k_assembled);
  add("second_kind", r.k_second_kind, "assembled", r.k_assembled);
  add("second_kind", r.k_second_kind, "closed_form_oracle_consistent",
      r.k_closed_form_consistent);
  return r;
}

}  // namespace finsler
