#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace finsler {

// One structure constant c^k_{ij} of [e_i, e_j] = sum_k c^k_{ij} e_k.
// Indices are 0-based.
struct StructureConstant {
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;
};

// Finite-dimensional real Lie algebra given by structure constants over a
// labeled basis. The table is stored densely so that corrupted inputs can be
// represented and reported by validate_algebra.
class LieAlgebra {
 public:
  // Builds from entries with i < j; the (j, i) entries are filled by
  // antisymmetry. Repeated (i, j, k) triples are rejected.
  static LieAlgebra from_brackets(std::string name, std::vector<std::string> labels,
                                  std::span<const StructureConstant> entries) {
    LieAlgebra a(std::move(name), std::move(labels));
    const int n = a.dim();
    std::vector<bool> seen(static_cast<std::size_t>(n) * n * n, false);
    for (const auto& e : entries) {
      if (e.i < 0 || e.j < 0 || e.k < 0 || e.i >= n || e.j >= n || e.k >= n)
        throw InputError("structure constant index out of range (" + a.triple(e) + ")");
      if (e.i >= e.j)
        throw InputError("structure constant requires i < j (" + a.triple(e) + ")");
      auto slot = a.index(e.i, e.j, e.k);
      if (seen[slot]) throw InputError("duplicate structure constant " + a.triple(e));
      seen[slot] = true;
      a.table_[slot] = e.c;
      a.table_[a.index(e.j, e.i, e.k)] = -e.c;
    }
    return a;
  }

  // Builds from a full dense table c[(i*n + j)*n + k]; no symmetry is imposed.
  static LieAlgebra from_table(std::string name, std::vector<std::string> labels,
                               std::vector<double> table) {
    LieAlgebra a(std::move(name), std::move(labels));
    const auto n = static_cast<std::size_t>(a.dim());
    if (table.size() != n * n * n) throw InputError("structure table has wrong size");
    a.table_ = std::move(table);
    return a;
  }

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  double c(int i, int j, int k) const { return table_[index(i, j, k)]; }

  // [u, v] = sum_{i,j,k} u_i v_j c^k_{ij} e_k.
  Vec bracket(const Vec& u, const Vec& v) const {
    require_size(u, dim(), "bracket lhs");
    require_size(v, dim(), "bracket rhs");
    const int n = dim();
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (u(i) == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double w = u(i) * v(j);
        if (w == 0.0) continue;
        for (int k = 0; k < n; ++k) out(k) += w * c(i, j, k);
      }
    }
    return out;
  }

  Vec basis(int i) const { return unit_vector(dim(), i); }

  // Nonzero constants with i < j, in (i, j, k) order.
  std::vector<StructureConstant> upper_entries() const {
    std::vector<StructureConstant> out;
    const int n = dim();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (c(i, j, k) != 0.0) out.push_back({i, j, k, c(i, j, k)});
    return out;
  }

  bool operator==(const LieAlgebra&) const = default;

 private:
  LieAlgebra(std::string name, std::vector<std::string> labels)
      : name_(std::move(name)), labels_(std::move(labels)) {
    if (labels_.empty()) throw InputError("Lie algebra must have dimension >= 1");
    const auto n = labels_.size();
    table_.assign(n * n * n, 0.0);
  }

  std::size_t index(int i, int j, int k) const {
    const auto n = static_cast<std::size_t>(dim());
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(k);
  }

  std::string triple(const StructureConstant& e) const {
    return "(" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "," +
           std::to_string(e.k + 1) + ")";
  }

  std::string name_;
  std::vector<std::string> labels_;
  std::vector<double> table_;
};

struct AlgebraViolation {
  enum class Kind { antisymmetry, jacobi };
  Kind kind;
  int i, j, k;  // 0-based; for jacobi, k is the output component
  double residual;
  int l = -1;  // jacobi: third basis index
};

// Lists every antisymmetry violation c^k_{ij} + c^k_{ji} != 0 (reported once
// per unordered pair, i <= j) and every Jacobi violation on basis triples
// i < j < l, component k. Tolerance kStructuralTol.
inline std::vector<AlgebraViolation> validate_algebra(const LieAlgebra& a) {
  std::vector<AlgebraViolation> out;
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double r = a.c(i, j, k) + a.c(j, i, k);
        if (std::abs(r) > kStructuralTol)
          out.push_back({AlgebraViolation::Kind::antisymmetry, i, j, k, std::abs(r)});
      }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = j + 1; l < n; ++l) {
        const Vec ei = a.basis(i), ej = a.basis(j), el = a.basis(l);
        const Vec cyc = a.bracket(a.bracket(ei, ej), el) + a.bracket(a.bracket(ej, el), ei) +
                        a.bracket(a.bracket(el, ei), ej);
        for (int k = 0; k < n; ++k)
          if (std::abs(cyc(k)) > kStructuralTol)
            out.push_back({AlgebraViolation::Kind::jacobi, i, j, k, std::abs(cyc(k)), l});
      }
  return out;
}

inline std::string describe(const AlgebraViolation& v) {
  auto idx = [](int x) { return std::to_string(x + 1); };
  if (v.kind == AlgebraViolation::Kind::antisymmetry)
    return "antisymmetry violated at (" + idx(v.i) + "," + idx(v.j) + "," + idx(v.k) +
           "), residual " + std::to_string(v.residual);
  return "Jacobi identity violated for (" + idx(v.i) + "," + idx(v.j) + "," + idx(v.l) +
         ") component " + idx(v.k) + ", residual " + std::to_string(v.residual);
}

enum class Part { h, m };

// Every structural problem with (algebra, h_dim, gram) as readable text.
// Empty means the triple defines a valid reductive space.
inline std::vector<std::string> space_diagnostics(const LieAlgebra& a, int h_dim,
                                                  const Mat& gram) {
  std::vector<std::string> out;
  for (const auto& v : validate_algebra(a)) out.push_back(describe(v));
  const int n = a.dim();
  if (h_dim < 0 || h_dim >= n) {
    out.push_back("h_dim must satisfy 0 <= h_dim < dim (m must be nonzero)");
    return out;
  }
  const int q = n - h_dim;
  if (gram.rows() != q || gram.cols() != q) {
    out.push_back("gram must be " + std::to_string(q) + "x" + std::to_string(q));
    return out;
  }
  if (!gram.allFinite()) {
    out.push_back("gram has non-finite entries");
    return out;
  }
  const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
  if (asym > kStructuralTol) out.push_back("gram is not symmetric (max asymmetry " +
                                           std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (gram + gram.transpose()));
  if (eig.eigenvalues().minCoeff() <= 0.0)
    out.push_back("gram is not positive definite (smallest eigenvalue " +
                  std::to_string(eig.eigenvalues().minCoeff()) + ")");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool ih = i < h_dim, jh = j < h_dim;
      if (!ih && !jh) continue;
      for (int k = 0; k < n; ++k) {
        const double c = a.c(i, j, k);
        if (std::abs(c) <= kStructuralTol) continue;
        if (ih && jh && k >= h_dim)
          out.push_back("h is not a subalgebra: [e" + std::to_string(i + 1) + ",e" +
                        std::to_string(j + 1) + "] has m component " + std::to_string(k + 1));
        if (ih != jh && k < h_dim)
          out.push_back("not reductive: [e" + std::to_string(i + 1) + ",e" +
                        std::to_string(j + 1) + "] has h component " + std::to_string(k + 1));
      }
    }
  return out;
}

// Lie algebra with an adapted splitting g = h + m (first h_dim basis vectors
// span h) and an inner product on m given by its Gram matrix.
//
// Two coordinate systems appear throughout: g-vectors of length dim() and
// m-vectors of length m_dim() holding coordinates on e_{h_dim+1..dim}.
class ReductiveSpace {
 public:
  static ReductiveSpace create(LieAlgebra algebra, int h_dim, Mat gram) {
    auto diag = space_diagnostics(algebra, h_dim, gram);
    if (!diag.empty()) {
      std::string msg = "invalid reductive space '" + algebra.name() + "':";
      for (const auto& d : diag) msg += "\n  " + d;
      throw InputError(msg);
    }
    return ReductiveSpace(std::move(algebra), h_dim, std::move(gram));
  }

  const LieAlgebra& algebra() const { return algebra_; }
  int dim() const { return algebra_.dim(); }
  int h_dim() const { return h_dim_; }
  int m_dim() const { return dim() - h_dim_; }
  const Mat& gram() const { return gram_; }

  Vec embed(const Vec& m) const {
    require_size(m, m_dim(), "m-vector");
    Vec v = Vec::Zero(dim());
    v.tail(m_dim()) = m;
    return v;
  }

  // m-coordinates of a g-vector.
  Vec m_coords(const Vec& v) const {
    require_size(v, dim(), "g-vector");
    return v.tail(m_dim());
  }

  // Coordinate projection onto h or m along the adapted basis.
  Vec project(const Vec& v, Part part) const {
    require_size(v, dim(), "g-vector");
    Vec out = v;
    if (part == Part::h)
      out.tail(m_dim()).setZero();
    else
      out.head(h_dim_).setZero();
    return out;
  }

  double inner(const Vec& a, const Vec& b) const {
    require_size(a, m_dim(), "m-vector");
    require_size(b, m_dim(), "m-vector");
    // Summed over i <= j so that inner(a, b) and inner(b, a) agree bitwise.
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      s += gram_(i, i) * (a(i) * b(i));
      for (Eigen::Index j = i + 1; j < a.size(); ++j)
        s += 0.5 * (gram_(i, j) + gram_(j, i)) * (a(i) * b(j) + a(j) * b(i));
    }
    return s;
  }

  // [u, v] for m-vectors, as a g-vector.
  Vec bracket_mm(const Vec& u, const Vec& v) const {
    return algebra_.bracket(embed(u), embed(v));
  }

  Vec m_basis(int i) const { return unit_vector(m_dim(), i); }

  bool operator==(const ReductiveSpace&) const = default;

 private:
  ReductiveSpace(LieAlgebra algebra, int h_dim, Mat gram)
      : algebra_(std::move(algebra)), h_dim_(h_dim), gram_(std::move(gram)) {}

  LieAlgebra algebra_;
  int h_dim_;
  Mat gram_;
};

struct NaturalReductivity {
  bool holds = false;
  double max_residual = 0.0;
};

// B(X,[Z,Y]_m) + B([Z,X]_m,Y) over all ordered basis triples of m.
inline NaturalReductivity check_naturally_reductive(const ReductiveSpace& rs) {
  const int q = rs.m_dim();
  std::vector<Vec> br(static_cast<std::size_t>(q) * q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      br[static_cast<std::size_t>(a) * q + b] =
          rs.m_coords(rs.bracket_mm(rs.m_basis(a), rs.m_basis(b)));
  auto m_br = [&](int a, int b) -> const Vec& { return br[static_cast<std::size_t>(a) * q + b]; };

  double worst = 0.0;
  for (int x = 0; x < q; ++x)
    for (int y = 0; y < q; ++y)
      for (int z = 0; z < q; ++z) {
        const double r = rs.inner(rs.m_basis(x), m_br(z, y)) + rs.inner(m_br(z, x), rs.m_basis(y));
        worst = std::max(worst, std::abs(r));
      }
  return {worst <= kDerivedTol, worst};
}

// Drift vector X in m-coordinates.
struct DriftVector {
  Vec coords;

  static DriftVector zero(int m_dim) { return {Vec::Zero(m_dim)}; }
  bool operator==(const DriftVector&) const = default;
};

struct DriftAdmissibility {
  bool norm_below_one = false;
  bool h_invariant = false;
  // [U, X]_m = 0 for all U in m; encodes X parallel on a naturally reductive space.
  bool parallel = false;
  double norm_sq = 0.0;
  double h_residual = 0.0;
  double parallel_residual = 0.0;

  bool all() const { return norm_below_one && h_invariant && parallel; }
};

inline DriftAdmissibility check_drift_admissible(const ReductiveSpace& rs, const DriftVector& x) {
  require_size(x.coords, rs.m_dim(), "drift vector");
  DriftAdmissibility r;
  r.norm_sq = rs.inner(x.coords, x.coords);
  r.norm_below_one = r.norm_sq < 1.0;
  const Vec xg = rs.embed(x.coords);
  const auto& a = rs.algebra();
  for (int i = 0; i < rs.h_dim(); ++i)
    r.h_residual = std::max(r.h_residual, a.bracket(a.basis(i), xg).cwiseAbs().maxCoeff());
  for (int i = 0; i < rs.m_dim(); ++i)
    r.parallel_residual = std::max(
        r.parallel_residual,
        rs.m_coords(a.bracket(rs.embed(rs.m_basis(i)), xg)).cwiseAbs().maxCoeff());
  r.h_invariant = r.h_residual <= kStructuralTol;
  r.parallel = r.parallel_residual <= kStructuralTol;
  return r;
}

// Orthonormal-ish spanning set (as matrix columns) of [g, span(cols)].
inline Mat bracket_span(const LieAlgebra& a, const Mat& cols) {
  const int n = a.dim();
  Mat gens(n, n * cols.cols());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < cols.cols(); ++j)
      gens.col(i * cols.cols() + j) = a.bracket(a.basis(i), cols.col(j));
  if (gens.cols() == 0) return Mat(n, 0);
  Eigen::JacobiSVD<Mat> svd(gens, Eigen::ComputeThinU);
  const Eigen::Index r = numerical_rank(gens);
  return svd.matrixU().leftCols(r);
}

// Nilpotency class k (lower central series reaches 0 after k steps), or
// nullopt when the series stabilizes at a nonzero subspace.
inline std::optional<int> nilpotency_class(const LieAlgebra& a) {
  Mat current = Mat::Identity(a.dim(), a.dim());
  for (int step = 1;; ++step) {
    Mat next = bracket_span(a, current);
    if (next.cols() == 0) return step;
    if (next.cols() >= current.cols()) return std::nullopt;
    current = std::move(next);
  }
}

inline bool is_abelian(const LieAlgebra& a) { return nilpotency_class(a) == 1; }

}  // namespace finsler
