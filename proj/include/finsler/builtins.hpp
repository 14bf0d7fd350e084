#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "lie_core.hpp"
#include "randers.hpp"
#include "riemann.hpp"

namespace finsler {

struct Builtin {
  ReductiveSpace space;
  DriftVector drift;
};

namespace builtins {

inline std::vector<std::string> labels(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back("e" + std::to_string(i));
  return out;
}

// [e1,e2] = e3, orthonormal.
inline Builtin heisenberg3() {
  const StructureConstant c[] = {{0, 1, 2, 1.0}};
  auto space = ReductiveSpace::create(LieAlgebra::from_brackets("heisenberg3", labels(3), c), 0,
                                      Mat::Identity(3, 3));
  return {std::move(space), DriftVector::zero(3)};
}

// [e1,e2] = e3 cyclic, orthonormal (ad-invariant).
inline Builtin su2() {
  const StructureConstant c[] = {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {0, 2, 1, -1.0}};
  auto space = ReductiveSpace::create(LieAlgebra::from_brackets("su2", labels(3), c), 0,
                                      Mat::Identity(3, 3));
  return {std::move(space), DriftVector::zero(3)};
}

// su(2) + R with the center spanned by e4; X = t e4.
inline Builtin su2_x_r(double t) {
  if (!(t >= 0.0 && t < 1.0)) throw InputError("su2_x_r requires 0 <= t < 1");
  const StructureConstant c[] = {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {0, 2, 1, -1.0}};
  auto space = ReductiveSpace::create(LieAlgebra::from_brackets("su2_x_r", labels(4), c), 0,
                                      Mat::Identity(4, 4));
  Vec x = Vec::Zero(4);
  x(3) = t;
  return {std::move(space), DriftVector{x}};
}

inline Builtin abelian(int n) {
  if (n < 1) throw InputError("abelian(n) requires n >= 1");
  auto space = ReductiveSpace::create(
      LieAlgebra::from_brackets("abelian" + std::to_string(n), labels(n), {}), 0,
      Mat::Identity(n, n));
  return {std::move(space), DriftVector::zero(n)};
}

// u(2) = su(2) + R with h = span{e1} rotating m = span{e2, e3, e4}:
// [e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e2, e4 central. Identity gram on m
// is the restriction of an ad-invariant form, so the space is naturally
// reductive with [m,m] contained in h + center.
inline Builtin toy_gh4() {
  const StructureConstant c[] = {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {0, 2, 1, -1.0}};
  auto space = ReductiveSpace::create(LieAlgebra::from_brackets("toy_gh4", labels(4), c), 1,
                                      Mat::Identity(3, 3));
  return {std::move(space), DriftVector::zero(3)};
}

// Names: heisenberg3, su2, su2_x_r:<t>, abelian:<n> (or abelian<n>), toy_gh4.
inline Builtin build(std::string_view name) {
  auto number = [&](std::string_view s, auto& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    if (ec != std::errc() || p != end || s.empty())
      throw InputError("bad builtin parameter in '" + std::string(name) + "'");
  };
  if (name == "heisenberg3") return heisenberg3();
  if (name == "su2") return su2();
  if (name == "toy_gh4") return toy_gh4();
  if (name.starts_with("su2_x_r:")) {
    double t = 0.0;
    number(name.substr(8), t);
    return su2_x_r(t);
  }
  if (name.starts_with("abelian")) {
    auto rest = name.substr(7);
    if (rest.starts_with(":")) rest.remove_prefix(1);
    int n = 0;
    number(rest, n);
    return abelian(n);
  }
  throw InputError("unknown builtin '" + std::string(name) + "'");
}

}  // namespace builtins

// Deterministic uniform doubles in [-1, 1) from mt19937_64's exact output
// sequence, independent of the standard library's distributions.
class FlagSampler {
 public:
  explicit FlagSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    const std::uint64_t bits = engine_() >> 11;
    return 2.0 * (static_cast<double>(bits) * 0x1.0p-53) - 1.0;
  }

  Vec vector(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform();
    return v;
  }

  // Uniform random flag, resampled until well conditioned (Gram determinant
  // at least 1e-3 of g(Y,Y) g(U,U)).
  Flag flag(const ReductiveSpace& rs) {
    for (;;) {
      Flag f{vector(rs.m_dim()), vector(rs.m_dim())};
      const double yy = rs.inner(f.y, f.y), uu = rs.inner(f.u, f.u), yu = rs.inner(f.y, f.u);
      if (yy > 1e-6 && yy * uu - yu * yu > 1e-3 * yy * uu) return f;
    }
  }

 private:
  std::mt19937_64 engine_;
};

struct LabeledFlag {
  std::string label;
  Flag flag;
};

// Basis-pair flags (e_i, e_j), i < j over m, in lexicographic order.
inline std::vector<LabeledFlag> basis_flags(const ReductiveSpace& rs) {
  std::vector<LabeledFlag> out;
  const auto& labels = rs.algebra().labels();
  for (int i = 0; i < rs.m_dim(); ++i)
    for (int j = i + 1; j < rs.m_dim(); ++j)
      out.push_back({"(" + labels[rs.h_dim() + i] + "," + labels[rs.h_dim() + j] + ")",
                     {rs.m_basis(i), rs.m_basis(j)}});
  return out;
}

inline std::vector<LabeledFlag> random_flags(const ReductiveSpace& rs, int count,
                                             std::uint64_t seed) {
  std::vector<LabeledFlag> out;
  FlagSampler sampler(seed);
  for (int i = 0; i < count; ++i) out.push_back({"random#" + std::to_string(i), sampler.flag(rs)});
  return out;
}

struct CounterexampleSample {
  LabeledFlag flag;
  double k_second_kind = 0.0;
  double k_sectional = 0.0;
};

inline constexpr double kSignTol = 1e-9;

struct CounterexampleReport {
  std::string algebra;
  std::uint64_t seed = 0;
  int sample_size = 0;
  std::optional<int> nilpotency;
  bool abelian = false;
  std::vector<CounterexampleSample> samples;
  // Some flag has the second-kind value 0 while the true curvature is nonzero.
  bool mismatch_demonstrated = false;
  int positive = 0, negative = 0, zero = 0;
  // Nilpotent non-abelian algebras must show both signs.
  bool sign_mix_required = false;
  bool sign_mix_present = false;
};

// Evaluates the second-kind formula (X = 0) and the Koszul sectional
// curvature over all basis-pair flags plus `sample_size` seeded random flags.
inline CounterexampleReport run_counterexample(const ReductiveSpace& rs, int sample_size,
                                               std::uint64_t seed) {
  if (rs.h_dim() != 0)
    throw UnsupportedError("counterexample runner requires h_dim = 0 (Lie group case)");
  if (sample_size < 0) throw InputError("sample size must be >= 0");
  const auto metric = RandersMetric::riemannian(rs);
  const auto table = ConnectionTable::levi_civita(rs);

  CounterexampleReport rep;
  rep.algebra = rs.algebra().name();
  rep.seed = seed;
  rep.sample_size = sample_size;
  rep.nilpotency = nilpotency_class(rs.algebra());
  rep.abelian = rep.nilpotency == 1;

  auto flags = basis_flags(rs);
  for (auto& f : random_flags(rs, sample_size, seed)) flags.push_back(std::move(f));
  for (auto& lf : flags) {
    CounterexampleSample s;
    s.k_second_kind = flag_curvature_second_kind(metric, lf.flag);
    s.k_sectional = sectional_oracle(rs, table, lf.flag.y, lf.flag.u);
    s.flag = std::move(lf);
    if (s.k_second_kind == 0.0 && std::abs(s.k_sectional) > kSignTol)
      rep.mismatch_demonstrated = true;
    if (s.k_sectional > kSignTol)
      ++rep.positive;
    else if (s.k_sectional < -kSignTol)
      ++rep.negative;
    else
      ++rep.zero;
    rep.samples.push_back(std::move(s));
  }
  rep.sign_mix_required = rep.nilpotency.has_value() && !rep.abelian;
  rep.sign_mix_present = rep.positive > 0 && rep.negative > 0;
  return rep;
}

}  // namespace finsler
