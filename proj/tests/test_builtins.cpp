#include <gtest/gtest.h>

#include "finsler/builtins.hpp"

using namespace finsler;

TEST(Builtins, AllPassStructuralChecks) {
  for (const char* name : {"heisenberg3", "su2", "su2_x_r:0.5", "abelian:4", "abelian3", "toy_gh4"}) {
    SCOPED_TRACE(name);
    const auto b = builtins::build(name);
    EXPECT_TRUE(validate_algebra(b.space.algebra()).empty());
    EXPECT_TRUE(space_diagnostics(b.space.algebra(), b.space.h_dim(), b.space.gram()).empty());
    EXPECT_TRUE(check_drift_admissible(b.space, b.drift).norm_below_one);
    EXPECT_TRUE(check_drift_admissible(b.space, b.drift).h_invariant);
  }
}

TEST(Builtins, Shapes) {
  const auto h = builtins::heisenberg3();
  EXPECT_EQ(h.space.dim(), 3);
  EXPECT_EQ(h.space.h_dim(), 0);
  EXPECT_EQ(nilpotency_class(h.space.algebra()), 2);

  const auto s = builtins::su2_x_r(0.5);
  EXPECT_EQ(s.space.dim(), 4);
  EXPECT_TRUE(check_drift_admissible(s.space, s.drift).all());
  EXPECT_DOUBLE_EQ(s.drift.coords(3), 0.5);

  const auto t = builtins::toy_gh4();
  EXPECT_EQ(t.space.h_dim(), 1);
  EXPECT_EQ(t.space.m_dim(), 3);
  EXPECT_TRUE(check_naturally_reductive(t.space).holds);

  const auto a = builtins::abelian(4);
  EXPECT_TRUE(check_naturally_reductive(a.space).holds);
  for (const auto& lf : basis_flags(a.space))
    EXPECT_EQ(sectional_oracle(a.space, lf.flag.y, lf.flag.u), 0.0);
}

TEST(Builtins, ParameterErrors) {
  EXPECT_THROW(builtins::su2_x_r(1.0), InputError);
  EXPECT_THROW(builtins::su2_x_r(-0.1), InputError);
  EXPECT_THROW(builtins::abelian(0), InputError);
  EXPECT_THROW(builtins::build("su2_x_r:abc"), InputError);
  EXPECT_THROW(builtins::build("sl2"), InputError);
}

TEST(Sampler, DeterministicPerSeed) {
  FlagSampler a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, -1.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(a.uniform(), c.uniform());
}

TEST(Counterexample, Heisenberg) {
  const auto rep = run_counterexample(builtins::heisenberg3().space, 20, 1);
  EXPECT_TRUE(rep.mismatch_demonstrated);
  EXPECT_EQ(rep.samples.size(), 23u);
  bool has_neg = false, has_pos = false;
  for (const auto& s : rep.samples) {
    EXPECT_EQ(s.k_second_kind, 0.0);
    if (std::abs(s.k_sectional + 0.75) < 1e-12) has_neg = true;
    if (std::abs(s.k_sectional - 0.25) < 1e-12) has_pos = true;
  }
  EXPECT_TRUE(has_neg);
  EXPECT_TRUE(has_pos);
  EXPECT_GT(rep.positive, 0);
  EXPECT_GT(rep.negative, 0);
  EXPECT_TRUE(rep.sign_mix_required);
  EXPECT_TRUE(rep.sign_mix_present);
}

TEST(Counterexample, Su2AndAbelian) {
  const auto su2 = run_counterexample(builtins::su2().space, 0, 0);
  EXPECT_TRUE(su2.mismatch_demonstrated);
  for (const auto& s : su2.samples) EXPECT_NEAR(s.k_sectional, 0.25, 1e-15);
  EXPECT_FALSE(su2.sign_mix_required);

  const auto ab = run_counterexample(builtins::abelian(3).space, 10, 3);
  EXPECT_FALSE(ab.mismatch_demonstrated);
  EXPECT_EQ(ab.zero, static_cast<int>(ab.samples.size()));
}

TEST(Counterexample, RequiresLieGroup) {
  EXPECT_THROW(run_counterexample(builtins::toy_gh4().space, 0, 0), HypothesisError);
}
