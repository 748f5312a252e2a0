#include <gtest/gtest.h>

#include <cmath>

#include "vmplane/analysis.hpp"
#include "vmplane/constructions.hpp"

using namespace vmp;

TEST(SmoothedCone, SlopeOneIsFlat) {
  const auto c = build_smoothed_cone(1.0);
  EXPECT_EQ(c.rho, 0.0);
  EXPECT_EQ(c.profile.spec().kind(), CurvatureSpec::Kind::constant);
  EXPECT_THROW(build_smoothed_cone(0.0), InputError);
  EXPECT_THROW(build_smoothed_cone(1.5), InputError);
}

TEST(SmoothedCone, Invariants) {
  for (double s : {0.3, 0.5, 0.9}) {
    const auto c = build_smoothed_cone(s);
    const auto& p = c.profile;
    EXPECT_NEAR(c.achieved_slope, s, 1e-10) << s;
    EXPECT_TRUE(p.von_mangoldt());
    EXPECT_TRUE(p.curvature_nonnegative());
    EXPECT_NEAR(c.rho, ku_zero(c.u) + c.epsilon, 1e-12);
    EXPECT_EQ(p.curvature(c.rho + 1e-9), 0.0);
    EXPECT_LE(p.max_mp(c.rho, p.r_max()) - p.min_mp(c.rho, p.r_max()), 1e-8);
    // Sturm against K_0 >= G_{u,eps}
    for (double r = 0.5; r < p.r_max(); r *= 1.7) EXPECT_GE(p.m(r), ku0_m(r) * (1 - 1e-9)) << r;
  }
}

TEST(SmoothedCone, UnsmoothedFamilyGroundTruth) {
  const auto p = solve_jacobi(CurvatureSpec::ku_family(0), 30);
  for (double r = 0.25; r < 30; r *= 1.5) EXPECT_NEAR(p.m(r) / ku0_m(r), 1.0, 1e-10);
}

TEST(MprimeZero, CapAndTail) {
  const auto p = build_example_mprime_zero(3 * M_PI / 4);
  for (double r = 0.1; r < 3 * M_PI / 4; r += 0.2) EXPECT_NEAR(p.m(r), std::sin(r), 1e-10);
  EXPECT_NEAR(p.m(M_PI / 2), 1.0, 1e-10);
  EXPECT_NEAR(p.mp(M_PI / 2), 0.0, 1e-10);
  EXPECT_TRUE(p.von_mangoldt());
  EXPECT_GT(p.min_m(3 * M_PI / 4, p.r_max()), 0.25);
  EXPECT_FALSE(is_critical(p, M_PI / 2));
}

TEST(MprimeZero, NoDropClosesUp) {
  MprimeZeroOptions o;
  o.drop = {0.0, 0.5};
  try {
    build_example_mprime_zero(3 * M_PI / 4, o);
    FAIL() << "expected StarViolation";
  } catch (const StarViolation& e) {
    EXPECT_NEAR(e.first_zero(), M_PI, 1e-8);
  }
  EXPECT_THROW(build_example_mprime_zero(1.0), InputError);
}

TEST(MprimeZero, ShallowDropRejected) {
  MprimeZeroOptions o;
  o.drop = {2.0, 1.0};
  EXPECT_THROW(build_example_mprime_zero(3 * M_PI / 4, o), Error);
}

TEST(Disconnected, MarchAndSplice) {
  const auto d = build_example_disconnected_positive_mprime();
  EXPECT_GT(d.R, d.r_q);
  EXPECT_GT(d.partial_integral, M_PI);
  EXPECT_GT(d.profile.min_mp(0.0, d.profile.r_max()), 0.0);
  EXPECT_TRUE(d.profile.von_mangoldt());
  EXPECT_FALSE(is_critical(d.profile, d.r_q));
  EXPECT_TRUE(is_critical(d.profile, 0.99 * d.profile.r_max()));
  DisconnectedOptions bad;
  bad.s_base = 0.6;
  EXPECT_THROW(build_example_disconnected_positive_mprime(bad), InputError);
}
