#include <gtest/gtest.h>

#include <cmath>

#include "vmplane/curvature.hpp"

using namespace vmp;

TEST(Curvature, BuiltinValues) {
  EXPECT_EQ(CurvatureSpec::constant(-1)(3.0), -1.0);
  EXPECT_DOUBLE_EQ(CurvatureSpec::ku_family(0)(1.0), 1.0 / 16);
  EXPECT_DOUBLE_EQ(CurvatureSpec::ku_family(0.01)(0.0), 0.24);
  EXPECT_NEAR(ku_zero(0.01), 4.0, 1e-15);
}

TEST(Curvature, RejectsBadParameters) {
  EXPECT_THROW(CurvatureSpec::ku_family(0.3), InputError);
  EXPECT_THROW(CurvatureSpec::smoothed_ku(0.0, 0.1), InputError);
  EXPECT_THROW(CurvatureSpec::smoothed_ku(0.01, 5.0), InputError);
  EXPECT_THROW(CurvatureSpec::table({1, 2}, {0, 0}), InputError);
  EXPECT_THROW(CurvatureSpec::constant(NAN), InputError);
  EXPECT_THROW(CurvatureSpec::spliced(CurvatureSpec::constant(0), 1.0, {-1, 1}), InputError);
}

TEST(Curvature, SmoothedKuIsC2AndMonotone) {
  const double u = 1e-3, eps = 0.5;
  const auto k = CurvatureSpec::smoothed_ku(u, eps);
  const double z = ku_zero(u), lo = z - eps, hi = z + eps, h = 1e-6;
  // value and slope continuity at both joins
  EXPECT_NEAR(k(lo - h), k(lo + h), 1e-9);
  EXPECT_NEAR(k.derivative(lo - h), k.derivative(lo + h), 1e-8);
  EXPECT_NEAR(k(hi - h), 0.0, 1e-12);
  EXPECT_EQ(k(hi + 1), 0.0);
  for (double r = 0; r < hi + 1; r += 0.01) EXPECT_LE(k.derivative(r), 1e-15) << r;
  EXPECT_TRUE(check_von_mangoldt(k, 50, 0.05).is_vm);
  const auto cb = k.constant_beyond();
  ASSERT_TRUE(cb);
  EXPECT_DOUBLE_EQ(cb->first, hi);
}

TEST(Curvature, DerivativeMatchesFiniteDifference) {
  const auto k = CurvatureSpec::spliced(CurvatureSpec::smoothed_ku(1e-3, 0.5), 20.0, {1.0, 2.0});
  for (double r : {1.0, 15.0, 15.6, 20.5, 21.7}) {
    const double h = 1e-5, fd = (k(r + h) - k(r - h)) / (2 * h);
    EXPECT_NEAR(k.derivative(r), fd, 1e-7) << r;
  }
}

TEST(Curvature, SplicedDrop) {
  const auto k = CurvatureSpec::spliced(CurvatureSpec::constant(1), 2.0, {5, 0.5});
  EXPECT_EQ(k(1.9), 1.0);
  EXPECT_DOUBLE_EQ(k(2.25), 1.0 - 2.5);
  EXPECT_EQ(k(3.0), -4.0);
  const auto cb = k.constant_beyond();
  ASSERT_TRUE(cb);
  EXPECT_DOUBLE_EQ(cb->first, 2.5);
  EXPECT_DOUBLE_EQ(cb->second, -4.0);
  const auto bps = k.breakpoints(10);
  ASSERT_EQ(bps.size(), 2u);
  EXPECT_TRUE(check_von_mangoldt(k, 10, 0.01).is_vm);
}

TEST(Curvature, TableExtrapolation) {
  const auto k = CurvatureSpec::table({0, 1, 2}, {1, 0.5, 0.25}, Extrapolation::inverse_square);
  EXPECT_DOUBLE_EQ(k(4.0), 0.25 * 0.25);
  const auto c = CurvatureSpec::table({0, 1, 2}, {1, 0.5, 0.25}, Extrapolation::none);
  EXPECT_EQ(c.domain_end(), 2.0);
  EXPECT_THROW(eval_curvature(c, 3.0), DomainError);
}

TEST(VonMangoldt, DetectsIncrease) {
  const auto k = CurvatureSpec::table({0, 1}, {0, 1});
  const auto rep = check_von_mangoldt(k, 2, 0.1);
  EXPECT_FALSE(rep.is_vm);
  ASSERT_TRUE(rep.first_violation);
  EXPECT_NEAR(*rep.first_violation, 0.0, 1e-9);
}

TEST(VonMangoldt, DetectsBumpInsideCell) {
  // Narrow bump between coarse grid points.
  const auto k = CurvatureSpec::expression(
      [](double r) { return -r + 0.05 * std::exp(-1e4 * (r - 1.03) * (r - 1.03)); }, "bump");
  EXPECT_FALSE(check_von_mangoldt(k, 3, 0.1).is_vm);
  EXPECT_TRUE(check_von_mangoldt(CurvatureSpec::expression([](double r) { return -r; }), 3, 0.1).is_vm);
}
