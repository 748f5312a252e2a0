#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vmplane/constructions.hpp"
#include "vmplane/quadrature.hpp"
#include "planes.hpp"

using namespace vmp;

class Quadrature : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    flat_ = new PlaneProfile(solve_jacobi(CurvatureSpec::constant(0), 50));
    hyp_ = new PlaneProfile(solve_jacobi(CurvatureSpec::constant(-1), 20));
    ku0_ = new PlaneProfile(solve_jacobi(CurvatureSpec::ku_family(0), 200));
  }
  static void TearDownTestSuite() {
    delete flat_;
    delete hyp_;
    delete ku0_;
  }
  static PlaneProfile *flat_, *hyp_, *ku0_;
};
PlaneProfile* Quadrature::flat_ = nullptr;
PlaneProfile* Quadrature::hyp_ = nullptr;
PlaneProfile* Quadrature::ku0_ = nullptr;

TEST_F(Quadrature, FlatSingular) {
  for (double x : {0.5, 1.0, 10.0}) {
    const auto r = integrate_F(*flat_, x, x, {}, true);
    EXPECT_EQ(r.status, IntegralStatus::converged);
    EXPECT_NEAR(r.value, M_PI / 2, 1e-10);
  }
}

TEST_F(Quadrature, FlatFiniteUpperLimit) {
  // arccos(x/R) for c = x
  const auto r = integrate_F(*flat_, 1.0, 1.0, 3.0, true);
  EXPECT_NEAR(r.value, std::acos(1.0 / 3), 1e-10);
}

TEST_F(Quadrature, HyperbolicClosedForm) {
  for (double x : {0.5, 1.0, 2.0}) {
    const auto r = integrate_F(*hyp_, std::sinh(x), x, {}, true);
    EXPECT_NEAR(r.value, std::atan(1 / std::sinh(x)), 1e-9);
  }
}

TEST_F(Quadrature, SubstitutionMatchesFactorization) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0.2, 8.0);
  const QuadratureOptions fact{1e-8, SingularMethod::factorization};
  for (int i = 0; i < 50; ++i) {
    const PlaneProfile& p = (i % 2) ? *ku0_ : *hyp_;
    const double x = (i % 2) ? U(rng) : 0.25 * U(rng);
    const double hi = 2 * x;
    const auto a = integrate_F(p, p.m(x), x, hi, true);
    const auto b = integrate_F(p, p.m(x), x, hi, true, fact);
    EXPECT_NEAR(a.value, b.value, 2e-8) << x;
  }
}

TEST_F(Quadrature, MonotoneInC) {
  double prev = 0.0;
  for (double c = 0.1; c < 1.0; c += 0.1) {
    const auto r = integrate_F(*ku0_, c, 2.0, 10.0, false);
    EXPECT_GT(r.value, prev);
    prev = r.value;
  }
}

TEST_F(Quadrature, LogTailInverseSquare) {
  // m_0^-2 = 1/((r+1) ln^2(r+1)), so the integral from 1 is 1/ln 2.
  const auto r = integrate_inverse_square(*ku0_, 1.0);
  EXPECT_NEAR(r.value, 1 / std::log(2.0), 1e-9);
}

TEST_F(Quadrature, ConeTailAndWindowIndependence) {
  const auto c = build_smoothed_cone(0.5);
  const double x = 1.2 * c.rho;
  const auto a = integrate_F(c.profile, c.profile.m(x), x, {}, true);
  EXPECT_NEAR(a.value, M_PI, 1e-8);
  SmoothedConeOptions o;
  o.r_max = 4 * c.profile.r_max();
  const auto wide = build_smoothed_cone(0.5, o);
  const auto b = integrate_F(wide.profile, wide.profile.m(x), x, {}, true);
  EXPECT_NEAR(a.value, b.value, a.abs_error + b.abs_error + 1e-12);
}

TEST_F(Quadrature, ConvexTailBoundIsSound) {
  // K = -1 beyond the window: the bound-based tail must not move by more than its error.
  const auto k = CurvatureSpec::spliced(CurvatureSpec::constant(0), 3.0, {1, 1});
  const auto p1 = solve_jacobi(k, 6), p2 = solve_jacobi(k, 12);
  const auto a = integrate_F(p1, 2.0, 2.0, {}, true), b = integrate_F(p2, 2.0, 2.0, {}, true);
  EXPECT_NEAR(a.value, b.value, a.abs_error + b.abs_error);
}

TEST_F(Quadrature, Divergences) {
  const auto e = build_example_mprime_zero(3 * M_PI / 4);
  EXPECT_EQ(integrate_F(e, e.m(M_PI / 2), M_PI / 2, {}, true).status, IntegralStatus::divergent_tangency);
  const auto trapped = integrate_F(e, e.m(1.0), 1.0, {}, true);
  EXPECT_EQ(trapped.status, IntegralStatus::divergent_tail);
  EXPECT_TRUE(std::isinf(trapped.value));
  const auto para = solve_jacobi(test_planes::paraboloid_table(), 1000);
  EXPECT_EQ(integrate_inverse_square(para, 10.0).status, IntegralStatus::divergent_tail);
  EXPECT_FALSE(integrability(para).m_minus2_integrable);
}

TEST_F(Quadrature, WindowIsChecked) {
  EXPECT_THROW(integrate_F(*flat_, 1.0, 60.0, {}, false), DomainError);
  EXPECT_THROW(integrate_F(*flat_, -1.0, 1.0, {}, false), InputError);
}
