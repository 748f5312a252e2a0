#include <gtest/gtest.h>

#include <cmath>

#include "vmplane/numerics/dormand_prince.hpp"
#include "vmplane/numerics/gauss_kronrod.hpp"
#include "vmplane/numerics/monotone_cubic.hpp"
#include "vmplane/numerics/roots.hpp"

namespace num = vmp::num;

TEST(Brent, FindsCubicRoot) {
  const double r = num::brent([](double x) { return x * x * x - 2; }, 0.0, 2.0);
  EXPECT_NEAR(r, std::cbrt(2.0), 1e-13);
}

TEST(Brent, RejectsUnbracketed) {
  EXPECT_THROW(num::brent([](double x) { return x * x + 1; }, -1.0, 1.0), std::invalid_argument);
}

TEST(BisectPredicate, BracketsSwitch) {
  const auto br = num::bisect_predicate([](double x) { return x < 0.3; }, 0.0, 1.0, 1e-12);
  EXPECT_LE(br.first, 0.3);
  EXPECT_GE(br.second, 0.3);
  EXPECT_LT(br.second - br.first, 1e-11);
}

TEST(GoldenMax, FindsPeak) {
  const auto m = num::golden_max([](double x) { return -(x - 0.7) * (x - 0.7); }, 0.0, 2.0, 1e-10);
  EXPECT_NEAR(m.first, 0.7, 1e-8);
}

TEST(GaussKronrod, SmoothIntegral) {
  const auto q = num::integrate([](double x) { return std::exp(-x * x); }, 0.0, 3.0, 1e-13);
  EXPECT_TRUE(q.converged);
  EXPECT_NEAR(q.value, 0.5 * std::sqrt(M_PI) * std::erf(3.0), 1e-13);
}

TEST(GaussKronrod, EndpointSingularity) {
  // integral of 1/sqrt(x) over [0, 1] = 2
  const auto q = num::integrate([](double x) { return 1 / std::sqrt(x); }, 0.0, 1.0, 1e-10, 0.0, 4000);
  EXPECT_NEAR(q.value, 2.0, 1e-8);
}

TEST(GaussKronrod, FlagsNonfinite) {
  const auto q = num::integrate([](double x) { return x < 0.5 ? 1.0 : NAN; }, 0.0, 1.0, 1e-10);
  EXPECT_TRUE(q.nonfinite);
}

TEST(DormandPrince, HarmonicOscillator) {
  num::Vec<2> y{0.0, 1.0};
  num::OdeOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  const auto st = num::dopri5<2>([](double, const num::Vec<2>& s) { return num::Vec<2>{s[1], -s[0]}; }, 0.0, y, 10.0, o,
                                 [](const num::OdeStep<2>&) { return true; });
  EXPECT_EQ(st, num::OdeStatus::reached);
  EXPECT_NEAR(y[0], std::sin(10.0), 1e-10);
  EXPECT_NEAR(y[1], std::cos(10.0), 1e-10);
}

TEST(DormandPrince, ObserverStopsAndDenseOutput) {
  num::Vec<1> y{1.0};
  double t_end = 0.0, crossing = 0.0;
  num::OdeOptions o;
  auto obs = [&](const num::OdeStep<1>& s) {
    if (s.y1[0] < 0.5) {
      crossing = num::brent([&](double t) { return num::hermite3(s, t)[0] - 0.5; }, s.t0, s.t1);
      return false;
    }
    return true;
  };
  const auto st = num::dopri5<1>([](double, const num::Vec<1>& s) { return num::Vec<1>{-s[0]}; }, 0.0, y, 5.0, o, obs,
                                 &t_end);
  EXPECT_EQ(st, num::OdeStatus::stopped);
  EXPECT_NEAR(crossing, std::log(2.0), 1e-8);
}

TEST(MonotoneCubic, PreservesMonotoneData) {
  num::MonotoneCubic mc({0, 1, 2, 3, 4}, {5, 4, 4, 1, 0});
  double prev = 10, v, s;
  for (int i = 0; i <= 400; ++i) {
    mc.eval(0.01 * i, v, s);
    EXPECT_LE(v, prev + 1e-14);
    EXPECT_LE(s, 1e-14);
    prev = v;
  }
  mc.eval(2.0, v, s);
  EXPECT_DOUBLE_EQ(v, 4.0);
}
