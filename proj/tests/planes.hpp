#pragma once

#include <cmath>
#include <vector>

#include "vmplane/curvature.hpp"

namespace vmp::test_planes {

// Paraboloid z = x^2 as a table plane: m = x, arclength r(x), K = 4 / (1 + 4x^2)^2.
// m ~ sqrt(r), so the integral of m^-2 diverges.
inline CurvatureSpec paraboloid_table(double x_max = 40.0, int n = 400) {
  std::vector<double> r, k;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double x = x_max * t * t;
    const double s = std::sqrt(1 + 4 * x * x);
    r.push_back(0.5 * x * s + 0.25 * std::asinh(2 * x));
    k.push_back(4 / ((1 + 4 * x * x) * (1 + 4 * x * x)));
  }
  return CurvatureSpec::table(r, k, Extrapolation::inverse_square);
}

inline double paraboloid_r(double x) { return 0.5 * x * std::sqrt(1 + 4 * x * x) + 0.25 * std::asinh(2 * x); }

}  // namespace vmp::test_planes
