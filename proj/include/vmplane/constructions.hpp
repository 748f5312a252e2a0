#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "vmplane/analysis.hpp"
#include "vmplane/curvature.hpp"
#include "vmplane/errors.hpp"
#include "vmplane/jacobi.hpp"
#include "vmplane/quadrature.hpp"

namespace vmp {

// m_0(r) = ln(r+1) sqrt(r+1) solves the Jacobi equation for K_0.
inline double ku0_m(double r) { return std::log1p(r) * std::sqrt(r + 1); }
inline double ku0_mp(double r) { return (2 + std::log1p(r)) / (2 * std::sqrt(r + 1)); }

struct SmoothedConeOptions {
  double slope_tol = 1e-10;
  double solve_tol = 1e-11;
  std::optional<double> r_max;  // default max(200, 3 rho)
  int max_iter = 60;
  int max_shrinks = 8;
};

struct SmoothedConeResult {
  PlaneProfile profile;
  double u = 0.25;
  double epsilon = 0.0;
  double rho = 0.0;
  double achieved_slope = 1.0;
  int iterations = 0;
};

inline double default_cone_epsilon(double u) { return std::min(0.1, ku_zero(u) / 10); }

namespace detail {

struct ConeTrial {
  double slope = 0.0;
  bool guard_ok = false;
};

// Terminal slope m'(z_u + eps), plus the Sturm guard m >= m_0, m' >= m_0' on [0, rho].
inline ConeTrial cone_trial(double u, double eps, double tol) {
  const auto spec = CurvatureSpec::smoothed_ku(u, eps);
  const double rho = ku_zero(u) + eps;
  ConeTrial t;
  const auto p = solve_jacobi(spec, rho, SolveOptions{tol, false});
  t.slope = p.nodes().back().mp;
  t.guard_ok = true;
  const double slack = 10 * tol;
  for (const auto& n : p.nodes()) {
    if (n.m < ku0_m(n.r) - slack * (1 + n.m) || n.mp < ku0_mp(n.r) - slack) {
      t.guard_ok = false;
      break;
    }
  }
  return t;
}

}  // namespace detail

inline SmoothedConeResult build_smoothed_cone(double s, const SmoothedConeOptions& opt = {}) {
  if (!(s > 0.0 && s <= 1.0)) throw InputError("cone slope must lie in (0, 1]");
  if (s == 1.0) {
    const double R = opt.r_max.value_or(200.0);
    return {solve_jacobi(CurvatureSpec::constant(0.0), R, opt.solve_tol), 0.25, 0.0, 0.0, 1.0, 0};
  }
  // The terminal slope increases from 0 (u -> 0) to 1 (u -> 1/4); bisect in log u.
  double eps_scale = 1.0;
  for (int shrink = 0; shrink <= opt.max_shrinks; ++shrink, eps_scale *= 0.5) {
    auto eps_of = [&](double u) { return eps_scale * default_cone_epsilon(u); };
    bool guard_failed = false;
    auto trial = [&](double u) {
      const auto t = detail::cone_trial(u, eps_of(u), opt.solve_tol);
      if (!t.guard_ok) guard_failed = true;
      return t.slope;
    };
    // u_hi with z_u = 1e-2 gives a nearly flat plane.
    double u_hi = 0.25 / (1.01 * 1.01), u_lo = u_hi;
    double s_hi = trial(u_hi), s_lo = s_hi;
    if (s_hi < s) throw ConstructionError("requested slope too close to 1", u_hi, 0.25);
    while (s_lo >= s && u_lo > 1e-16) {
      u_hi = u_lo;
      s_hi = s_lo;
      u_lo *= 0.1;
      s_lo = trial(u_lo);
    }
    if (s_lo >= s) throw ConstructionError("requested slope below the reachable range", u_lo, u_hi);
    double u = u_hi, slope = s_hi;
    int it = 0;
    for (; it < opt.max_iter && !guard_failed; ++it) {
      u = std::sqrt(u_lo * u_hi);
      slope = trial(u);
      if (std::abs(slope - s) <= opt.slope_tol) break;
      if (slope < s) u_lo = u;
      else u_hi = u;
    }
    if (guard_failed) continue;
    if (std::abs(slope - s) > opt.slope_tol)
      throw ConstructionError("slope tolerance not met in the iteration budget", u_lo, u_hi);
    const double eps = eps_of(u), rho = ku_zero(u) + eps;
    const double R = opt.r_max.value_or(std::max(200.0, 3 * rho));
    if (!(R > rho)) throw InputError("r_max must exceed the slope-lock radius");
    auto p = solve_jacobi(CurvatureSpec::smoothed_ku(u, eps), R, opt.solve_tol);
    if (!p.von_mangoldt()) continue;
    SmoothedConeResult out{std::move(p), u, eps, rho, 0.0, it};
    out.achieved_slope = out.profile.mp(rho);
    return out;
  }
  throw ConstructionError("Sturm guard or monotonicity failed for every smoothing width tried");
}

// ---------------------------------------------------------------------------------------------
// K = 1 on [0, a] (m = sin r there, so m'(pi/2) = 0), then a smooth non-increasing drop.

struct MprimeZeroOptions {
  DropParams drop{5.0, 0.5};
  double r_max = 12.0;
  double solve_tol = 1e-11;
  double min_tail_m = 1e-3;
};

inline PlaneProfile build_example_mprime_zero(double a, const MprimeZeroOptions& opt = {}) {
  if (!(a > kPi / 2 && a < kPi)) throw InputError("a must lie in (pi/2, pi)");
  if (!(opt.r_max > a + opt.drop.width)) throw InputError("r_max must exceed a + drop width");
  const auto spec = CurvatureSpec::spliced(CurvatureSpec::constant(1.0), a, opt.drop);
  auto p = solve_jacobi(spec, opt.r_max, opt.solve_tol);
  const double tail_min = p.min_m(a, opt.r_max);
  if (!(tail_min >= opt.min_tail_m) || !(p.nodes().back().mp > 0))
    throw ConstructionError("drop does not keep m bounded away from 0 on the tail", tail_min, p.nodes().back().mp);
  return p;
}

// ---------------------------------------------------------------------------------------------
// Start from a smoothed cone of slope < 1/2, pick a non-critical r_q, march R until the partial
// turn integral from r_q exceeds pi, then splice a negative-curvature drop after R.

struct DisconnectedOptions {
  double s_base = 0.3;
  std::optional<double> r_q;  // default: first of 1.05^k R_m(base) with T - pi >= margin
  DropParams drop{1.0, 1.0};
  double margin = 1e-2;  // required T - pi at r_q on the base
  double tail_length = 20.0;
  double max_window = 1e8;
  double solve_tol = 1e-11;
  double quad_tol = 1e-9;
};

struct DisconnectedResult {
  PlaneProfile profile;
  SmoothedConeResult base;
  double r_q = 0.0;
  double R = 0.0;
  double partial_integral = 0.0;
  double base_T = 0.0;
};

inline DisconnectedResult build_example_disconnected_positive_mprime(const DisconnectedOptions& opt = {}) {
  if (!(opt.s_base > 0 && opt.s_base < 0.5)) throw InputError("s_base must lie in (0, 1/2)");
  auto base = build_smoothed_cone(opt.s_base);
  const auto& bp = base.profile;
  const QuadratureOptions q{opt.quad_tol, SingularMethod::substitution};
  auto T_at = [&](double r) { return integrate_F(bp, bp.m(r), r, {}, true, q); };

  double r_q = 0.0;
  IntegralResult T;
  if (opt.r_q) {
    r_q = *opt.r_q;
    if (!(r_q > 0 && r_q < bp.r_max())) throw InputError("r_q outside the base window");
    T = T_at(r_q);
    if (T.finite() && T.value - T.abs_error <= kPi + opt.margin)
      throw ConstructionError("r_q is critical on the base plane", r_q, T.value);
  } else {
    AnalysisOptions ao;
    ao.tol = opt.quad_tol;
    const auto Rm = critical_ball_radius(bp, ao);
    if (Rm.kind != RadiusResult::Kind::finite) throw ConstructionError("base plane has no non-critical radius");
    for (r_q = Rm.hi * 1.05; r_q < bp.r_max(); r_q *= 1.05) {
      T = T_at(r_q);
      if (!T.finite() || T.value - T.abs_error > kPi + opt.margin) break;
    }
    if (!(r_q < bp.r_max())) throw ConstructionError("no non-critical radius on the base window", Rm.hi, bp.r_max());
  }

  // March R geometrically; the partial integral is increasing in R. K = 0 past rho, so the base
  // window is regrown as needed (cheap) up to max_window.
  const double c = bp.m(r_q);
  double R = r_q, partial = 0.0;
  while (true) {
    R *= 1.25;
    while (!(R < base.profile.r_max())) {
      const double grown = 8 * base.profile.r_max();
      if (grown > opt.max_window)
        throw ConstructionError("partial turn integral stays below pi up to the window limit", r_q, R);
      base.profile = solve_jacobi(base.profile.spec(), grown, opt.solve_tol);
    }
    const auto I = integrate_F(base.profile, c, r_q, R, true, q);
    if (I.finite() && I.value - I.abs_error > kPi) {
      partial = I.value;
      break;
    }
  }

  const auto spec = CurvatureSpec::spliced(base.profile.spec(), R, opt.drop);
  auto p = solve_jacobi(spec, R + opt.drop.width + opt.tail_length, opt.solve_tol);
  if (!(p.min_mp(0.0, p.r_max()) > 0)) throw ConstructionError("m' is not positive on the window");
  return {std::move(p), std::move(base), r_q, R, partial, T.finite() ? T.value : kInf};
}

}  // namespace vmp
