#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "vmplane/errors.hpp"
#include "vmplane/geodesics.hpp"
#include "vmplane/jacobi.hpp"
#include "vmplane/numerics/dormand_prince.hpp"
#include "vmplane/numerics/roots.hpp"
#include "vmplane/quadrature.hpp"

namespace vmp {

// ---------------------------------------------------------------------------------------------
// Turn angle by direct integration of the geodesic ODE, plus a quadrature tail past the trace.

struct TracedTurnAngle {
  double value = 0.0;
  double theta_traced = 0.0;
  double tail = 0.0;
  double tail_error = 0.0;
  double r_end = 0.0;
  double s_end = 0.0;
  IntegralStatus status = IntegralStatus::converged;
  TraceStatus trace_status = TraceStatus::completed;
};

inline TracedTurnAngle turn_angle_by_trace(const PlaneProfile& p, const GeodesicLaunch& l,
                                           std::optional<double> s_max = {}, const TraceOptions& opt = {}) {
  const double k = normalized_kappa(l.kappa);
  TracedTurnAngle out;
  if (k == 0.0) return out;
  double s = s_max.value_or(2 * p.r_max());
  for (int attempt = 0; attempt < 8; ++attempt, s *= 2) {
    const auto tr = trace_geodesic(p, l, s, opt);
    const auto& end = tr.samples.back();
    out.theta_traced = end.theta;
    out.r_end = end.r;
    out.s_end = tr.s_end;
    out.trace_status = tr.status;
    if (tr.status == TraceStatus::origin_approach) {
      out.value = std::numeric_limits<double>::quiet_NaN();
      out.status = IntegralStatus::through_origin;
      return out;
    }
    if (tr.status == TraceStatus::failed) throw Error("geodesic trace failed");
    // Trapped: circling at a fixed radius, or turned back inward after moving out.
    double r_lo = kInf, r_hi = 0.0;
    for (const auto& smp : tr.samples) {
      r_lo = std::min(r_lo, smp.r);
      r_hi = std::max(r_hi, smp.r);
    }
    if (r_hi - r_lo <= 1e-8 * (1 + r_hi)) {
      out.value = kInf;
      out.status = IntegralStatus::divergent_tangency;
      return out;
    }
    if (tr.turning_points >= 2) {
      out.value = kInf;
      out.status = IntegralStatus::divergent_tail;
      return out;
    }
    if (tr.status == TraceStatus::window_exit || end.rdot > 0) {
      const auto tail = integrate_F(p, tr.c, end.r, {}, false, {opt.tol * 100, SingularMethod::substitution});
      if (!tail.finite()) {
        out.value = kInf;
        out.status = tail.status;
        return out;
      }
      out.tail = tail.value;
      out.tail_error = tail.abs_error;
      out.value = out.theta_traced + out.tail;
      if (tail.status == IntegralStatus::window_limited) out.status = tail.status;
      return out;
    }
  }
  throw Error("geodesic still incoming after the trace budget");
}

// ---------------------------------------------------------------------------------------------
// Two-point shooting: length of the shortest traced geodesic from (r_a, 0) to (r_b, theta_b).

struct Crossing {
  double s;
  double theta;
};

namespace detail {

// Crossings of r = target along the geodesic from (r_a, 0) at angle kappa, for s <= s_limit.
inline std::vector<Crossing> crossings(const PlaneProfile& p, double r_a, double kappa, double target,
                                       double s_limit, double tol) {
  const double c = p.m(r_a) * std::sin(kappa);
  auto rhs = [&](double, const num::Vec<3>& y) {
    const auto e = p.eval_unchecked(y[0]);
    const double inv = 1.0 / e.m;
    return num::Vec<3>{y[1], c * c * e.mp * inv * inv * inv, c * inv * inv};
  };
  std::vector<Crossing> out;
  num::Vec<3> y{r_a, std::cos(kappa), 0.0};
  num::OdeOptions o;
  o.rtol = 1e-3 * tol;
  o.atol = 1e-6 * tol;
  o.hmax = std::max(0.01, 0.005 * s_limit);
  auto obs = [&](const num::OdeStep<3>& st) {
    const double g0 = st.y0[0] - target, g1 = st.y1[0] - target;
    if (g0 == 0.0 && st.t0 > 0) return true;  // counted at the previous step's end
    if ((g0 < 0) != (g1 < 0) || g1 == 0.0) {
      const double t = (g1 == 0.0)
                           ? st.t1
                           : num::brent([&](double x) { return num::hermite3(st, x)[0] - target; }, st.t0, st.t1, 1e-14);
      out.push_back({t, num::hermite3(st, t)[2]});
    }
    return st.y1[0] > 1e-9 && st.y1[0] < p.r_max();
  };
  num::dopri5<3>(rhs, 0.0, y, s_limit, o, obs);
  return out;
}

}  // namespace detail

struct ShootResult {
  double length = kInf;
  double kappa = 0.0;
  bool found = false;
  bool via_origin = false;  // the broken path through o was the best candidate
  int candidates = 0;
};

inline ShootResult distance_shoot(const PlaneProfile& p, double r_a, double r_b, double theta_b, double tol = 1e-9,
                                  int grid = 64) {
  if (!(r_a > 0 && r_a < p.r_max() && r_b > 0 && r_b < p.r_max())) throw DomainError("points must lie in the window");
  double th = std::remainder(theta_b, 2 * kPi);
  th = std::abs(th);
  ShootResult best;
  auto offer = [&](double len, double kappa, bool origin) {
    ++best.candidates;
    if (len < best.length) {
      best.length = len;
      best.kappa = kappa;
      best.found = true;
      best.via_origin = origin;
    }
  };
  // Radial candidates: the meridian itself, or the path through o (a geodesic when theta = pi).
  if (th == 0.0) offer(std::abs(r_a - r_b), r_b >= r_a ? 0.0 : kPi, false);
  if (std::abs(th - kPi) <= 1e-15) offer(r_a + r_b, kPi, true);
  // Minimizers are no longer than the path through o.
  const double s_limit = r_a + r_b + 10 * tol;

  std::vector<double> ks(grid);
  std::vector<std::vector<Crossing>> cross(grid);
  for (int i = 0; i < grid; ++i) {
    ks[i] = kPi * (i + 0.5) / grid;
    cross[i] = detail::crossings(p, r_a, ks[i], r_b, s_limit, tol);
  }
  for (int i = 0; i + 1 < grid; ++i) {
    const std::size_t n = std::min(cross[i].size(), cross[i + 1].size());
    for (std::size_t j = 0; j < n; ++j) {
      const double g0 = cross[i][j].theta - th, g1 = cross[i + 1][j].theta - th;
      if ((g0 < 0) == (g1 < 0)) continue;
      bool lost = false;
      auto g = [&](double kappa) {
        const auto cs = detail::crossings(p, r_a, kappa, r_b, s_limit, tol);
        if (cs.size() <= j) {
          lost = true;
          return g0;
        }
        return cs[j].theta - th;
      };
      const double kappa = num::brent(g, ks[i], ks[i + 1], 1e-13);
      if (lost) continue;
      const auto cs = detail::crossings(p, r_a, kappa, r_b, s_limit, tol);
      if (cs.size() > j && std::abs(cs[j].theta - th) <= 1e3 * tol) offer(cs[j].s, kappa, false);
    }
  }
  if (!best.found) {
    // Failure flag stays down; the path through o is still an upper bound.
    best.length = r_a + r_b;
    best.kappa = kPi;
    best.via_origin = true;
  }
  return best;
}

}  // namespace vmp
