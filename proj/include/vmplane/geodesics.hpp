#pragma once

#include <cmath>
#include <vector>

#include "vmplane/errors.hpp"
#include "vmplane/jacobi.hpp"
#include "vmplane/numerics/dormand_prince.hpp"
#include "vmplane/numerics/roots.hpp"
#include "vmplane/quadrature.hpp"

namespace vmp {

// Launch from radius r_q at angle kappa with the outward radial direction.
// Negative kappa (clockwise) is reflected to |kappa|.
struct GeodesicLaunch {
  double r_q = 1.0;
  double kappa = kPi / 2;
};

inline double normalized_kappa(double kappa) {
  const double k = std::abs(kappa);
  if (!(k <= kPi)) throw InputError("launch angle must lie in [-pi, pi]");
  return k;
}

inline double clairaut_constant(const PlaneProfile& p, const GeodesicLaunch& l) {
  const double k = normalized_kappa(l.kappa);
  if (k == kPi || k == 0.0) return 0.0;
  return p.m(l.r_q) * std::sin(k);
}

// Largest r <= r_q with m(r) = c. Requires 0 < c < m(r_q).
inline double turning_radius(const PlaneProfile& p, double r_q, double c) {
  const double mq = p.m(r_q);
  if (!(c > 0.0 && c < mq)) throw InputError("turning_radius requires 0 < c < m(r_q)");
  const auto& nodes = p.nodes();
  std::size_t j = p.segment(r_q);
  double hi = r_q;
  while (true) {
    if (nodes[j].m <= c) break;
    if (j == 0) throw Error("turning radius not found");
    hi = nodes[j].r;
    --j;
  }
  return num::brent([&](double r) { return p.m(r) - c; }, nodes[j].r, hi, 1e-15);
}

// T of the geodesic launched at (r_q, kappa).
inline IntegralResult turn_angle(const PlaneProfile& p, const GeodesicLaunch& l, const QuadratureOptions& opt = {}) {
  if (!(l.r_q > 0.0 && l.r_q < p.r_max())) throw DomainError("r_q must lie in (0, r_max)");
  const double k = normalized_kappa(l.kappa);
  if (k == 0.0) return {};
  if (k == kPi) return {std::numeric_limits<double>::quiet_NaN(), 0.0, IntegralStatus::through_origin};
  const double mq = p.m(l.r_q);
  const double c = mq * std::sin(k);
  if (mq - c <= 1e-15 * mq || k == kPi / 2) return integrate_F(p, mq, l.r_q, {}, true, opt);
  if (k < kPi / 2) return integrate_F(p, c, l.r_q, {}, false, opt);
  const double r_u = turning_radius(p, l.r_q, c);
  QuadratureOptions half = opt;
  half.tol = 0.25 * opt.tol;
  IntegralResult inner = integrate_F(p, c, r_u, l.r_q, true, half);
  if (!inner.finite()) return inner;
  IntegralResult out = integrate_F(p, c, l.r_q, {}, false, half);
  inner.value *= 2;
  inner.abs_error *= 2;
  out += inner;
  return out;
}

enum class Verdict { yes, no, undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

// Compare a turn angle with a threshold: yes if certainly <= (or < when strict), no if certainly
// above, undetermined inside the error band.
inline Verdict compare_turn(const IntegralResult& T, double threshold, double band, bool strict) {
  if (!T.finite()) return Verdict::no;
  if (strict) {
    if (T.value + T.abs_error < threshold - band) return Verdict::yes;
    if (T.value - T.abs_error >= threshold - band) return Verdict::no;
    return Verdict::undetermined;
  }
  if (T.value + T.abs_error <= threshold + band) return Verdict::yes;
  if (T.value - T.abs_error > threshold + band) return Verdict::no;
  return Verdict::undetermined;
}

struct RayDecision {
  Verdict ray = Verdict::undetermined;
  double margin = 0.0;  // pi - T
  IntegralResult T;
};

inline void require_von_mangoldt(const PlaneProfile& p) {
  if (!p.von_mangoldt()) throw NotVonMangoldt("profile is not von Mangoldt on its window");
}

// Ray test via T <= pi. kappa = pi is not covered here (see is_pole).
inline RayDecision ray_verdict(const PlaneProfile& p, const GeodesicLaunch& l, const QuadratureOptions& opt = {}) {
  require_von_mangoldt(p);
  if (normalized_kappa(l.kappa) == kPi) throw InputError("kappa = pi passes through o; use is_pole");
  RayDecision d;
  d.T = turn_angle(p, l, opt);
  d.margin = d.T.finite() ? kPi - d.T.value : -kInf;
  d.ray = compare_turn(d.T, kPi, opt.tol, false);
  return d;
}

// Throwing variant: Undetermined when T sits inside the band around pi.
inline RayDecision is_ray(const PlaneProfile& p, const GeodesicLaunch& l, const QuadratureOptions& opt = {}) {
  auto d = ray_verdict(p, l, opt);
  if (d.ray == Verdict::undetermined) throw Undetermined("turn angle within error of pi", d.T.value, d.T.abs_error);
  return d;
}

// ---------------------------------------------------------------------------------------------
// Geodesic ODE: r'' = c^2 m'/m^3, theta' = c/m^2, unit speed.

struct TraceSample {
  double s, r, theta, rdot;
};

enum class TraceStatus { completed, window_exit, origin_approach, failed };

inline const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::completed: return "completed";
    case TraceStatus::window_exit: return "window_exit";
    case TraceStatus::origin_approach: return "origin_approach";
    case TraceStatus::failed: return "failed";
  }
  return "failed";
}

struct GeodesicTrace {
  double c = 0.0;
  std::vector<TraceSample> samples;
  TraceStatus status = TraceStatus::completed;
  double s_end = 0.0;
  double max_speed_drift = 0.0;  // max |rdot^2 + (c/m)^2 - 1|
  int turning_points = 0;        // rdot sign changes
};

struct TraceOptions {
  double tol = 1e-12;
  double origin_radius = 1e-9;
};

inline GeodesicTrace trace_geodesic(const PlaneProfile& p, const GeodesicLaunch& l, double s_max,
                                    const TraceOptions& opt = {}) {
  if (!(l.r_q > 0.0 && l.r_q < p.r_max())) throw DomainError("r_q must lie in (0, r_max)");
  if (!(s_max > 0.0)) throw InputError("s_max must be positive");
  const double k = normalized_kappa(l.kappa);
  GeodesicTrace tr;
  tr.c = p.m(l.r_q) * std::sin(k);
  if (k == kPi) tr.c = 0.0;
  const double c = tr.c, R = p.r_max();
  auto rhs = [&](double, const num::Vec<3>& y) {
    const auto e = p.eval_unchecked(y[0]);
    const double inv = 1.0 / e.m;
    return num::Vec<3>{y[1], c * c * e.mp * inv * inv * inv, c * inv * inv};
  };
  auto drift = [&](double r, double rdot) {
    const double m = p.eval_unchecked(r).m;
    return std::abs(rdot * rdot + (c / m) * (c / m) - 1.0);
  };
  num::Vec<3> y{l.r_q, std::cos(k), 0.0};
  tr.samples.push_back({0.0, y[0], y[2], y[1]});
  num::OdeOptions o;
  o.rtol = opt.tol;
  o.atol = 1e-3 * opt.tol;
  o.hmax = std::max(0.05, 0.05 * R);
  o.max_steps = 5'000'000;

  auto cross = [&](const num::OdeStep<3>& s, double target) {
    auto f = [&](double t) { return num::hermite3(s, t)[0] - target; };
    const double t = num::brent(f, s.t0, s.t1, 1e-14);
    const auto v = num::hermite3(s, t);
    return TraceSample{t, target, v[2], v[1]};
  };
  auto obs = [&](const num::OdeStep<3>& s) {
    const double r1 = s.y1[0];
    if (r1 >= R) {
      tr.samples.push_back(cross(s, R));
      tr.status = TraceStatus::window_exit;
      return false;
    }
    if (r1 <= opt.origin_radius) {
      tr.samples.push_back(cross(s, opt.origin_radius));
      tr.status = TraceStatus::origin_approach;
      return false;
    }
    if ((s.y0[1] > 0) != (s.y1[1] > 0)) ++tr.turning_points;
    tr.samples.push_back({s.t1, r1, s.y1[2], s.y1[1]});
    tr.max_speed_drift = std::max(tr.max_speed_drift, drift(r1, s.y1[1]));
    return true;
  };
  double s_end = 0.0;
  const auto st = num::dopri5<3>(rhs, 0.0, y, s_max, o, obs, &s_end);
  if (st == num::OdeStatus::reached) tr.status = TraceStatus::completed;
  else if (st != num::OdeStatus::stopped) tr.status = TraceStatus::failed;
  tr.s_end = tr.samples.back().s;
  return tr;
}

}  // namespace vmp
