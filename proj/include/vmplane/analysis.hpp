#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vmplane/errors.hpp"
#include "vmplane/geodesics.hpp"
#include "vmplane/jacobi.hpp"
#include "vmplane/numerics/roots.hpp"
#include "vmplane/quadrature.hpp"

namespace vmp {

struct AnalysisOptions {
  double tol = 1e-8;          // quadrature tolerance for turn angles (also the decision band)
  double radius_tol = 1e-9;   // bracket width for radii, relative to (1 + r)
  double angle_tol = 1e-9;    // bracket width for kappa_hat
  double slope_tol = 1e-8;    // m'(inf) >= 1/2 - slope_tol counts as >= 1/2
  int jobs = 1;

  QuadratureOptions quad() const { return {tol, SingularMethod::substitution}; }
};

// ---------------------------------------------------------------------------------------------
// Point classification

inline IntegralResult parallel_turn_angle(const PlaneProfile& p, double r_q, double tol) {
  return turn_angle(p, {r_q, kPi / 2}, {tol, SingularMethod::substitution});
}

// Retry once at a tighter tolerance when the first answer is inside the band.
template <class Decide>
Verdict decide_with_retry(Decide&& decide, double tol) {
  Verdict v = decide(tol);
  if (v == Verdict::undetermined) v = decide(0.01 * tol);
  return v;
}

inline Verdict critical_verdict(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  return decide_with_retry(
      [&](double tol) { return compare_turn(parallel_turn_angle(p, r_q, tol), kPi, tol, false); }, o.tol);
}

inline Verdict away_verdict(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  return decide_with_retry(
      [&](double tol) { return compare_turn(parallel_turn_angle(p, r_q, tol), kPi, tol, true); }, o.tol);
}

inline bool verdict_or_throw(Verdict v, const char* what) {
  if (v == Verdict::undetermined) throw Undetermined(what, kPi, 0.0);
  return v == Verdict::yes;
}

inline bool is_critical(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  return verdict_or_throw(critical_verdict(p, r_q, o), "turn angle of the parallel geodesic within error of pi");
}

inline bool in_away_set(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  return verdict_or_throw(away_verdict(p, r_q, o), "turn angle of the parallel geodesic within error of pi");
}

// ---------------------------------------------------------------------------------------------
// Poles
//
// As c -> 0 the geodesic from r_q passes near o and T(c) = pi + c L(r_q) + o(c) with
//   L(r_q) = 2 J - integral_{r_q}^inf m^-2,   J = integral_0^inf (m^-2 - r^-2) dr.
// L < 0 is the limit condition; the sup of T over the remaining c is scanned directly.

struct LimitSlope {
  double value = 0.0;
  double abs_error = 0.0;
  bool finite = false;
};

inline IntegralResult origin_defect(const PlaneProfile& p, double tol = 1e-10) {
  // Series near 0: m^-2 - r^-2 = K(0)/3 + K'(0) r/6 + O(r^2).
  const double rs = std::min(1e-3, 0.01 * p.r_max());
  const double k0 = p.curvature(0.0), dk0 = p.spec().derivative(0.0);
  IntegralResult out{k0 / 3 * rs + dk0 / 12 * rs * rs, 1e-6 * rs * rs * (1 + std::abs(dk0)), IntegralStatus::converged};
  auto g = [&](double v) {
    const double r = std::exp(v), m = p.eval_unchecked(r).m;
    return (r - m) * (r + m) / (m * m * r * r) * r;
  };
  const auto q = num::integrate(g, std::log(rs), std::log(p.r_max()), 0.25 * tol, 0.0, 4000);
  out += detail::from_quad(q, 0.25 * tol);
  const auto tail = integrate_inverse_square(p, p.r_max(), {}, 0.5 * tol);
  if (!tail.finite()) return tail;
  out += tail;
  out.value -= 1.0 / p.r_max();
  return out;
}

inline LimitSlope pole_limit_slope(const PlaneProfile& p, double r_q, double tol = 1e-10) {
  LimitSlope L;
  const auto J = origin_defect(p, tol);
  const auto I = integrate_inverse_square(p, r_q, {}, tol);
  if (!J.finite() || !I.finite()) return L;
  L.finite = true;
  L.value = 2 * J.value - I.value;
  L.abs_error = 2 * J.abs_error + I.abs_error;
  return L;
}

struct PoleDecision {
  Verdict pole = Verdict::undetermined;
  LimitSlope limit;
  double sup_T = 0.0;
  double sup_error = 0.0;
  double sup_kappa = 0.0;
};

inline constexpr double kPoleKappaMargin = 0.2;  // scan kappa in [pi/2, pi - 0.2]

inline PoleDecision pole_decision(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  PoleDecision d;
  if (!integrability(p).m_minus2_integrable) {
    d.pole = Verdict::no;
    return d;
  }
  d.limit = pole_limit_slope(p, r_q, 0.1 * o.tol);
  if (!d.limit.finite) {
    d.pole = Verdict::no;
    return d;
  }
  if (d.limit.value > d.limit.abs_error) {
    d.pole = Verdict::no;
    return d;
  }
  const auto q = o.quad();
  bool escaped = true;
  auto T_at = [&](double kappa) {
    const auto T = turn_angle(p, {r_q, kappa}, q);
    if (!T.finite()) {
      escaped = false;
      return kInf;
    }
    if (T.value > d.sup_T) {
      d.sup_T = T.value;
      d.sup_error = T.abs_error;
      d.sup_kappa = kappa;
    }
    return T.value;
  };
  constexpr int kGrid = 16;
  const double k_lo = kPi / 2, k_hi = kPi - kPoleKappaMargin;
  std::vector<double> vals(kGrid + 1);
  int best = 0;
  for (int i = 0; i <= kGrid && escaped; ++i) {
    vals[i] = T_at(k_lo + (k_hi - k_lo) * i / kGrid);
    if (vals[i] > vals[best]) best = i;
  }
  if (!escaped) {
    d.pole = Verdict::no;
    return d;
  }
  const double a = k_lo + (k_hi - k_lo) * std::max(0, best - 1) / kGrid;
  const double b = k_lo + (k_hi - k_lo) * std::min(kGrid, best + 1) / kGrid;
  num::golden_max(T_at, a, b, 1e-6);
  const double band = o.tol;
  if (d.sup_T - d.sup_error > kPi + band) d.pole = Verdict::no;
  else if (d.limit.value < -d.limit.abs_error && d.sup_T + d.sup_error <= kPi + band) d.pole = Verdict::yes;
  else d.pole = Verdict::undetermined;
  return d;
}

inline bool is_pole(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  const auto d = pole_decision(p, r_q, o);
  return verdict_or_throw(d.pole, "pole criterion within error band");
}

// ---------------------------------------------------------------------------------------------
// kappa_hat: the largest launch angle of a ray

struct KappaHat {
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pole = false;
  bool undetermined = false;
};

inline KappaHat kappa_hat(const PlaneProfile& p, double r_q, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  KappaHat k;
  if (pole_decision(p, r_q, o).pole == Verdict::yes) {
    k.value = k.lo = k.hi = kPi;
    k.pole = true;
    return k;
  }
  double lo = 0.0, hi = kPi;
  while (hi - lo > o.angle_tol) {
    const double mid = 0.5 * (lo + hi);
    const Verdict v = decide_with_retry(
        [&](double tol) { return ray_verdict(p, {r_q, mid}, {tol, SingularMethod::substitution}).ray; }, o.tol);
    if (v == Verdict::yes) lo = mid;
    else if (v == Verdict::no) hi = mid;
    else {
      k.undetermined = true;
      k.value = mid;
      k.lo = lo;
      k.hi = hi;
      return k;
    }
  }
  k.lo = lo;
  k.hi = hi;
  k.value = 0.5 * (lo + hi);
  return k;
}

// ---------------------------------------------------------------------------------------------
// Radii

struct RadiusResult {
  enum class Kind { zero, finite, infinite, none };
  Kind kind = Kind::none;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool window_limited = false;
  bool undetermined = false;
  std::string note;
};

inline const char* to_string(RadiusResult::Kind k) {
  switch (k) {
    case RadiusResult::Kind::zero: return "zero";
    case RadiusResult::Kind::finite: return "finite";
    case RadiusResult::Kind::infinite: return "infinite";
    case RadiusResult::Kind::none: return "none";
  }
  return "none";
}

// Boundary of a ball-shaped predicate on (lo, hi): pred(lo) = yes, pred(hi) = no.
template <class Pred>
RadiusResult bisect_radius(Pred&& pred, double lo, double hi, double rtol) {
  RadiusResult out;
  out.kind = RadiusResult::Kind::finite;
  while (hi - lo > rtol * (1 + lo)) {
    const double mid = (hi / lo > 4) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const Verdict v = pred(mid);
    if (v == Verdict::yes) lo = mid;
    else if (v == Verdict::no) hi = mid;
    else {
      out.undetermined = true;
      out.value = mid;
      out.lo = lo;
      out.hi = hi;
      return out;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.value = 0.5 * (lo + hi);
  return out;
}

inline RadiusResult critical_ball_radius(const PlaneProfile& p, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  if (!p.curvature_nonnegative()) throw InputError("critical_ball_radius requires G >= 0 on the window");
  RadiusResult out;
  const auto integ = integrability(p);
  if (!integ.m_minus2_integrable) {
    out.kind = RadiusResult::Kind::zero;
    out.window_limited = integ.window_limited;
    out.note = "integral of m^-2 diverges";
    return out;
  }
  const auto s = slope_at_infinity(p);
  if (s.estimate >= 0.5 - o.slope_tol) {
    out.kind = RadiusResult::Kind::infinite;
    out.value = kInf;
    out.note = "m'(inf) >= 1/2";
    return out;
  }
  const bool slope_unreliable = s.error_indicator > 0.5 - s.estimate;
  // Zero band: locate the root of T(x) = pi itself rather than the edge of the tolerance band.
  auto crit = [&](double x) {
    return decide_with_retry(
        [&](double tol) { return compare_turn(parallel_turn_angle(p, x, tol), kPi, 0.0, false); }, o.tol);
  };
  double lo = p.r_max() * 1e-6, hi = lo;
  if (crit(lo) != Verdict::yes) {
    out.kind = RadiusResult::Kind::zero;
    out.note = "not critical near o";
    return out;
  }
  const double top = p.r_max() * (1 - 1e-9);
  while (true) {
    hi = std::min(top, hi * 2);
    const Verdict v = crit(hi);
    if (v == Verdict::no) break;
    if (v == Verdict::yes) lo = hi;
    if (hi >= top) {
      out.kind = RadiusResult::Kind::infinite;
      out.value = kInf;
      out.window_limited = true;
      out.note = "critical up to r_max";
      return out;
    }
  }
  out = bisect_radius(crit, lo, hi, o.radius_tol);
  out.window_limited = slope_unreliable;
  return out;
}

struct RhoResult {
  std::optional<double> value;
  double lo = 0.0, hi = 0.0;
  double k_at_rho = 0.0;
  bool unique = false;    // K(rho) > 0 makes m' strictly decreasing there
  bool boundary = false;  // m' only touches 1/2 (within slope_tol) at the end of the window
  std::string note;
};

inline RhoResult rho_m(const PlaneProfile& p, const AnalysisOptions& o = {}) {
  if (!p.curvature_nonnegative()) throw InputError("rho_m requires G >= 0 on the window");
  RhoResult out;
  const auto& nodes = p.nodes();
  double level = 0.5;
  if (nodes.back().mp > 0.5) {
    if (nodes.back().mp - 0.5 > o.slope_tol) {
      out.note = "m' stays above 1/2 on the window";
      return out;
    }
    level = 0.5 + o.slope_tol;
    out.boundary = true;
  }
  std::size_t i = 1;
  while (i < nodes.size() && nodes[i].mp > level) ++i;
  if (i == nodes.size()) {
    out.note = "m' stays above 1/2 on the window";
    return out;
  }
  const double a = nodes[i - 1].r, b = nodes[i].r;
  const double r = num::brent([&](double x) { return p.mp(x) - level; }, a, b, 1e-14);
  const double delta = 1e-12 * (1 + r);
  out.value = r;
  out.lo = std::max(a, r - delta);
  out.hi = std::min(b, r + delta);
  out.k_at_rho = p.curvature(r);
  out.unique = out.k_at_rho > 0;
  return out;
}

inline RadiusResult pole_radius(const PlaneProfile& p, const AnalysisOptions& o = {}) {
  require_von_mangoldt(p);
  RadiusResult out;
  auto pole = [&](double x) {
    return decide_with_retry(
        [&](double tol) {
          AnalysisOptions t = o;
          t.tol = tol;
          return pole_decision(p, x, t).pole;
        },
        o.tol);
  };
  if (!integrability(p).m_minus2_integrable) {
    out.kind = RadiusResult::Kind::zero;
    out.note = "integral of m^-2 diverges";
    return out;
  }
  const double top = p.r_max() * (1 - 1e-9);
  if (pole(top) == Verdict::yes) {
    out.kind = RadiusResult::Kind::infinite;
    out.value = kInf;
    out.window_limited = true;
    out.note = "pole at r_max";
    return out;
  }
  const double bottom = p.r_max() * 1e-6;
  if (pole(bottom) != Verdict::yes) {
    out.kind = RadiusResult::Kind::zero;
    out.note = "no pole near o";
    return out;
  }
  return bisect_radius(pole, bottom, top, o.radius_tol);
}

// ---------------------------------------------------------------------------------------------
// Scans

struct Interval {
  double lo = 0.0, hi = 0.0;
  double lo_bracket[2] = {0, 0};
  double hi_bracket[2] = {0, 0};
  bool from_origin = false;  // extends down to o
  bool to_window_end = false;
};

struct ScanPoint {
  double r = 0.0;
  double T = 0.0;
  double T_error = 0.0;
  IntegralStatus status = IntegralStatus::converged;
  Verdict critical = Verdict::undetermined;
  Verdict away = Verdict::undetermined;
};

struct AnalysisReport {
  std::vector<ScanPoint> samples;
  std::vector<Interval> critical_intervals;
  std::vector<Interval> away_intervals;
  std::vector<double> gaps;  // undetermined grid radii
  std::optional<RadiusResult> R_m;
  std::optional<RhoResult> rho_m;
  std::optional<RadiusResult> R_p;
  TotalCurvature total_curvature;
  Integrability integrability;
  bool critical_connected = true;
  bool away_connected = true;
};

inline std::vector<double> default_scan_grid(const PlaneProfile& p, int n = 256) {
  std::vector<double> g(n);
  const double a = std::log(p.r_max() * 1e-4), b = std::log(p.r_max() * (1 - 1e-6));
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

namespace detail {

template <class Pred>
std::vector<Interval> assemble(const std::vector<ScanPoint>& pts, Verdict ScanPoint::*field, Pred&& pred,
                               double rtol) {
  std::vector<Interval> out;
  const std::size_t n = pts.size();
  auto refine = [&](std::size_t i, std::size_t j) {
    // pts[i] and pts[j] differ; bracket the switch.
    const Verdict vi = pts[i].*field;
    auto same = [&](double r) { return pred(r) == vi; };
    return num::bisect_predicate(same, pts[i].r, pts[j].r, rtol * (1 + pts[i].r));
  };
  std::size_t i = 0;
  while (i < n) {
    if (pts[i].*field != Verdict::yes) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && pts[j + 1].*field == Verdict::yes) ++j;
    Interval iv;
    if (i == 0) {
      iv.from_origin = true;
      iv.lo = 0.0;
    } else {
      const auto br = refine(i - 1, i);
      iv.lo_bracket[0] = br.first;
      iv.lo_bracket[1] = br.second;
      iv.lo = 0.5 * (br.first + br.second);
    }
    if (j == n - 1) {
      iv.to_window_end = true;
      iv.hi = pts[j].r;
      iv.hi_bracket[0] = iv.hi_bracket[1] = iv.hi;
    } else {
      const auto br = refine(j, j + 1);
      iv.hi_bracket[0] = br.first;
      iv.hi_bracket[1] = br.second;
      iv.hi = 0.5 * (br.first + br.second);
    }
    out.push_back(iv);
    i = j + 1;
  }
  return out;
}

}  // namespace detail

struct ScanOptions {
  bool radii = true;  // also compute R_m, rho_m, R_p
};

inline AnalysisReport scan_sets(const PlaneProfile& p, const std::vector<double>& grid, const AnalysisOptions& o = {},
                                const ScanOptions& so = {}) {
  require_von_mangoldt(p);
  AnalysisReport rep;
  rep.samples.resize(grid.size());
  parallel_for(grid.size(), o.jobs, [&](std::size_t i) {
    ScanPoint& s = rep.samples[i];
    s.r = grid[i];
    auto T = parallel_turn_angle(p, s.r, o.tol);
    s.critical = compare_turn(T, kPi, o.tol, false);
    s.away = compare_turn(T, kPi, o.tol, true);
    if (s.critical == Verdict::undetermined || s.away == Verdict::undetermined) {
      T = parallel_turn_angle(p, s.r, 0.01 * o.tol);
      s.critical = compare_turn(T, kPi, 0.01 * o.tol, false);
      s.away = compare_turn(T, kPi, 0.01 * o.tol, true);
    }
    s.T = T.value;
    s.T_error = T.abs_error;
    s.status = T.status;
  });
  for (const auto& s : rep.samples)
    if (s.critical == Verdict::undetermined || s.away == Verdict::undetermined) rep.gaps.push_back(s.r);

  rep.critical_intervals = detail::assemble(
      rep.samples, &ScanPoint::critical, [&](double r) { return critical_verdict(p, r, o); }, o.radius_tol);
  rep.away_intervals = detail::assemble(
      rep.samples, &ScanPoint::away, [&](double r) { return away_verdict(p, r, o); }, o.radius_tol);
  rep.critical_connected = rep.critical_intervals.size() <= 1;
  rep.away_connected = rep.away_intervals.size() <= 1;
  rep.integrability = integrability(p);
  rep.total_curvature = total_curvature(p);
  if (so.radii) {
    if (p.curvature_nonnegative()) {
      rep.R_m = critical_ball_radius(p, o);
      rep.rho_m = rho_m(p, o);
    }
    rep.R_p = pole_radius(p, o);
  }
  return rep;
}

inline AnalysisReport scan_sets(const PlaneProfile& p, const AnalysisOptions& o = {}, const ScanOptions& so = {}) {
  return scan_sets(p, default_scan_grid(p), o, so);
}

// ---------------------------------------------------------------------------------------------
// Neck exclusion bound f = m^-1(cos(pi b) m(y)), b = max of m' on [x, y]

struct NeckBound {
  double f = 0.0;
  double b = 0.0;
  bool applicable = false;
  bool verified_disjoint = false;
  bool x_le_f = false;
  int samples_checked = 0;
  std::string note;
};

inline NeckBound neck_bound(const PlaneProfile& p, double x, double y, const AnalysisOptions& o = {}, int samples = 100) {
  if (!(x > 0 && y > x && y <= p.r_max())) throw InputError("neck_bound needs 0 < x < y <= r_max");
  NeckBound nb;
  if (!(p.min_mp(0.0, y) > 0)) {
    nb.note = "m' is not positive on [0, y]";
    return nb;
  }
  // Grid max over nodes, then golden refinement around the best node.
  const auto& nodes = p.nodes();
  double best_r = x, best = p.mp(x);
  if (p.mp(y) > best) {
    best = p.mp(y);
    best_r = y;
  }
  for (std::size_t i = p.segment(x) + 1; i < nodes.size() && nodes[i].r < y; ++i)
    if (nodes[i].mp > best) {
      best = nodes[i].mp;
      best_r = nodes[i].r;
    }
  if (best_r > x && best_r < y) {
    const std::size_t i = p.segment(best_r);
    const double a = std::max(x, nodes[i > 0 ? i - 1 : 0].r), b = std::min(y, nodes[std::min(i + 1, nodes.size() - 1)].r);
    const auto g = num::golden_max([&](double r) { return p.mp(r); }, a, b, 1e-12);
    best = std::max(best, g.second);
  }
  nb.b = best;
  if (!(nb.b < 0.5)) {
    nb.note = "max of m' on [x, y] is not below 1/2";
    return nb;
  }
  nb.applicable = true;
  const double target = std::cos(kPi * nb.b) * p.m(y);
  nb.f = num::brent([&](double r) { return p.m(r) - target; }, 0.0, y, 1e-13);
  nb.x_le_f = x <= nb.f;
  if (!nb.x_le_f) {
    nb.note = "x > f: the disjointness claim does not apply";
    return nb;
  }
  nb.verified_disjoint = true;
  for (int i = 0; i < samples; ++i) {
    const double r = (samples == 1) ? x : x + (nb.f - x) * i / (samples - 1);
    ++nb.samples_checked;
    if (critical_verdict(p, r, o) != Verdict::no) {
      nb.verified_disjoint = false;
      break;
    }
  }
  return nb;
}

}  // namespace vmp
