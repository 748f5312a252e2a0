#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vmplane/jacobi.hpp"
#include "vmplane/numerics/dormand_prince.hpp"
#include "vmplane/numerics/gauss_kronrod.hpp"
#include "vmplane/numerics/roots.hpp"

namespace vmp {

enum class IntegralStatus { converged, divergent_tangency, divergent_tail, window_limited, through_origin };

inline const char* to_string(IntegralStatus s) {
  switch (s) {
    case IntegralStatus::converged: return "converged";
    case IntegralStatus::divergent_tangency: return "divergent_tangency";
    case IntegralStatus::divergent_tail: return "divergent_tail";
    case IntegralStatus::window_limited: return "window_limited";
    case IntegralStatus::through_origin: return "through_origin";
  }
  return "unknown";
}

struct IntegralResult {
  double value = 0.0;
  double abs_error = 0.0;
  IntegralStatus status = IntegralStatus::converged;

  bool finite() const {
    return status == IntegralStatus::converged || status == IntegralStatus::window_limited;
  }
  static IntegralResult divergent(IntegralStatus s) { return {kInf, kInf, s}; }
};

// Combine sequential pieces: statuses escalate, values and errors add.
inline IntegralResult& operator+=(IntegralResult& a, const IntegralResult& b) {
  if (!b.finite()) return a = b;
  if (!a.finite()) return a;
  a.value += b.value;
  a.abs_error += b.abs_error;
  if (b.status == IntegralStatus::window_limited) a.status = IntegralStatus::window_limited;
  return a;
}

enum class SingularMethod { substitution, factorization };

struct QuadratureOptions {
  double tol = 1e-8;
  SingularMethod method = SingularMethod::substitution;
};

namespace detail {

// F_c(m) = c / (m sqrt(m^2 - c^2)), or m^-2 when inverse_square is set.
struct Integrand {
  double c = 0.0;
  bool inverse_square = false;

  double operator()(double m) const {
    if (inverse_square) return 1.0 / (m * m);
    if (!(m > c)) return kInf;
    return c / (m * std::sqrt((m - c) * (m + c)));
  }
  // Closed-form integral over [R, inf) for m = M + A (r - R), A > 0.
  double linear_tail(double M, double A) const {
    if (inverse_square) return 1.0 / (A * M);
    return std::asin(std::min(1.0, c / M)) / A;
  }
};

// Solve m(r) = target on [a, b] where m is increasing.
inline double invert_m(const PlaneProfile& p, double target, double a, double b) {
  const auto& nodes = p.nodes();
  std::size_t lo = p.segment(a), hi = p.segment(b) + 1;
  if (target <= p.m(a)) return a;
  if (target >= p.m(b)) return b;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (nodes[mid].m < target) lo = mid; else hi = mid;
  }
  double x0 = std::max(a, nodes[lo].r), x1 = std::min(b, nodes[hi].r);
  double x = 0.5 * (x0 + x1);
  for (int it = 0; it < 60; ++it) {
    const auto e = p.eval_unchecked(x);
    const double f = e.m - target;
    if (f > 0) x1 = x; else x0 = x;
    double nx = (e.mp > 0) ? x - f / e.mp : 0.5 * (x0 + x1);
    if (!(nx > x0 && nx < x1)) nx = 0.5 * (x0 + x1);
    if (std::abs(nx - x) <= 1e-15 * std::max(1.0, x)) return nx;
    x = nx;
  }
  return x;
}

// End of the neighbourhood of r_lo used for the endpoint substitution: m' stays above half
// its starting value and m below 4c.
inline double zone_end(const PlaneProfile& p, double a, double b, double c) {
  const double mp0 = p.mp(a);
  const auto& nodes = p.nodes();
  double prev = a;
  for (std::size_t i = p.segment(a) + 1; i < nodes.size() && nodes[i].r < b; ++i) {
    if (nodes[i].r <= a) continue;
    if (nodes[i].mp <= 0.5 * mp0) {
      return num::brent([&](double r) { return p.mp(r) - 0.5 * mp0; }, prev, nodes[i].r, 1e-13);
    }
    if (nodes[i].m >= 4 * c) return nodes[i].r;
    prev = nodes[i].r;
  }
  if (p.mp(b) <= 0.5 * mp0) return num::brent([&](double r) { return p.mp(r) - 0.5 * mp0; }, prev, b, 1e-13);
  return b;
}

inline IntegralResult from_quad(const num::QuadResult& q, double tol) {
  if (q.nonfinite) return IntegralResult::divergent(IntegralStatus::divergent_tail);
  return {q.value, q.abs_error, q.abs_error <= tol ? IntegralStatus::converged : IntegralStatus::window_limited};
}

// Integral of F_c over [a, b] through phi = arccos(c/m): F_c dr = dphi / m'. Needs m' > 0 on [a, b].
inline IntegralResult substitution_piece(const PlaneProfile& p, double c, double a, double b, double tol) {
  auto phi_of = [c](double m) { return std::atan2(std::sqrt(std::max(0.0, (m - c) * (m + c))), c); };
  const double pa = phi_of(p.m(a)), pb = phi_of(p.m(b));
  auto g = [&](double phi) {
    const double r = invert_m(p, c / std::cos(phi), a, b);
    return 1.0 / p.eval_unchecked(r).mp;
  };
  return from_quad(num::integrate(g, pa, pb, tol, 0.0, 2000), tol);
}

// Same integral with r = a + v^2 and the factor h = (m - m(a)) / (r - a) (singular a only).
inline IntegralResult factorization_piece(const PlaneProfile& p, double a, double b, double tol) {
  const auto e0 = p.eval(a);
  const double c = e0.m, m2 = -p.curvature(a) * e0.m;
  auto g = [&](double v) {
    const double v2 = v * v, r = a + v2;
    const double m = p.eval_unchecked(r).m;
    const double h = (v2 < 1e-7 * std::max(1.0, a)) ? e0.mp + 0.5 * m2 * v2 : (m - c) / v2;
    return 2.0 * c / (m * std::sqrt(h) * std::sqrt(m + c));
  };
  return from_quad(num::integrate(g, 0.0, std::sqrt(b - a), tol, 0.0, 2000), tol);
}

// Plain Gauss–Kronrod on [a, b]; log-mapped when the range spans many scales.
inline IntegralResult regular_piece(const PlaneProfile& p, const Integrand& f, double a, double b, double tol) {
  if (!(b > a)) return {};
  if (a > 0 && b / a > 8) {
    auto g = [&](double v) {
      const double r = std::exp(v);
      return f(p.eval_unchecked(std::min(r, p.r_max())).m) * r;
    };
    return from_quad(num::integrate(g, std::log(a), std::log(b), tol, 0.0, 4000), tol);
  }
  auto g = [&](double r) { return f(p.eval_unchecked(r).m); };
  return from_quad(num::integrate(g, a, b, tol, 0.0, 4000), tol);
}

struct TailModel {
  bool finite = false;
  double value = kInf;
};

// Integral over u in [U, inf) of the u-space integrand when w'' = q w with q frozen
// (q = 0 gives w linear in u).
inline TailModel tail_model(const Integrand& f, double U, double w, double wp, double q, double tol) {
  TailModel out;
  double A = 0, B = 0, s = 0;
  if (q == 0.0) {
    if (!(wp > 0)) return out;
  } else if (q > 0) {
    s = std::sqrt(q);
    A = 0.5 * (w + wp / s);
    B = 0.5 * (w - wp / s);
    if (!(A > 0)) return out;
  } else {
    return out;  // oscillatory: m returns to zero
  }
  if (f.inverse_square) {
    out.finite = true;
    out.value = (q == 0.0) ? 1.0 / (w * wp) : 1.0 / (2 * s * A * w);
    return out;
  }
  auto W = [&](double x) {
    if (q == 0.0) return w + wp * x;
    // A e^{sx} + B e^{-sx}, scaled to avoid overflow for large sx.
    const double sx = s * x;
    if (sx > 600) return kInf;
    return A * std::exp(sx) + B * std::exp(-sx);
  };
  bool trapped = false;
  auto g = [&](double t) {
    const double x = t / (1 - t), jac = 1 / ((1 - t) * (1 - t));
    const double Wx = W(x);
    if (!std::isfinite(Wx)) return 0.0;
    const double ce = f.c * std::exp(-0.5 * (U + x));
    if (!(Wx > ce)) {
      trapped = true;
      return 0.0;
    }
    return f.c / (Wx * std::sqrt((Wx - ce) * (Wx + ce))) * jac;
  };
  const auto r = num::integrate(g, 0.0, 1.0, 0.1 * tol, 1e-12, 400);
  if (trapped || r.nonfinite) return out;
  out.finite = true;
  out.value = r.value;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Window diagnostics for integrability of m^-2 and positivity of liminf m.

struct Integrability {
  bool m_minus2_integrable = false;
  bool liminf_m_positive = false;
  std::string route;  // flat_tail, convex_tail, constant_positive_tail, log_exponent
  double beta = 0.0;  // exponent of g = m^2/r against ln r, estimated at r_max and r_max/2
  double min_m = 0.0;
  bool window_limited = false;
};

inline Integrability integrability(const PlaneProfile& p) {
  Integrability out;
  const double R = p.r_max();
  const auto e = p.eval(R);
  out.min_m = p.diagnostics().min_m;
  out.liminf_m_positive = out.min_m > 0 && e.mp >= -1e-12;
  const auto cb = p.spec().constant_beyond();
  if (cb && cb->first <= R) {
    if (cb->second == 0.0) {
      out.route = "flat_tail";
      out.m_minus2_integrable = e.mp > 0;
      out.liminf_m_positive = out.min_m > 0 && e.mp >= 0;
      return out;
    }
    if (cb->second > 0.0) {
      out.route = "constant_positive_tail";
      out.m_minus2_integrable = false;
      out.liminf_m_positive = false;
      return out;
    }
  }
  if (p.von_mangoldt() && p.curvature(R) <= 0.0 && e.mp > 0) {
    out.route = "convex_tail";
    out.m_minus2_integrable = true;
    out.liminf_m_positive = out.min_m > 0;
    return out;
  }
  // g = m^2/r behaves like (ln r)^beta; integrable iff beta > 1.
  out.route = "log_exponent";
  out.window_limited = true;
  const double R2 = 0.5 * R;
  const double g1 = e.m * e.m / R, m2 = p.m(R2), g0 = m2 * m2 / R2;
  const double l1 = std::log(R), l0 = std::log(R2);
  if (l0 <= 0.05) {
    out.beta = 0.0;
    out.m_minus2_integrable = false;
    return out;
  }
  out.beta = std::log(g1 / g0) / std::log(l1 / l0);
  out.m_minus2_integrable = out.beta > 1.0;
  return out;
}

namespace detail {

// Integral of f over [r_max, infinity).
inline IntegralResult tail_integral(const PlaneProfile& p, const Integrand& f, double tol) {
  const double R = p.r_max();
  const auto e = p.eval(R);
  const double M = e.m, A = e.mp, KR = p.curvature(R);
  if (!f.inverse_square && !(M > f.c)) return IntegralResult::divergent(IntegralStatus::divergent_tail);
  const auto cb = p.spec().constant_beyond();
  const bool extendable = std::isinf(p.spec().domain_end());

  // (a) exactly flat beyond the window: m is linear.
  if (cb && cb->first <= R && cb->second == 0.0) {
    if (!(A > 0)) return IntegralResult::divergent(IntegralStatus::divergent_tail);
    const double v = f.linear_tail(M, A);
    return {v, 1e-14 * v, IntegralStatus::converged};
  }
  if (cb && cb->first <= R && cb->second > 0.0) return IntegralResult::divergent(IntegralStatus::divergent_tail);

  // (a') K <= 0 and non-increasing beyond R: m' is non-decreasing, so the linear-tail value at
  // the current radius bounds what is left. March the ODE until that bound is below tol.
  const bool convex = (p.von_mangoldt() && KR <= 0.0) || (cb && cb->first <= R && cb->second < 0.0);
  if (convex && A > 0) {
    if (!extendable) {
      const double b = f.linear_tail(M, A);
      return {0.5 * b, 0.5 * b, 0.5 * b <= tol ? IntegralStatus::converged : IntegralStatus::window_limited};
    }
    num::Vec<3> y{M, A, 0.0};
    const auto& spec = p.spec();
    auto rhs = [&](double r, const num::Vec<3>& s) {
      return num::Vec<3>{s[1], -spec(r) * s[0], f(s[0])};
    };
    double bound = f.linear_tail(M, A);
    if (bound <= 0.25 * tol) return {0.5 * bound, 0.5 * bound, IntegralStatus::converged};
    num::OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-3 * tol;
    o.max_steps = 200000;
    auto obs = [&](const num::OdeStep<3>& s) {
      bound = f.linear_tail(s.y1[0], s.y1[1]);
      return bound > 0.25 * tol;
    };
    double r_end = R;
    const auto st = num::dopri5<3>(rhs, R, y, R + 1e12, o, obs, &r_end);
    const double err = 0.5 * bound + 1e-10 * std::abs(y[2]);
    const auto status = (st == num::OdeStatus::stopped && err <= tol) ? IntegralStatus::converged
                                                                       : IntegralStatus::window_limited;
    return {y[2] + 0.5 * bound, err, status};
  }

  // (b) no certificate. Decide integrability first, then extend in u = ln r with the rescaled
  // profile w = m / sqrt(r), for which w'' = (1/4 - K r^2) w, and close the tail with a model
  // that freezes q = 1/4 - K r^2 (or sets it to zero when q is decaying).
  if (!integrability(p).m_minus2_integrable) return IntegralResult::divergent(IntegralStatus::divergent_tail);
  const auto& spec = p.spec();
  auto q_at = [&](double u) {
    const double r = std::exp(u);
    return 0.25 - spec(r) * r * r;
  };
  auto model = [&](double u, double w, double wp) {
    const double qn = q_at(u), qp = q_at(u - std::log(2.0));
    const double q = (std::abs(qn) <= 0.75 * std::abs(qp)) ? 0.0 : qn;
    return tail_model(f, u, w, wp, q, tol);
  };
  auto u_integrand = [&](double u, double w) {
    if (f.inverse_square) return 1.0 / (w * w);
    const double ce = f.c * std::exp(-0.5 * u);
    if (!(w > ce)) return kInf;
    return f.c / (w * std::sqrt((w - ce) * (w + ce)));
  };
  const double U0 = std::log(R), ln2 = std::log(2.0);
  const double w0 = M / std::sqrt(R), wp0 = std::sqrt(R) * A - 0.5 * w0;

  if (!extendable) {
    const auto tm = model(U0, w0, wp0);
    if (!tm.finite) return IntegralResult::divergent(IntegralStatus::divergent_tail);
    const double R2 = 0.5 * R, m2 = p.m(R2), mp2 = p.mp(R2);
    const auto prev = model(U0 - ln2, m2 / std::sqrt(R2), std::sqrt(R2) * mp2 - 0.5 * m2 / std::sqrt(R2));
    const auto mid = regular_piece(p, f, R2, R, 0.1 * tol);
    const double err = prev.finite ? std::abs(mid.value + tm.value - prev.value) : kInf;
    return {tm.value, err, err <= tol ? IntegralStatus::converged : IntegralStatus::window_limited};
  }

  struct Mark {
    double u, E;
    bool finite;
  };
  std::vector<Mark> hist;
  auto first = model(U0, w0, wp0);
  hist.push_back({U0, first.value, first.finite});
  double indicator = kInf;
  bool trapped = false;
  auto rhs = [&](double u, const num::Vec<3>& s) {
    return num::Vec<3>{s[1], q_at(u) * s[0], u_integrand(u, s[0])};
  };
  auto obs = [&](const num::OdeStep<3>& s) {
    if (!(s.y1[0] > 0) || !std::isfinite(s.y1[2])) {
      trapped = true;
      return false;
    }
    const auto tm = model(s.t1, s.y1[0], s.y1[1]);
    hist.push_back({s.t1, s.y1[2] + tm.value, tm.finite});
    const Mark& cur = hist.back();
    for (auto it = hist.rbegin(); it != hist.rend(); ++it) {
      if (it->u <= cur.u - ln2) {
        if (cur.finite && it->finite) indicator = std::abs(cur.E - it->E);
        break;
      }
    }
    return !(cur.finite && indicator <= 0.25 * tol);
  };
  num::Vec<3> y{w0, wp0, 0.0};
  num::OdeOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-3 * tol;
  o.max_steps = 20000;
  const double U_cap = std::min(U0 + 30.0, 300.0);
  num::dopri5<3>(rhs, U0, y, U_cap, o, obs);
  if (trapped || !hist.back().finite) return IntegralResult::divergent(IntegralStatus::divergent_tail);
  const double err = indicator + 1e-10 * std::abs(y[2]);
  return {hist.back().E, err, err <= tol ? IntegralStatus::converged : IntegralStatus::window_limited};
}

inline void check_window(const PlaneProfile& p, double r) {
  if (!(r >= 0.0 && r <= p.r_max())) throw DomainError("radius outside the profile window");
}

}  // namespace detail

// Integral of F_c = c / (m sqrt(m^2 - c^2)) over [r_lo, r_hi] (r_hi empty: infinity).
inline IntegralResult integrate_F(const PlaneProfile& p, double c, double r_lo, std::optional<double> r_hi,
                                  bool singular_lo, const QuadratureOptions& opt = {}) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("Clairaut constant must be finite and >= 0");
  if (!(opt.tol > 0.0)) throw InputError("tolerance must be positive");
  detail::check_window(p, r_lo);
  if (r_hi) {
    detail::check_window(p, *r_hi);
    if (*r_hi < r_lo) throw InputError("r_hi < r_lo");
  }
  if (c == 0.0) return {};
  const double tol = opt.tol;
  const double b = r_hi ? *r_hi : p.r_max();
  const auto e0 = p.eval(r_lo);
  IntegralResult out;
  double a = r_lo;

  if (singular_lo) {
    if (std::abs(e0.m - c) > 1e-9 * std::max(1.0, c))
      throw InputError("singular lower endpoint requires m(r_lo) = c");
    const double tangency = std::max(1e-9, 1000 * p.tol());
    if (std::abs(e0.mp) <= tangency) return IntegralResult::divergent(IntegralStatus::divergent_tangency);
    if (e0.mp < 0) return IntegralResult::divergent(IntegralStatus::divergent_tail);
    c = e0.m;
  } else if (!(e0.m > c)) {
    return IntegralResult::divergent(IntegralStatus::divergent_tail);
  }
  const detail::Integrand f{c, false};

  // Endpoint neighbourhood: singular or nearly so.
  if (b > a && e0.mp > 0 && (singular_lo || e0.m < 2 * c)) {
    const double z = detail::zone_end(p, a, b, c);
    if (singular_lo && opt.method == SingularMethod::factorization)
      out += detail::factorization_piece(p, a, z, 0.25 * tol);
    else
      out += detail::substitution_piece(p, c, a, z, 0.25 * tol);
    a = z;
  }
  if (!out.finite()) return out;
  if (b > a) {
    if (!(p.min_m(a, b) > c)) return IntegralResult::divergent(IntegralStatus::divergent_tail);
    out += detail::regular_piece(p, f, a, b, 0.25 * tol);
  }
  if (!out.finite() || r_hi) return out;
  out += detail::tail_integral(p, f, 0.5 * tol);
  if (out.finite() && out.status == IntegralStatus::converged && out.abs_error > tol)
    out.status = IntegralStatus::window_limited;
  return out;
}

// Integral of m^-2 over [r_lo, r_hi] (r_hi empty: infinity); r_lo > 0.
inline IntegralResult integrate_inverse_square(const PlaneProfile& p, double r_lo, std::optional<double> r_hi = {},
                                               double tol = 1e-9) {
  if (!(r_lo > 0.0)) throw InputError("inverse-square integral needs r_lo > 0");
  detail::check_window(p, r_lo);
  const detail::Integrand f{0.0, true};
  const double b = r_hi ? *r_hi : p.r_max();
  if (r_hi) detail::check_window(p, b);
  IntegralResult out = detail::regular_piece(p, f, r_lo, b, 0.5 * tol);
  if (!out.finite() || r_hi) return out;
  out += detail::tail_integral(p, f, 0.5 * tol);
  return out;
}

}  // namespace vmp
