#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "vmplane/curvature.hpp"
#include "vmplane/errors.hpp"
#include "vmplane/numerics/dormand_prince.hpp"
#include "vmplane/numerics/gauss_kronrod.hpp"
#include "vmplane/numerics/roots.hpp"

namespace vmp {

struct ProfileNode {
  double r, m, mp, k;
};

struct ProfileDiagnostics {
  double delta = 1e-3;
  double min_m = 0.0;  // min of m over nodes in (delta, r_max]
  double mp_at_rmax = 0.0;
  bool von_mangoldt = false;
  std::optional<double> vm_violation;
  bool curvature_nonnegative = false;  // G >= 0 on the window grid
  long steps = 0;
};

struct SolveOptions {
  double tol = 1e-11;
  bool check_vm = true;
};

namespace detail {

// Quintic Hermite on one step from (m, m', m'') at both ends.
struct Quintic {
  double m, mp;
};
inline Quintic quintic_eval(const ProfileNode& a, const ProfileNode& b, double r) {
  const double h = b.r - a.r, t = (r - a.r) / h, u = 1.0 - t;
  auto H0 = [](double x) { const double x3 = x * x * x; return 1 - 10 * x3 + 15 * x3 * x - 6 * x3 * x * x; };
  auto H1 = [](double x) { const double x3 = x * x * x; return x - 6 * x3 + 8 * x3 * x - 3 * x3 * x * x; };
  auto H2 = [](double x) { const double x2 = x * x, x3 = x2 * x; return 0.5 * (x2 - 3 * x3 + 3 * x3 * x - x3 * x2); };
  auto D0 = [](double x) { const double x2 = x * x; return -30 * x2 + 60 * x2 * x - 30 * x2 * x2; };
  auto D1 = [](double x) { const double x2 = x * x; return 1 - 18 * x2 + 32 * x2 * x - 15 * x2 * x2; };
  auto D2 = [](double x) { const double x2 = x * x; return 0.5 * (2 * x - 9 * x2 + 12 * x2 * x - 5 * x2 * x2); };
  const double a2 = -a.k * a.m, b2 = -b.k * b.m;
  const double m = a.m * H0(t) + h * a.mp * H1(t) + h * h * a2 * H2(t) + b.m * H0(u) -
                   h * b.mp * H1(u) + h * h * b2 * H2(u);
  const double mp = (a.m * D0(t) - b.m * D0(u)) / h + a.mp * D1(t) + b.mp * D1(u) +
                    h * (a2 * D2(t) - b2 * D2(u));
  return {m, mp};
}

}  // namespace detail

// Dense numerical solution of m'' + K m = 0, m(0) = 0, m'(0) = 1 on [0, r_max].
class PlaneProfile {
 public:
  PlaneProfile(CurvatureSpec spec, std::vector<ProfileNode> nodes, double tol, ProfileDiagnostics diag)
      : spec_(std::move(spec)), nodes_(std::move(nodes)), tol_(tol), diag_(diag) {
    if (nodes_.size() < 2) throw InputError("profile needs at least two nodes");
  }

  const CurvatureSpec& spec() const { return spec_; }
  double r_max() const { return nodes_.back().r; }
  double tol() const { return tol_; }
  const std::vector<ProfileNode>& nodes() const { return nodes_; }
  const ProfileDiagnostics& diagnostics() const { return diag_; }
  bool von_mangoldt() const { return diag_.von_mangoldt; }
  bool curvature_nonnegative() const { return diag_.curvature_nonnegative; }

  // Index i with nodes[i].r <= r <= nodes[i+1].r.
  std::size_t segment(double r) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r,
                               [](double x, const ProfileNode& n) { return x < n.r; });
    std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    return std::clamp<std::size_t>(i, 1, nodes_.size() - 1) - 1;
  }

  // (m, m') at r; throws outside the window.
  detail::Quintic eval(double r) const {
    if (!(r >= 0.0 && r <= r_max())) throw DomainError("radius outside the profile window");
    return eval_unchecked(r);
  }
  double m(double r) const { return eval(r).m; }
  double mp(double r) const { return eval(r).mp; }
  double curvature(double r) const { return spec_(r); }

  // Beyond r_max: Taylor continuation from the last node. Used for stage probes only.
  detail::Quintic eval_unchecked(double r) const {
    if (r >= r_max()) {
      const auto& b = nodes_.back();
      const double d = r - b.r, a2 = -b.k * b.m;
      return {b.m + b.mp * d + 0.5 * a2 * d * d, b.mp + a2 * d};
    }
    if (r <= 0.0) return {r, 1.0};
    const std::size_t i = segment(r);
    return detail::quintic_eval(nodes_[i], nodes_[i + 1], r);
  }

  // Minimum of m over [a, b] from the nodes inside plus both endpoints.
  double min_m(double a, double b) const {
    double lo = std::min(m(a), m(b));
    for (std::size_t i = segment(a) + 1; i < nodes_.size() && nodes_[i].r < b; ++i)
      lo = std::min(lo, nodes_[i].m);
    return lo;
  }
  double min_mp(double a, double b) const {
    double lo = std::min(mp(a), mp(b));
    for (std::size_t i = segment(a) + 1; i < nodes_.size() && nodes_[i].r < b; ++i)
      lo = std::min(lo, nodes_[i].mp);
    return lo;
  }
  double max_mp(double a, double b) const {
    double hi = std::max(mp(a), mp(b));
    for (std::size_t i = segment(a) + 1; i < nodes_.size() && nodes_[i].r < b; ++i)
      hi = std::max(hi, nodes_[i].mp);
    return hi;
  }

 private:
  CurvatureSpec spec_;
  std::vector<ProfileNode> nodes_;
  double tol_;
  ProfileDiagnostics diag_;
};

inline ProfileDiagnostics compute_diagnostics(const CurvatureSpec& spec, const std::vector<ProfileNode>& nodes,
                                              bool check_vm) {
  ProfileDiagnostics d;
  const double r_max = nodes.back().r;
  d.delta = std::min(1e-3, 0.5 * r_max);
  d.min_m = kInf;
  for (const auto& n : nodes)
    if (n.r > d.delta) d.min_m = std::min(d.min_m, n.m);
  d.mp_at_rmax = nodes.back().mp;
  d.steps = static_cast<long>(nodes.size()) - 2;
  double min_k = kInf;
  for (const auto& n : nodes) min_k = std::min(min_k, n.k);
  const double step = r_max / 4000.0;
  for (int i = 0; i <= 4000; ++i) min_k = std::min(min_k, spec(std::min(r_max, i * step)));
  d.curvature_nonnegative = min_k >= -1e-14;
  if (check_vm) {
    const auto vm = check_von_mangoldt(spec, r_max, step);
    d.von_mangoldt = vm.is_vm;
    d.vm_violation = vm.first_violation;
  }
  return d;
}

inline PlaneProfile solve_jacobi(const CurvatureSpec& spec, double r_max, const SolveOptions& opt = {}) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InputError("r_max must be positive and finite");
  if (!(opt.tol > 1e-14 && opt.tol < 1e-3)) throw InputError("tol must lie in (1e-14, 1e-3)");
  if (r_max > spec.domain_end()) throw DomainError("r_max beyond the curvature domain");

  std::vector<double> stops = spec.breakpoints(r_max);
  stops.push_back(r_max);

  // Series seed m = r - K0 r^3/6 - K0' r^4/12 keeps m(0)=0, m'(0)=1 exact in structure.
  const double k0 = spec(0.0), dk0 = spec.derivative(0.0);
  double r0 = std::min({1e-4, 0.01 * r_max, 0.1 * stops.front()});
  std::vector<ProfileNode> nodes;
  nodes.reserve(1024);
  nodes.push_back({0.0, 0.0, 1.0, k0});
  num::Vec<2> y{r0 - k0 * r0 * r0 * r0 / 6 - dk0 * r0 * r0 * r0 * r0 / 12,
                1 - 0.5 * k0 * r0 * r0 - dk0 * r0 * r0 * r0 / 3};
  nodes.push_back({r0, y[0], y[1], spec(r0)});

  num::OdeOptions o;
  o.rtol = opt.tol;
  o.atol = opt.tol * 1e-6;
  auto rhs = [&spec](double r, const num::Vec<2>& s) { return num::Vec<2>{s[1], -spec(r) * s[0]}; };

  double r = r0, h = 0.0;
  for (double stop : stops) {
    if (stop <= r) continue;
    auto observer = [&](const num::OdeStep<2>& s) {
      const ProfileNode b{s.t1, s.y1[0], s.y1[1], spec(s.t1)};
      if (b.m <= 0.0) {
        const ProfileNode& a = nodes.back();
        const double z = num::brent([&](double x) { return detail::quintic_eval(a, b, x).m; }, a.r, b.r, 1e-13);
        throw StarViolation(z);
      }
      nodes.push_back(b);
      return true;
    };
    const auto st = num::dopri5<2>(rhs, r, y, stop, o, observer, &r, &h);
    if (st != num::OdeStatus::reached) throw Error("Jacobi integration failed before r_max");
    r = stop;
  }
  auto diag = compute_diagnostics(spec, nodes, opt.check_vm);
  return PlaneProfile(spec, std::move(nodes), opt.tol, diag);
}

inline PlaneProfile solve_jacobi(const CurvatureSpec& spec, double r_max, double tol) {
  SolveOptions o;
  o.tol = tol;
  return solve_jacobi(spec, r_max, o);
}

inline double eval_m(const PlaneProfile& p, double r) { return p.m(r); }
inline double eval_mp(const PlaneProfile& p, double r) { return p.mp(r); }

// ---------------------------------------------------------------------------------------------
// Sturm comparison

struct SturmReport {
  bool m2_ge_m1 = true;
  bool mp2_ge_mp1 = true;
  std::optional<double> first_violation;
};

inline SturmReport sturm_compare(const PlaneProfile& p1, const PlaneProfile& p2) {
  const double w1 = p1.r_max(), w2 = p2.r_max();
  if (std::abs(w1 - w2) > 1e-9 * std::max(w1, w2)) throw InputError("sturm_compare: profiles have different windows");
  const double w = std::min(w1, w2);
  std::vector<double> grid;
  for (const auto& n : p1.nodes()) grid.push_back(n.r);
  for (const auto& n : p2.nodes()) grid.push_back(n.r);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.back() > w) grid.pop_back();

  const double tol = 10 * std::max(p1.tol(), p2.tol());
  auto m_ok = [&](double r) { return p2.m(r) >= p1.m(r) - tol * (1 + std::abs(p1.m(r))); };
  auto mp_ok = [&](double r) { return p2.mp(r) >= p1.mp(r) - tol * (1 + std::abs(p1.mp(r))); };

  SturmReport rep;
  double prev = 0.0;
  for (double r : grid) {
    const bool a = m_ok(r), b = mp_ok(r);
    if (!a || !b) {
      rep.m2_ge_m1 = a;
      rep.mp2_ge_mp1 = b;
      auto ok = [&](double x) { return m_ok(x) && mp_ok(x); };
      rep.first_violation = num::bisect_predicate(ok, prev, r, 1e-10).second;
      // Keep scanning so each flag reflects the whole window.
      for (double s : grid) {
        if (s <= r) continue;
        rep.m2_ge_m1 = rep.m2_ge_m1 && m_ok(s);
        rep.mp2_ge_mp1 = rep.mp2_ge_mp1 && mp_ok(s);
      }
      return rep;
    }
    prev = r;
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Embedding as a surface of revolution in R^3

struct EmbedResult {
  bool embeddable = false;
  std::optional<double> witness;  // first radius with |m'| > 1 + tolerance
  std::vector<double> s, x, z;
};

inline EmbedResult embed_profile(const PlaneProfile& p, int samples = 201, double slack = 1e-9) {
  if (samples < 2) throw InputError("embed_profile: need at least two samples");
  EmbedResult out;
  auto bad = [&](double r) { return std::abs(p.mp(r)) > 1 + slack; };
  const auto& nodes = p.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (std::abs(nodes[i].mp) > 1 + slack) {
      out.witness = num::bisect_predicate(bad, nodes[i - 1].r, nodes[i].r, 1e-12).second;
      return out;
    }
  }
  out.embeddable = true;
  auto dz = [&](double r) {
    const double v = p.mp(r);
    return std::sqrt(std::max(0.0, (1 - v) * (1 + v)));
  };
  double z = 0.0, prev = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double s = p.r_max() * j / (samples - 1);
    if (j > 0) z += num::integrate(dz, prev, s, 1e-12, 1e-12).value;
    out.s.push_back(s);
    out.x.push_back(p.m(s));
    out.z.push_back(z);
    prev = s;
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Quantities at infinity (two-scale indicators)

struct SlopeEstimate {
  double estimate = 0.0;
  double error_indicator = 0.0;
  bool reliable = false;  // von Mangoldt or G >= 0 on the window
  bool diverges = false;  // m' -> +infinity (negative curvature persisting at the window end)
};

inline SlopeEstimate slope_at_infinity(const PlaneProfile& p, double tolerance = kInf) {
  SlopeEstimate s;
  s.estimate = p.mp(p.r_max());
  s.error_indicator = std::abs(s.estimate - p.mp(0.5 * p.r_max()));
  s.reliable = p.von_mangoldt() || p.curvature_nonnegative();
  s.diverges = p.von_mangoldt() && p.curvature(p.r_max()) < 0.0;
  if (s.diverges) s.estimate = kInf;
  if (!s.diverges && s.error_indicator > tolerance)
    throw WindowLimited("slope at infinity not resolved on this window", s.error_indicator);
  return s;
}

struct TotalCurvature {
  double by_slope = 0.0;
  double by_integral = 0.0;
  bool consistent = false;
  bool slope_diverges = false;
};

// 2*pi * integral of K m over [0, b], one Gauss–Kronrod panel per integrator step.
inline double curvature_integral(const PlaneProfile& p, double b) {
  const auto& nodes = p.nodes();
  double sum = 0.0;
  auto km = [&](double r) { return p.curvature(r) * p.m(r); };
  for (std::size_t i = 0; i + 1 < nodes.size() && nodes[i].r < b; ++i) {
    const double hi = std::min(nodes[i + 1].r, b);
    sum += num::integrate(km, nodes[i].r, hi, 0.0, 1e-13, 8).value;
  }
  return 2 * kPi * sum;
}

inline TotalCurvature total_curvature(const PlaneProfile& p) {
  TotalCurvature t;
  const auto s = slope_at_infinity(p);
  t.by_integral = curvature_integral(p, p.r_max());
  t.slope_diverges = s.diverges;
  if (s.diverges) {
    t.by_slope = -kInf;
    // The integral must keep decreasing with the window.
    t.consistent = t.by_integral < curvature_integral(p, 0.5 * p.r_max());
  } else {
    t.by_slope = 2 * kPi * (1 - s.estimate);
    const double scale = 1 + std::abs(s.estimate);
    t.consistent = std::abs(t.by_slope - t.by_integral) <= 2 * kPi * (1e-6 * scale + 100 * p.tol() * scale);
  }
  return t;
}

}  // namespace vmp
