#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vmplane/errors.hpp"
#include "vmplane/numerics/monotone_cubic.hpp"

namespace vmp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 on [0, 1]; C2 at both ends.
inline double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
inline double smoothstep5_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = t * (1.0 - t);
  return 30.0 * s * s;
}

struct DropParams {
  double depth = 0.0;  // mu
  double width = 1.0;  // w
};

enum class Extrapolation { none, constant, inverse_square };

// K_u(r) = 1/(4(r+1)^2) - u and its first two derivatives.
inline double ku_value(double u, double r) { return 0.25 / ((r + 1) * (r + 1)) - u; }
inline double ku_d1(double r) { return -0.5 / ((r + 1) * (r + 1) * (r + 1)); }
inline double ku_d2(double r) { return 1.5 / ((r + 1) * (r + 1) * (r + 1) * (r + 1)); }
// Zero of K_u: z_u = 1/(2 sqrt u) - 1.
inline double ku_zero(double u) { return 0.5 / std::sqrt(u) - 1.0; }

class CurvatureSpec;

namespace curv {

struct Constant {
  double k;
};
struct KuFamily {
  double u;
};
// max(K_u, 0) with the corner at z_u replaced by a quintic on [z-eps, z+eps].
struct SmoothedKu {
  double u, eps;
  double lo, hi;          // z - eps, z + eps
  double v0, d0, dd0;     // K_u and scaled derivatives at lo
};
struct Spliced {
  std::shared_ptr<const CurvatureSpec> base;
  double r0;
  DropParams drop;
};
struct Table {
  num::MonotoneCubic interp;
  Extrapolation extrapolation;
};
struct Expression {
  std::function<double(double)> f;
  std::function<double(double)> df;  // may be empty
  std::string label;
  double domain_end;
};

using Data = std::variant<Constant, KuFamily, SmoothedKu, Spliced, Table, Expression>;

}  // namespace curv

// Immutable description of K(r) on [0, infinity). Copies share state.
class CurvatureSpec {
 public:
  enum class Kind { constant, ku_family, smoothed_ku, spliced, table, expression };

  static CurvatureSpec constant(double k) {
    if (!std::isfinite(k)) throw InputError("constant curvature must be finite");
    return CurvatureSpec(curv::Constant{k});
  }

  static CurvatureSpec ku_family(double u) {
    if (!(u >= 0.0 && u <= 0.25)) throw InputError("ku_family requires u in [0, 1/4]");
    return CurvatureSpec(curv::KuFamily{u});
  }

  static CurvatureSpec smoothed_ku(double u, double eps) {
    if (!(u > 0.0 && u < 0.25)) throw InputError("smoothed_ku requires u in (0, 1/4)");
    const double z = ku_zero(u);
    if (!(eps > 0.0 && eps < z)) throw InputError("smoothed_ku requires 0 < epsilon < z_u");
    curv::SmoothedKu s{u, eps, z - eps, z + eps, 0, 0, 0};
    const double h = 2 * eps;
    s.v0 = ku_value(u, s.lo);
    s.d0 = ku_d1(s.lo) * h;
    s.dd0 = ku_d2(s.lo) * h * h;
    return CurvatureSpec(s);
  }

  static CurvatureSpec spliced(const CurvatureSpec& base, double r0, DropParams drop) {
    if (!(r0 >= 0.0) || !std::isfinite(r0)) throw InputError("spliced requires r0 >= 0");
    if (!(drop.depth >= 0.0) || !std::isfinite(drop.depth))
      throw InputError("drop depth must be >= 0");
    if (!(drop.width > 0.0) || !std::isfinite(drop.width)) throw InputError("drop width must be > 0");
    return CurvatureSpec(
        curv::Spliced{std::make_shared<const CurvatureSpec>(base), r0, drop});
  }

  static CurvatureSpec table(std::vector<double> r, std::vector<double> k,
                             Extrapolation ex = Extrapolation::constant) {
    if (r.empty() || r.front() != 0.0) throw InputError("table must start at r = 0");
    for (double v : k)
      if (!std::isfinite(v)) throw InputError("table curvature values must be finite");
    try {
      return CurvatureSpec(curv::Table{num::MonotoneCubic(std::move(r), std::move(k)), ex});
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("table: ") + e.what());
    }
  }

  // Opaque evaluator; not serializable.
  static CurvatureSpec expression(std::function<double(double)> f, std::string label = "expression",
                                  std::function<double(double)> df = {},
                                  double domain_end = kInf) {
    if (!f) throw InputError("expression needs an evaluator");
    return CurvatureSpec(curv::Expression{std::move(f), std::move(df), std::move(label), domain_end});
  }

  Kind kind() const { return static_cast<Kind>(data_->index()); }
  const curv::Data& data() const { return *data_; }

  double domain_end() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, curv::Table>)
            return d.extrapolation == Extrapolation::none ? d.interp.back() : kInf;
          else if constexpr (std::is_same_v<T, curv::Expression>)
            return d.domain_end;
          else if constexpr (std::is_same_v<T, curv::Spliced>)
            return d.base->domain_end();
          else
            return kInf;
        },
        *data_);
  }

  // K(r). No domain check; see eval_curvature for the checked entry point.
  double operator()(double r) const {
    return std::visit(
        [r](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, curv::Constant>) {
            return d.k;
          } else if constexpr (std::is_same_v<T, curv::KuFamily>) {
            return ku_value(d.u, r);
          } else if constexpr (std::is_same_v<T, curv::SmoothedKu>) {
            if (r <= d.lo) return ku_value(d.u, r);
            if (r >= d.hi) return 0.0;
            const double t = (r - d.lo) / (d.hi - d.lo), t2 = t * t, t3 = t2 * t;
            const double h0 = 1 - 10 * t3 + 15 * t3 * t - 6 * t3 * t2;
            const double h1 = t - 6 * t3 + 8 * t3 * t - 3 * t3 * t2;
            const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t3 * t - t3 * t2);
            return d.v0 * h0 + d.d0 * h1 + d.dd0 * h2;
          } else if constexpr (std::is_same_v<T, curv::Spliced>) {
            const double b = (*d.base)(r);
            if (r <= d.r0) return b;
            return b - d.drop.depth * smoothstep5((r - d.r0) / d.drop.width);
          } else if constexpr (std::is_same_v<T, curv::Table>) {
            if (r > d.interp.back()) {
              const double last = d.interp.y().back();
              if (d.extrapolation == Extrapolation::inverse_square) {
                const double q = d.interp.back() / r;
                return last * q * q;
              }
              return last;
            }
            double v, s;
            d.interp.eval(r, v, s);
            return v;
          } else {
            return d.f(r);
          }
        },
        *data_);
  }

  double derivative(double r) const {
    return std::visit(
        [this, r](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, curv::Constant>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, curv::KuFamily>) {
            return ku_d1(r);
          } else if constexpr (std::is_same_v<T, curv::SmoothedKu>) {
            if (r <= d.lo) return ku_d1(r);
            if (r >= d.hi) return 0.0;
            const double h = d.hi - d.lo, t = (r - d.lo) / h, t2 = t * t, t3 = t2 * t;
            const double g0 = -30 * t2 + 60 * t3 - 30 * t3 * t;
            const double g1 = 1 - 18 * t2 + 32 * t3 - 15 * t3 * t;
            const double g2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t3 * t);
            return (d.v0 * g0 + d.d0 * g1 + d.dd0 * g2) / h;
          } else if constexpr (std::is_same_v<T, curv::Spliced>) {
            const double b = d.base->derivative(r);
            if (r <= d.r0) return b;
            return b - d.drop.depth * smoothstep5_d((r - d.r0) / d.drop.width) / d.drop.width;
          } else if constexpr (std::is_same_v<T, curv::Table>) {
            if (r > d.interp.back()) {
              if (d.extrapolation == Extrapolation::inverse_square) {
                const double rl = d.interp.back();
                return -2.0 * d.interp.y().back() * rl * rl / (r * r * r);
              }
              return 0.0;
            }
            double v, s;
            d.interp.eval(r, v, s);
            return s;
          } else {
            if (d.df) return d.df(r);
            const double h = 1e-5 * std::max(1.0, r);
            if (r < h) return ((*this)(r + h) - (*this)(r)) / h;
            return ((*this)(r + h) - (*this)(r - h)) / (2 * h);
          }
        },
        *data_);
  }

  // Radii in (0, r_max) where K is only finitely smooth; the integrator lands on them.
  std::vector<double> breakpoints(double r_max) const {
    std::vector<double> out;
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, curv::SmoothedKu>) {
            out = {d.lo, d.hi};
          } else if constexpr (std::is_same_v<T, curv::Spliced>) {
            out = d.base->breakpoints(r_max);
            out.push_back(d.r0);
            out.push_back(d.r0 + d.drop.width);
          } else if constexpr (std::is_same_v<T, curv::Table>) {
            out = d.interp.x();
          }
        },
        *data_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove_if(out.begin(), out.end(), [&](double b) { return !(b > 0 && b < r_max); }),
              out.end());
    return out;
  }

  // (radius, value) such that K is exactly constant = value on [radius, infinity).
  std::optional<std::pair<double, double>> constant_beyond() const {
    return std::visit(
        [](const auto& d) -> std::optional<std::pair<double, double>> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, curv::Constant>) {
            return std::pair{0.0, d.k};
          } else if constexpr (std::is_same_v<T, curv::SmoothedKu>) {
            return std::pair{d.hi, 0.0};
          } else if constexpr (std::is_same_v<T, curv::Spliced>) {
            auto b = d.base->constant_beyond();
            if (!b) return std::nullopt;
            if (d.drop.depth == 0.0) return b;
            return std::pair{std::max(b->first, d.r0 + d.drop.width), b->second - d.drop.depth};
          } else if constexpr (std::is_same_v<T, curv::Table>) {
            const auto& y = d.interp.y();
            const auto& x = d.interp.x();
            const double last = y.back();
            if (d.extrapolation == Extrapolation::none) return std::nullopt;
            if (d.extrapolation == Extrapolation::inverse_square && last != 0.0) return std::nullopt;
            std::size_t i = y.size() - 1;
            while (i > 0 && y[i - 1] == last) --i;
            return std::pair{x[i], last};
          } else {
            return std::nullopt;
          }
        },
        *data_);
  }

  std::optional<double> flat_beyond() const {
    auto c = constant_beyond();
    if (c && c->second == 0.0) return c->first;
    return std::nullopt;
  }

 private:
  explicit CurvatureSpec(curv::Data d) : data_(std::make_shared<const curv::Data>(std::move(d))) {}
  std::shared_ptr<const curv::Data> data_;
};

// Checked evaluation.
inline double eval_curvature(const CurvatureSpec& spec, double r) {
  if (!(r >= 0.0)) throw DomainError("curvature evaluated at negative radius");
  if (r > spec.domain_end()) throw DomainError("radius beyond the table range and no extrapolation rule");
  return spec(r);
}

struct VonMangoldtReport {
  bool is_vm = true;
  std::optional<double> first_violation;
};

// Increases below this per grid cell are treated as roundoff.
inline constexpr double kVmTolerance = 1e-12;

inline VonMangoldtReport check_von_mangoldt(const CurvatureSpec& spec, double r_max, double grid_step) {
  if (!(r_max > 0) || !(grid_step > 0)) throw InputError("check_von_mangoldt: r_max and grid_step must be positive");
  r_max = std::min(r_max, spec.domain_end());
  const long n = std::max(1L, static_cast<long>(std::ceil(r_max / grid_step)));
  const double h = r_max / n;

  // Locate where the increase starts inside [a, b]: the running minimum before the first
  // sub-sample that rises above it.
  auto refine = [&](double a, double b) -> std::optional<double> {
    constexpr int kSub = 64;
    double run_min = spec(a), arg_min = a;
    for (int j = 1; j <= kSub; ++j) {
      const double x = a + (b - a) * j / kSub, v = spec(x);
      if (v > run_min + kVmTolerance) return arg_min;
      if (v < run_min) {
        run_min = v;
        arg_min = x;
      }
    }
    return std::nullopt;
  };

  // Opaque evaluators can hide a rise between grid points, so every cell is sub-sampled.
  const bool opaque = spec.kind() == CurvatureSpec::Kind::expression;
  auto bps = spec.breakpoints(r_max);
  std::size_t bi = 0;
  double prev = spec(0.0);
  for (long i = 1; i <= n; ++i) {
    const double a = (i - 1) * h, b = (i == n) ? r_max : i * h;
    const double cur = spec(b);
    bool suspect = opaque || cur - prev > kVmTolerance;
    if (!suspect && (spec.derivative(a) > 1e-9 || spec.derivative(b) > 1e-9)) suspect = true;
    while (bi < bps.size() && bps[bi] < a) ++bi;
    if (bi < bps.size() && bps[bi] <= b) suspect = true;
    if (suspect) {
      if (auto v = refine(a, b)) return {false, v};
    }
    prev = cur;
  }
  return {true, std::nullopt};
}

}  // namespace vmp
