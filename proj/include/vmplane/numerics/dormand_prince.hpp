#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace vmp::num {

template <std::size_t N>
using Vec = std::array<double, N>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  double h0 = 0.0;  // 0: pick from the initial slope
  double hmax = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
};

enum class OdeStatus { reached, stopped, max_steps, step_underflow };

// One accepted step, handed to the observer. f0/f1 are the derivatives at the ends,
// which is enough for cubic Hermite dense output.
template <std::size_t N>
struct OdeStep {
  double t0, t1;
  Vec<N> y0, y1, f0, f1;
};

template <std::size_t N>
Vec<N> hermite3(const OdeStep<N>& s, double t) {
  const double h = s.t1 - s.t0, x = (t - s.t0) / h;
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = h00 * s.y0[i] + h10 * h * s.f0[i] + h01 * s.y1[i] + h11 * h * s.f1[i];
  return out;
}

// Dormand–Prince 5(4) with FSAL and a PI-free classic step controller.
// rhs(t, y) -> Vec<N>; obs(const OdeStep<N>&) -> bool (false stops the run).
// On return y holds the state at the last accepted time, written to *t_end.
template <std::size_t N, class Rhs, class Obs>
OdeStatus dopri5(Rhs&& rhs, double t0, Vec<N>& y, double t1, const OdeOptions& opt, Obs&& obs,
                 double* t_end = nullptr, double* h_io = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  auto finish = [&](OdeStatus s) {
    if (t_end) *t_end = t;
    return s;
  };
  if (!(t1 > t0)) return finish(OdeStatus::reached);

  Vec<N> k1 = rhs(t, y), k2, k3, k4, k5, k6, k7, yt, ynew;
  double h = (h_io && *h_io > 0) ? *h_io : opt.h0;
  if (!(h > 0)) {
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  const double span = t1 - t0;
  h = std::min({h, opt.hmax, span});

  for (long step = 0; step < opt.max_steps; ++step) {
    bool last = false;
    const double h_proposed = h;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    auto stage = [&](auto&& combo) {
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * combo(i);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; });
    k2 = rhs(t + c2 * h, yt);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    k3 = rhs(t + c3 * h, yt);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    k4 = rhs(t + c4 * h, yt);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    k5 = rhs(t + c5 * h, yt);
    stage([&](std::size_t i) {
      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    });
    k6 = rhs(t + h, yt);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const double tnew = last ? t1 : t + h;
    k7 = rhs(tnew, ynew);

    double err = 0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
      if (!std::isfinite(ynew[i]) || !std::isfinite(k7[i])) finite = false;
    }
    err = std::sqrt(err / N);
    if (!finite) err = 1e10;

    if (err <= 1.0) {
      OdeStep<N> s{t, tnew, y, ynew, k1, k7};
      t = tnew;
      y = ynew;
      k1 = k7;
      const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      const double hnext = std::min(h * fac, opt.hmax);
      if (h_io) *h_io = last ? std::max(hnext, std::min(h_proposed, opt.hmax)) : hnext;
      if (!obs(s)) return finish(OdeStatus::stopped);
      if (last) return finish(OdeStatus::reached);
      h = hnext;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
      if (h < 1e-15 * std::max(1.0, std::abs(t))) return finish(OdeStatus::step_underflow);
    }
  }
  return finish(OdeStatus::max_steps);
}

}  // namespace vmp::num
