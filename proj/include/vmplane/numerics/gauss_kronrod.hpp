#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace vmp::num {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
  int evaluations = 0;
  bool nonfinite = false;  // the integrand returned inf/nan somewhere
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b, bool& nonfinite) {
  const double center = 0.5 * (a + b), half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx), f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * half;
  const double error = std::abs((resk - resg) * half);
  if (!std::isfinite(value) || !std::isfinite(error)) nonfinite = true;
  return {a, b, value, error};
}

}  // namespace detail

// Globally adaptive Gauss–Kronrod quadrature on a finite interval.
// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                     int max_panels = 4000) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  bool nonfinite = false;
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15(f, a, b, nonfinite));
  double total = heap.top().value, err = heap.top().error;
  int panels = 1;
  while (!nonfinite && err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         panels < max_panels) {
    const detail::Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (mid <= p.a || mid >= p.b) {  // interval exhausted at double precision
      heap.push(p);
      break;
    }
    const auto l = detail::gk15(f, p.a, mid, nonfinite);
    const auto r = detail::gk15(f, mid, p.b, nonfinite);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  // Recompute sums to avoid drift from incremental updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sign * total;
  out.abs_error = err;
  out.nonfinite = nonfinite;
  out.converged = !nonfinite && err <= std::max(abs_tol, rel_tol * std::abs(total));
  out.evaluations = 15 * (2 * panels - 1);
  return out;
}

}  // namespace vmp::num
