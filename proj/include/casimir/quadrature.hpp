#pragma once

// Numerical integration and summation helpers shared by the physics modules.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

namespace casimir {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;      // absolute error estimate
  int evaluations = 0;
  bool converged = true;
};

struct GaussRule {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};

/// Gauss-Laguerre rule for Int_0^inf e^{-t} g(t) dt, built by Golub-Welsch.
GaussRule gauss_laguerre(int n);

/// Sum with a fixed binary-tree reduction order, so results do not depend on how the
/// terms were produced.
double pairwise_sum(std::span<const double> terms);

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kronrod_w[7];
  double gauss = fc * gauss_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_x[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kronrod_w[j] * sum;
    if (j % 2 == 1) gauss += gauss_w[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b]. The interval is split
/// into `initial_panels` equal pieces and the panel with the largest error is bisected until
/// the total error is below max(abs_tol, rel_tol * |I|) or `max_panels` is reached.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                              int max_panels = 500, int initial_panels = 1) {
  std::priority_queue<detail::Panel> panels;
  const int start = std::max(1, initial_panels);
  const double width = (b - a) / start;
  for (int i = 0; i < start; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == start) ? b : a + (i + 1) * width;
    panels.push(detail::gauss_kronrod15(f, lo, hi));
  }
  int count = start;
  auto resum = [&panels](double& value, double& error) {
    auto copy = panels;
    value = error = 0.0;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  };
  double value = 0.0, error = 0.0;
  resum(value, error);
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && count < max_panels) {
    const detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Panel left = detail::gauss_kronrod15(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    error = std::max(error, 0.0);
    panels.push(left);
    panels.push(right);
    ++count;
  }
  if (count > start) resum(value, error);
  QuadResult out;
  out.value = value;
  out.error = error;
  out.evaluations = 15 * (2 * count - start);
  out.converged = error <= std::max(abs_tol, rel_tol * std::abs(value));
  return out;
}

}  // namespace casimir
