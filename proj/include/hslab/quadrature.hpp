#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hslab/error.hpp"

namespace hslab {

struct QuadratureSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
  /// Improper integrals over (0, inf) are split here; the tail is mapped by u = 1/r.
  double split_radius = 1.0;

  void validate() const;
  QuadratureSettings with_split(double radius) const {
    QuadratureSettings out = *this;
    out.split_radius = radius;
    return out;
  }
};

/// r -> r^a / (1 + r^{2-s})^b on (0, inf).
struct RadialPowerIntegrand {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;

  bool convergent() const noexcept { return a > -1.0 && (2.0 - s) * b - a > 1.0; }
  double operator()(double r) const { return std::pow(r, a) * std::pow(1.0 + std::pow(r, 2.0 - s), -b); }
};

struct QuadEstimate {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussLegendreRule gauss_legendre(int n);

/// Axis-aligned box [lo, hi] in R^N.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair; abscissae are symmetric about 0 and
// xgk[7] == 0 is the centre. Odd entries of xgk are the Gauss nodes.
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
};

inline void check_finite(double v, double x) {
  if (!std::isfinite(v)) {
    throw Error(Errc::NonFinite, "integrand is not finite at x = " + std::to_string(x));
  }
}

// QUADPACK qk15 error heuristic.
template <class F>
Panel kronrod_panel(F& f, double lo, double hi) {
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(centre);
  check_finite(fc, centre);
  double resg = fc * wg[3];
  double resk = fc * wgk[7];
  double resabs = std::abs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    check_finite(f1, centre - dx);
    check_finite(f2, centre + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += wgk[j] * (f1 + f2);
    resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = wgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double ah = std::abs(half);
  const double result = resk * half;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * epmach)) err = std::max(epmach * 50.0 * resabs, err);
  return {lo, hi, result, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Panels are bisected in order of decreasing error estimate, ties broken by
/// position, and the final value is summed left to right, so the result is
/// bit-identical for identical inputs. The rule never samples the endpoints,
/// which admits integrable endpoint singularities.
template <class F>
QuadEstimate adaptive_gauss_kronrod(F&& f, double lo, double hi, const QuadratureSettings& cfg) {
  if (lo == hi) return {};
  if (hi < lo) {
    QuadEstimate flipped = adaptive_gauss_kronrod(f, hi, lo, cfg);
    flipped.value = -flipped.value;
    return flipped;
  }
  auto worse = [](const detail::Panel& x, const detail::Panel& y) {
    if (x.error != y.error) return x.error < y.error;
    return x.lo > y.lo;
  };
  std::vector<detail::Panel> heap;
  std::vector<detail::Panel> frozen;
  heap.reserve(64);
  heap.push_back(detail::kronrod_panel(f, lo, hi));
  double total = heap.front().value;
  double total_err = heap.front().error;
  int subdivisions = 0;
  auto within_tol = [&] { return total_err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
  while (!within_tol()) {
    if (heap.empty()) {
      throw Error(Errc::ToleranceNotMet, "panels reached machine resolution before tolerance was met");
    }
    if (subdivisions >= cfg.max_subdivisions) {
      throw Error(Errc::ToleranceNotMet, "exhausted " + std::to_string(cfg.max_subdivisions) +
                                             " subdivisions on [" + std::to_string(lo) + ", " +
                                             std::to_string(hi) + "], error estimate " +
                                             std::to_string(total_err));
    }
    std::pop_heap(heap.begin(), heap.end(), worse);
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      frozen.push_back(worst);
      continue;
    }
    const detail::Panel left = detail::kronrod_panel(f, worst.lo, mid);
    const detail::Panel right = detail::kronrod_panel(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
    ++subdivisions;
  }
  heap.insert(heap.end(), frozen.begin(), frozen.end());
  std::sort(heap.begin(), heap.end(), [](const detail::Panel& x, const detail::Panel& y) { return x.lo < y.lo; });
  QuadEstimate out;
  for (const auto& p : heap) {
    out.value += p.value;
    out.error += p.error;
  }
  out.subdivisions = subdivisions;
  return out;
}

template <class F>
double integrate_interval(F&& f, double lo, double hi, const QuadratureSettings& cfg) {
  return adaptive_gauss_kronrod(f, lo, hi, cfg).value;
}

/// Integral over [lo, hi] with 0 < lo < hi in the variable u = ln r; suited to
/// power-law integrands spanning several decades.
template <class F>
double integrate_log_interval(F&& f, double lo, double hi, const QuadratureSettings& cfg) {
  auto g = [&f](double u) {
    const double r = std::exp(u);
    return f(r) * r;
  };
  return integrate_interval(g, std::log(lo), std::log(hi), cfg);
}

/// Integral over [lo, inf) through u = 1/r, lo > 0.
template <class F>
double integrate_tail(F&& f, double lo, const QuadratureSettings& cfg) {
  auto g = [&f](double u) {
    const double r = 1.0 / u;
    return f(r) * r * r;
  };
  return integrate_interval(g, 0.0, 1.0 / lo, cfg);
}

/// Integral over (0, inf): [0, R] directly, [R, inf) mapped by u = 1/r, with
/// R = cfg.split_radius.
template <class F>
double integrate_half_line(F&& f, const QuadratureSettings& cfg) {
  cfg.validate();
  QuadratureSettings piece = cfg;
  piece.abs_tol = 0.5 * cfg.abs_tol;
  return integrate_interval(f, 0.0, cfg.split_radius, piece) + integrate_tail(f, cfg.split_radius, piece);
}

/// \int_0^inf r^a / (1 + r^{2-s})^b dr. Throws Divergent outside the
/// convergence region a > -1, (2-s) b - a > 1.
double integrate_radial_power(const RadialPowerIntegrand& f, const QuadratureSettings& cfg = {});

/// The two pieces integrate_radial_power adds up: [0, R] and the mapped tail.
struct SplitPieces {
  double head;
  double tail;
};
SplitPieces integrate_radial_power_pieces(const RadialPowerIntegrand& f, const QuadratureSettings& cfg);

/// Surface measure of the unit (N-1)-sphere, 2 pi^{N/2} / Gamma(N/2).
double sphere_surface_area(int N);

/// Tensor midpoint rule with cells_per_axis cells along each axis.
double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f, const Box& box, int cells_per_axis);

}  // namespace hslab
