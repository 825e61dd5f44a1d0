#pragma once

#include <span>
#include <vector>

#include "hslab/params.hpp"
#include "hslab/quadrature.hpp"

namespace hslab {

/// Boundary patch around a boundary singularity placed at the origin: the
/// domain is {x_N > g(x')} with g(x') = 1/2 sum_i alpha_i x_i^2 exactly.
class BoundaryGeometry {
 public:
  BoundaryGeometry(std::vector<double> curvatures, double delta);

  /// Flat patch in dimension N.
  static BoundaryGeometry flat(int N, double delta) { return {std::vector<double>(N - 1, 0.0), delta}; }

  int dim() const noexcept { return static_cast<int>(curvatures_.size()) + 1; }
  const std::vector<double>& curvatures() const noexcept { return curvatures_; }
  double delta() const noexcept { return delta_; }
  /// Sum of principal curvatures.
  double mean_curvature() const noexcept { return mean_curvature_; }
  bool isotropic() const noexcept;

  double floor_height(std::span<const double> tangential) const;

 private:
  std::vector<double> curvatures_;
  double delta_;
  double mean_curvature_;
};

/// Radial cutoff: 1 on B_delta, 0 off B_{2 delta}, q(t) = 1 - t^3 (10 - 15 t + 6 t^2)
/// with t = (r - delta)/delta on the annulus.
struct CutoffSpec {
  double delta;

  double value(double r) const;
  double derivative(double r) const;
};

/// A singularity outside B_{3 delta}; only its distance and exponent matter.
struct FarSite {
  double distance;
  double s;
};

struct EnergyBreakdown {
  double eps = 0.0;
  double K0e = 0.0;  ///< \int |grad(eta U_eps)|^2
  double K1e = 0.0;  ///< \int (eta U_eps)^{2*} |x|^{-s}
  double K3e = 0.0;  ///< \int (eta U_eps)^2
  std::vector<double> K2e;  ///< per far site, weight bounded by (d - 2 delta)^{-s_i}
  double I_eps = 0.0;
  double II_eps = 0.0;

  double far_total() const;
};

/// Gradient energy of U_eps in the slab between x_N = 0 and the floor:
///   (N-2)^2 \int_{R^{N-1}} \int_0^{g(y') eps^{1/(2-s)}} |y|^{2-2s} (1+|y|^{2-s})^{-2(N-s)/(2-s)} dy_N dy'.
/// Angular directions of y' are resolved by a product Gauss-Legendre rule;
/// the radial direction is integrated adaptively to infinity.
double I_eps(double eps, const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg = {});

/// Weighted critical mass of U_eps in the same slab; integrand |y|^{-s} (1+|y|^{2-s})^{-2(N-s)/(2-s)}.
double II_eps(double eps, const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg = {});

/// lim eps^{-1/(2-s)} I(eps) = H (N-2)^2 / (2(N-1)) omega_{N-2} \int_0^inf r^{N+2-2s} (1+r^{2-s})^{-c} dr.
/// Divergent for N = 3.
double I_limit_coefficient(const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg = {});
/// lim eps^{-1/(2-s)} II(eps) = H / (2(N-1)) omega_{N-2} \int_0^inf r^{N-s} (1+r^{2-s})^{-c} dr.
double II_limit_coefficient(const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg = {});

/// Fraction-of-sphere measure: surface measure of {theta in S^{N-1} : r theta lies above the floor}.
double patch_sphere_measure(double r, const BoundaryGeometry& geom);

/// Direct quadrature of every energy of eta U_eps over the curved patch, for
/// any eps > 0.
EnergyBreakdown patch_energies(double eps, const BoundaryGeometry& geom, const CutoffSpec& cut,
                               std::span<const FarSite> far_sites, const HSParams& p,
                               const QuadratureSettings& cfg = {});

/// patch_energies restricted to the concentration regime eps^{1/(2-s)} <= delta/10.
EnergyBreakdown bubble_energies(double eps, const BoundaryGeometry& geom, const CutoffSpec& cut,
                                std::span<const FarSite> far_sites, const HSParams& p,
                                const QuadratureSettings& cfg = {});

struct SupT {
  double t_star;
  double value;
};

/// sup_{t>0} 1/2 (K0e + lambda K3e) t^2 - (K1e + sum K2e) t^{2*} / 2*, in closed form.
SupT sup_t_energy(const EnergyBreakdown& b, double lambda, const HSParams& p);

struct ThresholdRow {
  double eps;
  double sup_energy;
  double t_star;
  double margin;             ///< boundary threshold - sup_energy
  double normalized_margin;  ///< margin / eps^{1/(2-s)}
  EnergyBreakdown energies;
};

struct ThresholdInequalityReport {
  double threshold;
  std::vector<ThresholdRow> rows;
  /// Curvature is positive and every margin is positive.
  bool strict_margin;
};

ThresholdInequalityReport threshold_inequality_check(std::span<const double> eps_list, const BoundaryGeometry& geom,
                                                     const CutoffSpec& cut, std::span<const FarSite> far_sites,
                                                     double lambda, const HSParams& p,
                                                     const QuadratureSettings& cfg = {});

/// Least-squares slope of log(values) against log(eps).
double fit_loglog_slope(std::span<const double> eps, std::span<const double> values);

/// Least-squares fit deficit ~ c_log eps^{1/(2-s)} |ln eps| + c_lin eps^{1/(2-s)}.
struct LogDeficitFit {
  double c_log;
  double c_lin;
  double max_rel_residual;
};
LogDeficitFit fit_log_deficit(std::span<const double> eps, std::span<const double> deficit, double s);

/// Geometric grid first, first*ratio, ..., `count` points.
std::vector<double> geometric_grid(double first, double ratio, int count);

}  // namespace hslab
