#include "hslab/boundary_energy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "hslab/extremals.hpp"
#include "hslab/identities.hpp"

namespace hslab {

BoundaryGeometry::BoundaryGeometry(std::vector<double> curvatures, double delta)
    : curvatures_(std::move(curvatures)), delta_(delta) {
  if (curvatures_.size() < 2) throw Error(Errc::InvalidArgument, "boundary patch needs N-1 >= 2 principal curvatures");
  if (!(delta_ > 0.0)) throw Error(Errc::InvalidArgument, "patch radius delta must be positive");
  for (double a : curvatures_) {
    if (!std::isfinite(a)) throw Error(Errc::InvalidArgument, "principal curvatures must be finite");
  }
  mean_curvature_ = std::accumulate(curvatures_.begin(), curvatures_.end(), 0.0);
}

bool BoundaryGeometry::isotropic() const noexcept {
  return std::all_of(curvatures_.begin(), curvatures_.end(), [&](double a) { return a == curvatures_.front(); });
}

double BoundaryGeometry::floor_height(std::span<const double> tangential) const {
  if (tangential.size() != curvatures_.size()) throw Error(Errc::ShapeMismatch, "tangential point has wrong dimension");
  double h = 0.0;
  for (std::size_t i = 0; i < curvatures_.size(); ++i) h += curvatures_[i] * tangential[i] * tangential[i];
  return 0.5 * h;
}

double CutoffSpec::value(double r) const {
  if (r <= delta) return 1.0;
  if (r >= 2.0 * delta) return 0.0;
  const double t = (r - delta) / delta;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double CutoffSpec::derivative(double r) const {
  if (r <= delta || r >= 2.0 * delta) return 0.0;
  const double t = (r - delta) / delta;
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / delta;
}

double EnergyBreakdown::far_total() const { return std::accumulate(K2e.begin(), K2e.end(), 0.0); }

namespace {

// Directions on S^{m-1} (m = N-1 tangential dimensions) paired with the
// quadratic form G(theta) = 1/2 sum alpha_i theta_i^2. g is even in every
// coordinate, so only the positive orthant is sampled.
struct AngularNode {
  double form;
  double weight;
};

std::vector<AngularNode> angular_rule(const BoundaryGeometry& geom) {
  const int m = geom.dim() - 1;
  const double area = sphere_surface_area(m);
  const auto& alpha = geom.curvatures();
  if (geom.isotropic()) return {{0.5 * alpha.front(), area}};
  const int angles = m - 1;
  const int n = angles <= 2 ? 24 : 14;
  const GaussLegendreRule gl = gauss_legendre(n);
  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<AngularNode> out;
  std::vector<int> idx(angles, 0);
  std::vector<double> theta(m);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    double sin_prod = 1.0;
    for (int k = 0; k < angles; ++k) {
      const double phi = 0.25 * std::numbers::pi * (gl.nodes[idx[k]] + 1.0);
      weight *= 0.5 * half_pi * gl.weights[idx[k]] * std::pow(std::sin(phi), m - 2 - k);
      theta[k] = sin_prod * std::cos(phi);
      sin_prod *= std::sin(phi);
    }
    theta[m - 1] = sin_prod;
    double form = 0.0;
    for (int i = 0; i < m; ++i) form += alpha[i] * theta[i] * theta[i];
    out.push_back({0.5 * form, weight});
    total += weight;
    int d = angles - 1;
    while (d >= 0 && ++idx[d] == n) idx[d--] = 0;
    if (d < 0) break;
  }
  // Normalize the orthant weights to the exact sphere area.
  for (auto& node : out) node.weight *= area / total;
  return out;
}

// \int_0^inf rho^{m-1} (1/kappa) \int_0^{kappa rho^2} f(sqrt(rho^2 + t^2)) dt drho for kappa > 0.
template <class F>
double slab_radial_integral(F&& f, int m, double kappa, const QuadratureSettings& cfg) {
  QuadratureSettings inner = cfg;
  inner.rel_tol = 0.1 * cfg.rel_tol;
  inner.abs_tol = 1e-300;
  auto outer = [&](double rho) {
    if (rho == 0.0) return 0.0;
    const double height = kappa * rho * rho;
    auto column = [&](double t) { return f(std::sqrt(rho * rho + t * t)); };
    return std::pow(rho, m - 1) * integrate_interval(column, 0.0, height, inner) / kappa;
  };
  const double b1 = std::min(1.0, 1.0 / kappa);
  const double b2 = std::max(1.0, 1.0 / kappa);
  QuadratureSettings piece = cfg;
  piece.abs_tol = cfg.abs_tol / 3.0;
  double total = integrate_interval(outer, 0.0, b1, piece);
  if (b2 > b1) total += integrate_log_interval(outer, b1, b2, piece);
  total += integrate_tail(outer, b2, piece);
  return total;
}

template <class F>
double slab_integral(F&& f, double eps, const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg) {
  if (geom.dim() != p.dim()) throw Error(Errc::ShapeMismatch, "geometry dimension differs from N");
  const double tau = p.bubble_radius(eps);
  const int m = p.dim() - 1;
  double total = 0.0;
  for (const auto& node : angular_rule(geom)) {
    const double kappa = tau * node.form;
    if (kappa == 0.0) continue;
    // The slab below a negative floor carries a negative sign.
    const double sign = kappa > 0.0 ? 1.0 : -1.0;
    total += node.weight * sign * std::abs(kappa) * slab_radial_integral(f, m, std::abs(kappa), cfg);
  }
  return total;
}

}  // namespace

double I_eps(double eps, const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg) {
  const double s = p.s();
  const double c = p.bubble_power();
  const double scale = (p.dim() - 2.0) * (p.dim() - 2.0);
  auto f = [&](double r) { return scale * std::pow(r, 2.0 - 2.0 * s) * std::pow(1.0 + std::pow(r, 2.0 - s), -c); };
  return slab_integral(f, eps, geom, p, cfg);
}

double II_eps(double eps, const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg) {
  const double s = p.s();
  const double c = p.bubble_power();
  auto f = [&](double r) { return std::pow(r, -s) * std::pow(1.0 + std::pow(r, 2.0 - s), -c); };
  return slab_integral(f, eps, geom, p, cfg);
}

double I_limit_coefficient(const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const double s = p.s();
  return geom.mean_curvature() * (N - 2.0) * (N - 2.0) / (2.0 * (N - 1.0)) * sphere_surface_area(p.dim() - 1) *
         integrate_radial_power({N + 2.0 - 2.0 * s, p.bubble_power(), s}, cfg);
}

double II_limit_coefficient(const BoundaryGeometry& geom, const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const double s = p.s();
  return geom.mean_curvature() / (2.0 * (N - 1.0)) * sphere_surface_area(p.dim() - 1) *
         integrate_radial_power({N - s, p.bubble_power(), s}, cfg);
}

namespace {

// \int_0^phi sin^n.
double sine_power_integral(int n, double phi) {
  if (n == 0) return phi;
  if (n == 1) return 1.0 - std::cos(phi);
  return -std::pow(std::sin(phi), n - 1) * std::cos(phi) / n + (n - 1.0) / n * sine_power_integral(n - 2, phi);
}

// Polar angle (from +x_N) where the sphere of radius r crosses the floor along
// a tangential direction with form value G: cos phi = r G sin^2 phi.
double crossing_angle(double r, double G) {
  const double rg = r * G;
  return std::acos(2.0 * rg / (1.0 + std::sqrt(1.0 + 4.0 * rg * rg)));
}

class SphereMeasure {
 public:
  explicit SphereMeasure(const BoundaryGeometry& geom) : rule_(angular_rule(geom)), n_(geom.dim() - 2) {}

  double operator()(double r) const {
    double total = 0.0;
    for (const auto& node : rule_) total += node.weight * sine_power_integral(n_, crossing_angle(r, node.form));
    return total;
  }

 private:
  std::vector<AngularNode> rule_;
  int n_;
};

}  // namespace

double patch_sphere_measure(double r, const BoundaryGeometry& geom) { return SphereMeasure(geom)(r); }

EnergyBreakdown patch_energies(double eps, const BoundaryGeometry& geom, const CutoffSpec& cut,
                               std::span<const FarSite> far_sites, const HSParams& p, const QuadratureSettings& cfg) {
  cfg.validate();
  if (geom.dim() != p.dim()) throw Error(Errc::ShapeMismatch, "geometry dimension differs from N");
  if (!(cut.delta > 0.0)) throw Error(Errc::InvalidArgument, "cutoff radius must be positive");
  for (const auto& site : far_sites) {
    if (!(site.distance >= 3.0 * cut.delta)) {
      throw Error(Errc::InvalidArgument, "far singularity must lie outside B_{3 delta}");
    }
    if (!(site.s > 0.0 && site.s < 2.0)) throw Error(Errc::InvalidArgument, "far site exponent must lie in (0, 2)");
  }
  const double tau = p.bubble_radius(eps);
  const double N = p.dim();
  const double s = p.s();
  const double q = p.critical_exponent();
  const double k = (2.0 - N) / (2.0 - s);
  const SphereMeasure sigma(geom);

  // Bubble in scaled variables: U_eps(tau y) = tau^{-(N-2)/2} V(y).
  auto V = [&](double y) { return std::pow(1.0 + std::pow(y, 2.0 - s), k); };
  auto dV = [&](double y) { return (2.0 - N) * std::pow(y, 1.0 - s) * std::pow(1.0 + std::pow(y, 2.0 - s), k - 1.0); };

  const double inner = cut.delta / tau;
  const double outer = 2.0 * cut.delta / tau;
  auto integrate_scaled = [&](auto&& integrand) {
    auto g = [&](double y) {
      if (y == 0.0) return 0.0;
      return integrand(y) * std::pow(y, N - 1.0) * sigma(tau * y);
    };
    QuadratureSettings piece = cfg;
    piece.abs_tol = cfg.abs_tol / 3.0;
    const double b1 = std::min(1.0, inner);
    double total = integrate_interval(g, 0.0, b1, piece);
    if (inner > b1) total += integrate_log_interval(g, b1, inner, piece);
    total += integrate_interval(g, inner, outer, piece);
    return total;
  };

  EnergyBreakdown out;
  out.eps = eps;
  out.K0e = integrate_scaled([&](double y) {
    const double r = tau * y;
    const double d = tau * cut.derivative(r) * V(y) + cut.value(r) * dV(y);
    return d * d;
  });
  out.K1e = integrate_scaled([&](double y) { return std::pow(cut.value(tau * y) * V(y), q) * std::pow(y, -s); });
  out.K3e = tau * tau * integrate_scaled([&](double y) {
              const double u = cut.value(tau * y) * V(y);
              return u * u;
            });
  if (!far_sites.empty()) {
    const double mass = std::pow(tau, s) * integrate_scaled([&](double y) { return std::pow(cut.value(tau * y) * V(y), q); });
    for (const auto& site : far_sites) out.K2e.push_back(std::pow(site.distance - 2.0 * cut.delta, -site.s) * mass);
  }
  out.I_eps = I_eps(eps, geom, p, cfg);
  out.II_eps = II_eps(eps, geom, p, cfg);
  return out;
}

EnergyBreakdown bubble_energies(double eps, const BoundaryGeometry& geom, const CutoffSpec& cut,
                                std::span<const FarSite> far_sites, const HSParams& p, const QuadratureSettings& cfg) {
  const double tau = p.bubble_radius(eps);
  if (tau > cut.delta / 10.0) {
    throw Error(Errc::EpsTooLarge, "eps^{1/(2-s)} = " + std::to_string(tau) + " exceeds delta/10 = " +
                                       std::to_string(cut.delta / 10.0));
  }
  return patch_energies(eps, geom, cut, far_sites, p, cfg);
}

SupT sup_t_energy(const EnergyBreakdown& b, double lambda, const HSParams& p) {
  const double A = b.K0e + lambda * b.K3e;
  const double B = b.K1e + b.far_total();
  if (!(B > 0.0)) throw Error(Errc::DegenerateDenominator, "K1e + sum K2e must be positive");
  if (!(A > 0.0)) return {0.0, 0.0};
  const double q = p.critical_exponent();
  const double t = std::pow(A / B, 1.0 / (q - 2.0));
  return {t, (0.5 - 1.0 / q) * A * t * t};
}

ThresholdInequalityReport threshold_inequality_check(std::span<const double> eps_list, const BoundaryGeometry& geom,
                                                     const CutoffSpec& cut, std::span<const FarSite> far_sites,
                                                     double lambda, const HSParams& p, const QuadratureSettings& cfg) {
  ThresholdInequalityReport report;
  report.threshold = site_threshold(p.dim(), {Placement::Boundary, p.s()}, cfg);
  bool all_positive = !eps_list.empty();
  for (double eps : eps_list) {
    ThresholdRow row;
    row.eps = eps;
    row.energies = bubble_energies(eps, geom, cut, far_sites, p, cfg);
    const SupT sup = sup_t_energy(row.energies, lambda, p);
    row.sup_energy = sup.value;
    row.t_star = sup.t_star;
    row.margin = report.threshold - sup.value;
    row.normalized_margin = row.margin / p.bubble_radius(eps);
    all_positive = all_positive && row.margin > 0.0;
    report.rows.push_back(std::move(row));
  }
  report.strict_margin = geom.mean_curvature() > 0.0 && all_positive;
  return report;
}

double fit_loglog_slope(std::span<const double> eps, std::span<const double> values) {
  if (eps.size() != values.size() || eps.size() < 2) {
    throw Error(Errc::InvalidArgument, "slope fit needs two or more matching samples");
  }
  const std::size_t n = eps.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0 && values[i] > 0.0)) throw Error(Errc::InvalidArgument, "log-log fit needs positive data");
    mx += std::log(eps[i]);
    my += std::log(values[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(eps[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

LogDeficitFit fit_log_deficit(std::span<const double> eps, std::span<const double> deficit, double s) {
  if (eps.size() != deficit.size() || eps.size() < 3) {
    throw Error(Errc::InvalidArgument, "log-deficit fit needs three or more matching samples");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(eps.size());
  Eigen::MatrixXd basis(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tau = std::pow(eps[i], 1.0 / (2.0 - s));
    basis(i, 0) = tau * std::abs(std::log(eps[i]));
    basis(i, 1) = tau;
    rhs[i] = deficit[i];
  }
  // Scale rows so every sample carries equal relative weight.
  const Eigen::VectorXd row_scale = rhs.cwiseAbs().cwiseInverse();
  const Eigen::MatrixXd A = row_scale.asDiagonal() * basis;
  const Eigen::VectorXd b = row_scale.asDiagonal() * rhs;
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd fitted = basis * coef;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(fitted[i] - rhs[i]) / std::abs(rhs[i]));
  return {coef[0], coef[1], worst};
}

std::vector<double> geometric_grid(double first, double ratio, int count) {
  if (count < 1 || !(first > 0.0) || !(ratio > 0.0)) throw Error(Errc::InvalidArgument, "bad geometric grid");
  std::vector<double> out(count);
  out[0] = first;
  for (int i = 1; i < count; ++i) out[i] = out[i - 1] * ratio;
  return out;
}

}  // namespace hslab
