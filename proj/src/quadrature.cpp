#include "hslab/quadrature.hpp"

#include <numbers>
#include <string>

namespace hslab {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Divergent: return "Divergent";
    case Errc::ToleranceNotMet: return "ToleranceNotMet";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::NonPositiveEps: return "NonPositiveEps";
    case Errc::OutOfRangeBeta: return "OutOfRangeBeta";
    case Errc::EmptySiteList: return "EmptySiteList";
    case Errc::MixedExponents: return "MixedExponents";
    case Errc::EpsTooLarge: return "EpsTooLarge";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonpositivePart: return "NonpositivePart";
    case Errc::NonpositiveLambda: return "NonpositiveLambda";
    case Errc::PositiveLambda: return "PositiveLambda";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

void QuadratureSettings::validate() const {
  if (!(std::isfinite(rel_tol) && rel_tol > 0.0)) throw Error(Errc::InvalidArgument, "rel_tol must be finite and positive");
  if (!(std::isfinite(abs_tol) && abs_tol > 0.0)) throw Error(Errc::InvalidArgument, "abs_tol must be finite and positive");
  if (max_subdivisions <= 0) throw Error(Errc::InvalidArgument, "max_subdivisions must be positive");
  if (!(std::isfinite(split_radius) && split_radius > 0.0)) {
    throw Error(Errc::InvalidArgument, "split_radius must be finite and positive");
  }
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "Gauss-Legendre rule needs at least one node");
  GaussLegendreRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace {

void require_convergent(const RadialPowerIntegrand& f) {
  if (!(f.s >= 0.0 && f.s < 2.0)) throw Error(Errc::InvalidArgument, "s must lie in [0, 2)");
  if (!f.convergent()) {
    throw Error(Errc::Divergent, "r^" + std::to_string(f.a) + "/(1+r^{2-s})^" + std::to_string(f.b) +
                                     " is not integrable on (0, inf)");
  }
}

}  // namespace

SplitPieces integrate_radial_power_pieces(const RadialPowerIntegrand& f, const QuadratureSettings& cfg) {
  cfg.validate();
  require_convergent(f);
  QuadratureSettings piece = cfg;
  piece.abs_tol = 0.5 * cfg.abs_tol;
  const double p = 2.0 - f.s;
  // Tail in u = 1/r: r^a (1 + r^p)^{-b} r^2 = u^{pb - a - 2} (1 + u^p)^{-b}.
  auto tail = [&](double u) { return std::pow(u, p * f.b - f.a - 2.0) * std::pow(1.0 + std::pow(u, p), -f.b); };
  return {integrate_interval(f, 0.0, cfg.split_radius, piece), integrate_interval(tail, 0.0, 1.0 / cfg.split_radius, piece)};
}

double integrate_radial_power(const RadialPowerIntegrand& f, const QuadratureSettings& cfg) {
  const SplitPieces pieces = integrate_radial_power_pieces(f, cfg);
  return pieces.head + pieces.tail;
}

double sphere_surface_area(int N) {
  if (N < 1) throw Error(Errc::InvalidArgument, "sphere dimension must be at least 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f, const Box& box, int cells_per_axis) {
  const int n = box.dim();
  if (n < 1 || box.hi.size() != n) throw Error(Errc::InvalidArgument, "box bounds must have matching positive dimension");
  if (cells_per_axis < 2) throw Error(Errc::InvalidArgument, "integrate_box needs cells_per_axis >= 2");
  const Eigen::VectorXd h = (box.hi - box.lo) / cells_per_axis;
  const double cell_volume = h.prod();
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n);
  double sum = 0.0;
  while (true) {
    for (int d = 0; d < n; ++d) x[d] = box.lo[d] + (idx[d] + 0.5) * h[d];
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "integrand is not finite at a midpoint");
    sum += v;
    int d = n - 1;
    while (d >= 0 && ++idx[d] == cells_per_axis) idx[d--] = 0;
    if (d < 0) break;
  }
  return sum * cell_volume;
}

}  // namespace hslab
