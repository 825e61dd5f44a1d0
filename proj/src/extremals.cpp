#include "hslab/extremals.hpp"

#include <cmath>
#include <string>

namespace hslab {

HSParams::HSParams(int N, double s) : N_(N), s_(s) {
  if (N < 3) throw Error(Errc::InvalidArgument, "dimension N must be at least 3, got " + std::to_string(N));
  if (!(s > 0.0 && s < 2.0)) throw Error(Errc::InvalidArgument, "s must lie in (0, 2), got " + std::to_string(s));
}

double HSParams::bubble_radius(double eps) const {
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEps, "eps must be positive");
  return std::pow(eps, 1.0 / (2.0 - s_));
}

namespace {

double profile_exponent(const HSParams& p) { return (2.0 - p.dim()) / (2.0 - p.s()); }

double ga_prefactor(double a, const HSParams& p) {
  const double N = p.dim();
  return std::pow(a * (N - p.s()) * (N - 2.0), (N - 2.0) / (2.0 * (N - p.s())));
}

double ga_base_power(const HSParams& p, GaBase base) { return base == GaBase::Linear ? 1.0 : 2.0 - p.s(); }

void require_scale(double a) {
  if (!(a > 0.0)) throw Error(Errc::NonPositiveScale, "profile scale a must be positive");
}

void require_eps(double eps) {
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEps, "bubble parameter eps must be positive");
}

}  // namespace

double g_a_radial(double r, double a, const HSParams& p, GaBase base) {
  require_scale(a);
  const double m = ga_base_power(p, base);
  return ga_prefactor(a, p) * std::pow(a + std::pow(r, m), profile_exponent(p));
}

double g_a_radial_derivative(double r, double a, const HSParams& p, GaBase base) {
  require_scale(a);
  const double m = ga_base_power(p, base);
  const double k = profile_exponent(p);
  return ga_prefactor(a, p) * k * m * std::pow(r, m - 1.0) * std::pow(a + std::pow(r, m), k - 1.0);
}

double g_a_value(const Eigen::Ref<const Eigen::VectorXd>& x, double a, const HSParams& p, GaBase base) {
  return g_a_radial(x.norm(), a, p, base);
}

double bubble_radial(double r, double eps, const HSParams& p) {
  require_eps(eps);
  const double s = p.s();
  const double N = p.dim();
  return std::pow(eps, (N - 2.0) / (2.0 * (2.0 - s))) * std::pow(eps + std::pow(r, 2.0 - s), profile_exponent(p));
}

double bubble_radial_derivative(double r, double eps, const HSParams& p) {
  require_eps(eps);
  const double s = p.s();
  const double N = p.dim();
  // (2-N) eps^{(N-2)/(2(2-s))} r^{1-s} (eps + r^{2-s})^{-(N-s)/(2-s)}
  return (2.0 - N) * std::pow(eps, (N - 2.0) / (2.0 * (2.0 - s))) * std::pow(r, 1.0 - s) *
         std::pow(eps + std::pow(r, 2.0 - s), -(N - s) / (2.0 - s));
}

double bubble_value(const Eigen::Ref<const Eigen::VectorXd>& x, double eps, const HSParams& p) {
  return bubble_radial(x.norm(), eps, p);
}

WholeSpaceConstants whole_space_constants(const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const double s = p.s();
  const double b = p.bubble_power();
  const double area = sphere_surface_area(p.dim());
  const double K0 = (N - 2.0) * (N - 2.0) * area * integrate_radial_power({N + 1.0 - 2.0 * s, b, s}, cfg);
  const double K1 = area * integrate_radial_power({N - 1.0 - s, b, s}, cfg);
  return {K0, K1, K0 / std::pow(K1, p.norm_exponent())};
}

namespace {

template <class Profile, class Derivative>
double radial_quotient(Profile&& u, Derivative&& du, const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const double q = p.critical_exponent();
  auto dirichlet = [&](double r) {
    const double d = du(r);
    return d * d * std::pow(r, N - 1.0);
  };
  auto weighted = [&](double r) { return std::pow(u(r), q) * std::pow(r, N - 1.0 - p.s()); };
  const double area = sphere_surface_area(p.dim());
  const double num = area * integrate_half_line(dirichlet, cfg);
  const double den = area * integrate_half_line(weighted, cfg);
  return num / std::pow(den, 2.0 / q);
}

}  // namespace

double rayleigh_quotient_check(double a, const HSParams& p, const QuadratureSettings& cfg, GaBase base) {
  require_scale(a);
  // The profile varies on the length scale a^{1/m}; split there.
  const double scale = std::pow(a, 1.0 / ga_base_power(p, base));
  return radial_quotient([&](double r) { return g_a_radial(r, a, p, base); },
                         [&](double r) { return g_a_radial_derivative(r, a, p, base); }, p, cfg.with_split(scale));
}

double bubble_rayleigh_quotient(double eps, const HSParams& p, const QuadratureSettings& cfg) {
  const double scale = p.bubble_radius(eps);
  return radial_quotient([&](double r) { return bubble_radial(r, eps, p); },
                         [&](double r) { return bubble_radial_derivative(r, eps, p); }, p, cfg.with_split(scale));
}

}  // namespace hslab
