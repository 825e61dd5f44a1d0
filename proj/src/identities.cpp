#include "hslab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hslab/extremals.hpp"

namespace hslab {

const char* placement_name(Placement placement) noexcept {
  return placement == Placement::Interior ? "interior" : "boundary";
}

void SingularitySite::validate() const {
  if (!(s > 0.0 && s < 2.0)) throw Error(Errc::InvalidArgument, "site exponent s must lie in (0, 2)");
}

RecurrenceCheck beta_recurrence_check(double beta, const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const double s = p.s();
  if (!(beta >= 2.0 && beta <= 2.0 * (N - s) - 1.0)) {
    throw Error(Errc::OutOfRangeBeta, "beta = " + std::to_string(beta) + " outside [2, 2(N-s)-1]");
  }
  const double c = p.bubble_power();
  const double lhs = integrate_radial_power({beta - s, c, s}, cfg);
  const double rhs = (beta - 1.0) / (2.0 * N - beta - 1.0 - s) * integrate_radial_power({beta - 2.0, c, s}, cfg);
  return {lhs, rhs, std::abs(lhs - rhs) / std::abs(rhs)};
}

double ratio_limit(const HSParams& p) {
  const double N = p.dim();
  return (N - 3.0) / ((N + 1.0 - p.s()) * (N - 2.0) * (N - 2.0));
}

KsRatio ks_ratio(const HSParams& p, const QuadratureSettings& cfg) {
  const double N = p.dim();
  const WholeSpaceConstants k = whole_space_constants(p, cfg);
  return {1.0 / ((N - 2.0) * (N - 2.0)), (N - p.s()) * k.K1 / ((N - 2.0) * k.K0)};
}

double strict_gap(const HSParams& p) {
  const double N = p.dim();
  return 1.0 / ((N - 2.0) * (N - 2.0)) - ratio_limit(p);
}

double site_threshold(int N, const SingularitySite& site, const QuadratureSettings& cfg) {
  site.validate();
  const HSParams p(N, site.s);
  const double q = p.critical_exponent();
  const double Ss = whole_space_constants(p, cfg).Ss;
  const double denom = site.placement == Placement::Interior ? 2.0 * (N - site.s) : 4.0 * (N - site.s);
  return (2.0 - site.s) / denom * std::pow(Ss, q / (q - 2.0));
}

ThresholdReport ps_threshold(int N, std::span<const SingularitySite> sites, const QuadratureSettings& cfg) {
  if (sites.empty()) throw Error(Errc::EmptySiteList, "threshold needs at least one singularity");
  ThresholdReport report{{}, 0.0};
  for (const auto& site : sites) report.per_site.push_back({site, site_threshold(N, site, cfg)});
  report.overall = std::min_element(report.per_site.begin(), report.per_site.end(), [](const auto& x, const auto& y) {
                     return x.level < y.level;
                   })->level;
  return report;
}

double ConstantPath::value(double c) const {
  double v = 0.5 * lambda * volume * c * c;
  for (const auto& t : terms) v -= t.coefficient * std::pow(c, t.exponent) / t.exponent;
  return v;
}

double ConstantPath::derivative(double c) const {
  double v = lambda * volume * c;
  for (const auto& t : terms) v -= t.coefficient * std::pow(c, t.exponent - 1.0);
  return v;
}

double ConstantPath::closed_form_argmax() const {
  if (terms.size() != 1) throw Error(Errc::MixedExponents, "closed-form constant path needs a single exponent");
  if (!(lambda > 0.0)) throw Error(Errc::NonpositiveLambda, "constant path has an interior maximum only for lambda > 0");
  const auto& t = terms.front();
  return std::pow(lambda * volume / t.coefficient, 1.0 / (t.exponent - 2.0));
}

double ConstantPath::closed_form_max() const {
  const double c = closed_form_argmax();
  const double q = terms.front().exponent;
  return (0.5 - 1.0 / q) * lambda * volume * c * c;
}

ScanMaximum scan_constant_path(const ConstantPath& path, double c_hi, int samples) {
  if (samples < 2 || !(c_hi > 0.0)) throw Error(Errc::InvalidArgument, "scan needs c_hi > 0 and at least two samples");
  const double step = c_hi / samples;
  ScanMaximum best{step, path.value(step), step};
  for (int i = 2; i <= samples; ++i) {
    const double c = i * step;
    const double v = path.value(c);
    if (v > best.value) best = {c, v, step};
  }
  return best;
}

ScanMaximum maximize_constant_path(const ConstantPath& path) {
  if (path.terms.empty()) throw Error(Errc::InvalidArgument, "constant path needs at least one nonlinear term");
  if (!(path.lambda > 0.0)) return {0.0, 0.0, 0.0};
  // The derivative changes sign exactly once; grow the bracket until it does.
  double c_hi = 1.0;
  while (path.derivative(c_hi) > 0.0) c_hi *= 2.0;
  while (path.derivative(0.5 * c_hi) < 0.0 && c_hi > 1e-300) c_hi *= 0.5;
  constexpr int samples = 400;
  const ScanMaximum coarse = scan_constant_path(path, c_hi, samples);
  double a = std::max(coarse.argmax - coarse.step, 0.0);
  double b = coarse.argmax + coarse.step;
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = path.value(x1);
  double f2 = path.value(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = path.value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = path.value(x1);
    }
  }
  const double c = 0.5 * (a + b);
  return {c, path.value(c), coarse.step};
}

double lambda_existence_bound(double volume, double C1, std::span<const SingularitySite> sites, const HSParams& p,
                              const QuadratureSettings& cfg) {
  if (!(volume > 0.0) || !(C1 > 0.0)) throw Error(Errc::InvalidArgument, "volume and C1 must be positive");
  if (sites.empty()) throw Error(Errc::EmptySiteList, "existence bound needs at least one singularity");
  for (const auto& site : sites) {
    if (site.s != p.s()) throw Error(Errc::MixedExponents, "closed-form bound requires every site to share s");
  }
  const double threshold = ps_threshold(p.dim(), sites, cfg).overall;
  const double q = p.critical_exponent();
  // (1/2 - 1/q) x (x/C1)^{2/(q-2)} = threshold with x = lambda |Omega|.
  const double x = std::pow(threshold * std::pow(C1, 2.0 / (q - 2.0)) / (0.5 - 1.0 / q), (q - 2.0) / q);
  return x / volume;
}

double lambda_bound_by_scan(double volume, const std::vector<ConstantPath::Term>& terms, double threshold,
                            double rel_tol) {
  if (!(threshold > 0.0)) throw Error(Errc::InvalidArgument, "threshold must be positive");
  auto excess = [&](double lambda) {
    ConstantPath path{lambda, volume, terms};
    return maximize_constant_path(path).value - threshold;
  };
  double lo = 1e-8, hi = 1e8;
  if (excess(lo) > 0.0 || excess(hi) < 0.0) {
    throw Error(Errc::InvalidArgument, "existence bound is not bracketed by [1e-8, 1e8]");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi);
    if (excess(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace hslab
