#pragma once

#include <span>
#include <vector>

#include "hslab/params.hpp"
#include "hslab/quadrature.hpp"

namespace hslab {

enum class Placement { Interior, Boundary };

const char* placement_name(Placement placement) noexcept;

struct SingularitySite {
  Placement placement = Placement::Interior;
  double s = 1.0;

  void validate() const;
};

struct SiteLevel {
  SingularitySite site;
  double level;
};

/// Per-site compactness levels and their minimum.
struct ThresholdReport {
  std::vector<SiteLevel> per_site;
  double overall;
};

struct RecurrenceCheck {
  double lhs;
  double rhs;
  double rel_diff;
};

struct KsRatio {
  double closed;
  double quadrature;
};

/// Integration-by-parts recurrence for the bubble moments:
///   \int r^{beta-s} (1+r^{2-s})^{-c} = (beta-1)/(2N-beta-1-s) \int r^{beta-2} (1+r^{2-s})^{-c},
/// c = 2(N-s)/(2-s), valid for 2 <= beta <= 2(N-s)-1. Both sides are
/// evaluated by quadrature.
RecurrenceCheck beta_recurrence_check(double beta, const HSParams& p, const QuadratureSettings& cfg = {});

/// lim II(eps)/I(eps) = (N-3) / ((N+1-s)(N-2)^2).
double ratio_limit(const HSParams& p);

/// (N-s) K1 / ((N-2) K0): closed form (N-2)^{-2} against quadrature.
KsRatio ks_ratio(const HSParams& p, const QuadratureSettings& cfg = {});

/// (N-2)^{-2} - ratio_limit(p); positive for every admissible (N, s).
double strict_gap(const HSParams& p);

/// Interior level (2-s)/(2(N-s)) S_s^{2*/(2*-2)}; half of that on the boundary.
double site_threshold(int N, const SingularitySite& site, const QuadratureSettings& cfg = {});

ThresholdReport ps_threshold(int N, std::span<const SingularitySite> sites, const QuadratureSettings& cfg = {});

/// J_lambda restricted to constant fields c:
///   1/2 lambda |Omega| c^2 - sum_i C_i c^{q_i} / q_i,
/// one (q_i, C_i) term per distinct exponent, C_i = \int_Omega |x - x_i|^{-s_i}.
struct ConstantPath {
  struct Term {
    double exponent;
    double coefficient;
  };
  double lambda = 0.0;
  double volume = 0.0;
  std::vector<Term> terms;

  double value(double c) const;
  double derivative(double c) const;
  /// Closed-form critical point (lambda|Omega|/C)^{1/(q-2)}; requires one term.
  double closed_form_argmax() const;
  double closed_form_max() const;
};

struct ScanMaximum {
  double argmax;
  double value;
  double step;
};

/// Uniform scan of c over (0, c_hi] with `samples` points.
ScanMaximum scan_constant_path(const ConstantPath& path, double c_hi, int samples);

/// Maximum over c > 0 of the constant path: bracketing scan followed by
/// golden-section refinement. Works for mixed exponents.
ScanMaximum maximize_constant_path(const ConstantPath& path);

/// Lambda at which the constant-path maximum reaches the overall threshold,
/// in closed form. All sites must share p.s().
double lambda_existence_bound(double volume, double C1, std::span<const SingularitySite> sites, const HSParams& p,
                              const QuadratureSettings& cfg = {});

/// Same bound found by bisection on lambda in [1e-8, 1e8] against the
/// numerically maximized constant path; usable for mixed exponents.
double lambda_bound_by_scan(double volume, const std::vector<ConstantPath::Term>& terms, double threshold,
                            double rel_tol = 1e-10);

}  // namespace hslab
