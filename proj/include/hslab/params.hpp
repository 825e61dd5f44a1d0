#pragma once

#include "hslab/error.hpp"

namespace hslab {

/// Dimension and singularity strength of a Hardy-Sobolev problem.
///
/// The critical exponent 2(N-s)/(N-2) is always derived from (N, s) and is
/// never stored on its own.
class HSParams {
 public:
  HSParams(int N, double s);

  int dim() const noexcept { return N_; }
  double s() const noexcept { return s_; }

  /// 2*(s) = 2(N-s)/(N-2).
  double critical_exponent() const noexcept { return 2.0 * (N_ - s_) / (N_ - 2); }
  /// 2(N-s)/(2-s): the denominator power shared by every radial integrand.
  double bubble_power() const noexcept { return 2.0 * (N_ - s_) / (2.0 - s_); }
  /// 2/2*(s) = (N-2)/(N-s).
  double norm_exponent() const noexcept { return double(N_ - 2) / (N_ - s_); }
  /// Natural length scale of a bubble with parameter eps: eps^{1/(2-s)}.
  double bubble_radius(double eps) const;

 private:
  int N_;
  double s_;
};

}  // namespace hslab
