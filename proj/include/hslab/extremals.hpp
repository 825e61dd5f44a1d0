#pragma once

#include <Eigen/Core>

#include "hslab/params.hpp"
#include "hslab/quadrature.hpp"

namespace hslab {

/// Base of the whole-space extremal profile: `Linear` is (a + |x|), the form
/// the profile is usually quoted in; `Power` is (a + |x|^{2-s}), the form
/// shared with the bubble U_eps. The two coincide at s = 1.
enum class GaBase { Linear, Power };

/// Whole-space energies of the unit bubble U_1 and the best constant they give.
struct WholeSpaceConstants {
  double K0;  ///< \int |grad U_1|^2
  double K1;  ///< \int U_1^{2*(s)} |x|^{-s}
  double Ss;  ///< K0 / K1^{(N-2)/(N-s)}
};

/// g_a(x) = (a(N-s)(N-2))^{(N-2)/(2(N-s))} (a + |x|)^{(2-N)/(2-s)}, or with
/// base a + |x|^{2-s} when `base == GaBase::Power`.
double g_a_value(const Eigen::Ref<const Eigen::VectorXd>& x, double a, const HSParams& p,
                 GaBase base = GaBase::Linear);
double g_a_radial(double r, double a, const HSParams& p, GaBase base = GaBase::Linear);
/// d/dr of g_a_radial, in closed form.
double g_a_radial_derivative(double r, double a, const HSParams& p, GaBase base = GaBase::Linear);

/// U_eps(x) = eps^{(N-2)/(2(2-s))} (eps + |x|^{2-s})^{(2-N)/(2-s)}.
double bubble_value(const Eigen::Ref<const Eigen::VectorXd>& x, double eps, const HSParams& p);
double bubble_radial(double r, double eps, const HSParams& p);
/// d/dr of bubble_radial, in closed form.
double bubble_radial_derivative(double r, double eps, const HSParams& p);

WholeSpaceConstants whole_space_constants(const HSParams& p, const QuadratureSettings& cfg = {});

/// \int |grad g_a|^2 / (\int g_a^{2*(s)} |x|^{-s})^{2/2*(s)} over R^N by
/// radial quadrature.
double rayleigh_quotient_check(double a, const HSParams& p, const QuadratureSettings& cfg = {},
                               GaBase base = GaBase::Linear);

/// Same quotient for U_eps; independent of eps.
double bubble_rayleigh_quotient(double eps, const HSParams& p, const QuadratureSettings& cfg = {});

}  // namespace hslab
