#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <variant>
#include <vector>

#include "hslab/identities.hpp"
#include "hslab/quadrature.hpp"

namespace hslab {

/// Uniform vertex-centred grid on an axis-aligned box. Nodes sit on the box
/// faces; node values are stored row-major (last axis fastest).
class DomainGrid {
 public:
  DomainGrid(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<int> nodes_per_axis);

  /// Cube [lo, hi]^N with n nodes per axis.
  static DomainGrid cube(int N, double lo, double hi, int n);

  int dim() const noexcept { return static_cast<int>(nodes_.size()); }
  Eigen::Index size() const noexcept { return size_; }
  int nodes(int axis) const { return nodes_[axis]; }
  const std::vector<int>& nodes_per_axis() const noexcept { return nodes_; }
  const Eigen::VectorXd& lo() const noexcept { return lo_; }
  const Eigen::VectorXd& hi() const noexcept { return hi_; }
  const Eigen::VectorXd& spacing() const noexcept { return spacing_; }
  Eigen::Index stride(int axis) const { return strides_[axis]; }
  double volume() const { return (hi_ - lo_).prod(); }
  Box box() const { return {lo_, hi_}; }

  void unravel(Eigen::Index idx, std::span<int> multi) const;
  Eigen::VectorXd position(Eigen::Index idx) const;
  /// Volume of the node's dual cell (half and quarter cells on faces and edges).
  double dual_volume(Eigen::Index idx) const;
  Eigen::VectorXd dual_volumes() const;

 private:
  Eigen::VectorXd lo_, hi_, spacing_;
  std::vector<int> nodes_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index size_;
};

struct Singularity {
  Eigen::VectorXd location;
  double s = 1.0;
};

/// Boundary when the location is within half a cell of a face.
Placement classify_placement(const DomainGrid& grid, const Singularity& sing);

struct ProblemConfig {
  DomainGrid grid;
  double lambda;
  std::vector<Singularity> singularities;
};

using DiscreteField = Eigen::VectorXd;

/// Dual-cell average of |x - x_i|^{-s_i}: refinement^N midpoint subcells on
/// nodes within two cells of x_i (per axis), point values elsewhere.
Eigen::VectorXd singular_weight(const DomainGrid& grid, const Singularity& sing, int refinement = 8);

/// A ProblemConfig with its discretization assembled: dual volumes, singular
/// weights and the Neumann stiffness matrix. Construction validates the
/// configuration; lambda may be of any sign here, the solver insists on
/// lambda > 0.
class DiscreteProblem {
 public:
  explicit DiscreteProblem(ProblemConfig cfg, int refinement = 8);

  const ProblemConfig& config() const noexcept { return cfg_; }
  const DomainGrid& grid() const noexcept { return cfg_.grid; }
  double lambda() const noexcept { return cfg_.lambda; }
  const std::vector<Singularity>& singularities() const noexcept { return cfg_.singularities; }
  const std::vector<Placement>& placements() const noexcept { return placements_; }
  std::vector<SingularitySite> sites() const;

  /// Symmetric stiffness matrix K with u^T K u = sum over edges of the dual-weighted squared difference quotient.
  const Eigen::SparseMatrix<double>& stiffness() const noexcept { return stiffness_; }
  const Eigen::VectorXd& volumes() const noexcept { return volumes_; }
  const Eigen::VectorXd& weight(std::size_t site) const { return weights_.at(site); }
  double exponent(std::size_t site) const { return exponents_.at(site); }
  /// sum_n V_n w_{i,n}, the discrete \int_Omega |x - x_i|^{-s_i}.
  double weighted_volume(std::size_t site) const;
  /// Constant-field restriction of the discrete energy, one term per distinct exponent.
  ConstantPath constant_path() const;

  DiscreteProblem with_lambda(double lambda) const;

 private:
  ProblemConfig cfg_;
  std::vector<Placement> placements_;
  std::vector<Eigen::VectorXd> weights_;
  std::vector<double> exponents_;
  Eigen::VectorXd volumes_;
  Eigen::SparseMatrix<double> stiffness_;
};

/// Ghost-node discrete Laplacian at one node, with reflected neighbours across faces.
double ghost_laplacian(const DiscreteField& u, const DomainGrid& grid, Eigen::Index idx);

/// 1/2 (|grad u|^2 + lambda u^2) - sum_i u_+^{q_i} w_i / q_i, summed with dual volumes.
double energy(const DiscreteField& u, const DiscreteProblem& problem);

/// Exact derivative of `energy` with respect to node values: <G, phi> = dE(u)[phi].
DiscreteField gradient(const DiscreteField& u, const DiscreteProblem& problem);

/// gradient / dual volume: the pointwise discrete -Delta u + lambda u - sum w_i u_+^{q_i-1}.
DiscreteField residual(const DiscreteField& u, const DiscreteProblem& problem);

/// t > 0 maximizing energy(t u), i.e. the ray's crossing of the Nehari set.
double nehari_scale(const DiscreteField& u, const DiscreteProblem& problem);

struct PositivityCheck {
  double min_value;
  bool positive;
};
PositivityCheck positivity_check(const DiscreteField& u);

/// For lambda <= 0 every positive constant has negative energy.
bool negative_lambda_sanity(const DiscreteProblem& problem, std::span<const double> c_samples);

/// Bubble U_eps centred on singularity `site`.
struct InitBubble {
  std::size_t site;
  double eps;
};
struct InitConstant {
  double value;
};
struct InitCustom {
  DiscreteField field;
};
using SolverInit = std::variant<InitBubble, InitConstant, InitCustom>;

/// Bubble on the site with the lowest compactness level, length scale four cells.
SolverInit default_init(const DiscreteProblem& problem, const QuadratureSettings& cfg = {});

DiscreteField init_field(const DiscreteProblem& problem, const SolverInit& init);

struct SolverOptions {
  int max_iters = 2000;
  double grad_tol = 1e-6;
  double armijo = 1e-4;
  double min_step = 1e-10;
  double max_step = 1e6;
};

struct SolveReport {
  double energy = 0.0;
  double residual_sup = 0.0;
  double min_value = 0.0;
  int iterations = 0;
  double threshold = 0.0;
  bool below_threshold = false;
  bool converged = false;
  std::vector<double> energy_history;
  DiscreteField solution;
};

/// Nehari-projected descent: every iterate is rescaled onto its ray's energy
/// maximum, then moved along the H^1-preconditioned negative gradient with a
/// Barzilai-Borwein step and Armijo backtracking. The energy sequence is
/// non-increasing; stops when the pointwise residual drops below grad_tol.
SolveReport mountain_pass_solve(const DiscreteProblem& problem, const SolverInit& init, const SolverOptions& opts = {},
                                const QuadratureSettings& cfg = {});

}  // namespace hslab
