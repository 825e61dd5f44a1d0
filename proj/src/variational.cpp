#include "hslab/variational.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hslab/extremals.hpp"

namespace hslab {

DomainGrid::DomainGrid(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<int> nodes_per_axis)
    : lo_(std::move(lo)), hi_(std::move(hi)), nodes_(std::move(nodes_per_axis)) {
  const int n = static_cast<int>(nodes_.size());
  if (n < 1 || lo_.size() != n || hi_.size() != n) {
    throw Error(Errc::ShapeMismatch, "grid bounds and node counts must share one dimension");
  }
  spacing_.resize(n);
  strides_.assign(n, 1);
  for (int d = 0; d < n; ++d) {
    if (nodes_[d] < 8) throw Error(Errc::InvalidArgument, "each axis needs at least 8 nodes");
    if (!(hi_[d] > lo_[d])) throw Error(Errc::InvalidArgument, "box bounds must satisfy lo < hi");
    spacing_[d] = (hi_[d] - lo_[d]) / (nodes_[d] - 1);
  }
  for (int d = n - 2; d >= 0; --d) strides_[d] = strides_[d + 1] * nodes_[d + 1];
  size_ = strides_[0] * nodes_[0];
}

DomainGrid DomainGrid::cube(int N, double lo, double hi, int n) {
  return {Eigen::VectorXd::Constant(N, lo), Eigen::VectorXd::Constant(N, hi), std::vector<int>(N, n)};
}

void DomainGrid::unravel(Eigen::Index idx, std::span<int> multi) const {
  for (int d = 0; d < dim(); ++d) {
    multi[d] = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
  }
}

Eigen::VectorXd DomainGrid::position(Eigen::Index idx) const {
  Eigen::VectorXd x(dim());
  for (int d = 0; d < dim(); ++d) {
    const int i = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
    x[d] = i == nodes_[d] - 1 ? hi_[d] : lo_[d] + i * spacing_[d];
  }
  return x;
}

namespace {

double trapezoid_factor(int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; }

}  // namespace

double DomainGrid::dual_volume(Eigen::Index idx) const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) {
    const int i = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
    v *= trapezoid_factor(i, nodes_[d], spacing_[d]);
  }
  return v;
}

Eigen::VectorXd DomainGrid::dual_volumes() const {
  Eigen::VectorXd v(size_);
  for (Eigen::Index i = 0; i < size_; ++i) v[i] = dual_volume(i);
  return v;
}

Placement classify_placement(const DomainGrid& grid, const Singularity& sing) {
  for (int d = 0; d < grid.dim(); ++d) {
    const double half = 0.5 * grid.spacing()[d];
    if (std::abs(sing.location[d] - grid.lo()[d]) <= half || std::abs(sing.location[d] - grid.hi()[d]) <= half) {
      return Placement::Boundary;
    }
  }
  return Placement::Interior;
}

Eigen::VectorXd singular_weight(const DomainGrid& grid, const Singularity& sing, int refinement) {
  const int n = grid.dim();
  if (sing.location.size() != n) throw Error(Errc::ShapeMismatch, "singularity location has wrong dimension");
  if (refinement < 1) throw Error(Errc::InvalidArgument, "refinement must be positive");
  const Eigen::VectorXd& h = grid.spacing();
  Eigen::VectorXd w(grid.size());
  std::vector<int> multi(n), sub(n);
  Eigen::VectorXd cell_lo(n), cell_hi(n), x(n);
  for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
    const Eigen::VectorXd node = grid.position(idx);
    bool near = true;
    for (int d = 0; d < n; ++d) near = near && std::abs(node[d] - sing.location[d]) <= 2.0 * h[d] * (1.0 + 1e-12);
    if (!near) {
      w[idx] = std::pow((node - sing.location).norm(), -sing.s);
      continue;
    }
    for (int d = 0; d < n; ++d) {
      cell_lo[d] = std::max(node[d] - 0.5 * h[d], grid.lo()[d]);
      cell_hi[d] = std::min(node[d] + 0.5 * h[d], grid.hi()[d]);
    }
    const Eigen::VectorXd sub_h = (cell_hi - cell_lo) / refinement;
    std::fill(sub.begin(), sub.end(), 0);
    double sum = 0.0;
    long count = 0;
    while (true) {
      for (int d = 0; d < n; ++d) x[d] = cell_lo[d] + (sub[d] + 0.5) * sub_h[d];
      const double r = (x - sing.location).norm();
      if (r == 0.0) throw Error(Errc::NonFinite, "singularity coincides with a refinement midpoint");
      sum += std::pow(r, -sing.s);
      ++count;
      int d = n - 1;
      while (d >= 0 && ++sub[d] == refinement) sub[d--] = 0;
      if (d < 0) break;
    }
    w[idx] = sum / count;
  }
  return w;
}

DiscreteProblem::DiscreteProblem(ProblemConfig cfg, int refinement) : cfg_(std::move(cfg)) {
  const DomainGrid& grid = cfg_.grid;
  const int N = grid.dim();
  if (N < 3) throw Error(Errc::InvalidArgument, "the critical exponent needs N >= 3");
  if (!std::isfinite(cfg_.lambda)) throw Error(Errc::InvalidArgument, "lambda must be finite");
  if (cfg_.singularities.empty()) throw Error(Errc::EmptySiteList, "problem needs at least one singularity");
  for (std::size_t i = 0; i < cfg_.singularities.size(); ++i) {
    const Singularity& si = cfg_.singularities[i];
    if (si.location.size() != N) throw Error(Errc::ShapeMismatch, "singularity location has wrong dimension");
    if (!(si.s > 0.0 && si.s < 2.0)) throw Error(Errc::InvalidArgument, "singularity exponent must lie in (0, 2)");
    for (int d = 0; d < N; ++d) {
      if (si.location[d] < grid.lo()[d] || si.location[d] > grid.hi()[d]) {
        throw Error(Errc::InvalidArgument, "singularity lies outside the closed box");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((si.location - cfg_.singularities[j].location).norm() == 0.0) {
        throw Error(Errc::InvalidArgument, "singularity locations must be pairwise distinct");
      }
    }
    placements_.push_back(classify_placement(grid, si));
    weights_.push_back(singular_weight(grid, si, refinement));
    exponents_.push_back(HSParams(N, si.s).critical_exponent());
  }
  volumes_ = grid.dual_volumes();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.size()) * (2 * N + 1));
  std::vector<int> multi(N);
  for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
    grid.unravel(idx, multi);
    for (int d = 0; d < N; ++d) {
      if (multi[d] + 1 >= grid.nodes(d)) continue;
      double c = 1.0 / grid.spacing()[d];
      for (int k = 0; k < N; ++k) {
        if (k != d) c *= trapezoid_factor(multi[k], grid.nodes(k), grid.spacing()[k]);
      }
      const Eigen::Index j = idx + grid.stride(d);
      triplets.emplace_back(idx, idx, c);
      triplets.emplace_back(j, j, c);
      triplets.emplace_back(idx, j, -c);
      triplets.emplace_back(j, idx, -c);
    }
  }
  stiffness_.resize(grid.size(), grid.size());
  stiffness_.setFromTriplets(triplets.begin(), triplets.end());
}

std::vector<SingularitySite> DiscreteProblem::sites() const {
  std::vector<SingularitySite> out;
  for (std::size_t i = 0; i < cfg_.singularities.size(); ++i) out.push_back({placements_[i], cfg_.singularities[i].s});
  return out;
}

double DiscreteProblem::weighted_volume(std::size_t site) const { return volumes_.dot(weight(site)); }

ConstantPath DiscreteProblem::constant_path() const {
  std::map<double, double> by_exponent;
  for (std::size_t i = 0; i < weights_.size(); ++i) by_exponent[exponents_[i]] += weighted_volume(i);
  ConstantPath path{cfg_.lambda, cfg_.grid.volume(), {}};
  for (const auto& [q, C] : by_exponent) path.terms.push_back({q, C});
  return path;
}

DiscreteProblem DiscreteProblem::with_lambda(double lambda) const {
  DiscreteProblem out = *this;
  out.cfg_.lambda = lambda;
  return out;
}

double ghost_laplacian(const DiscreteField& u, const DomainGrid& grid, Eigen::Index idx) {
  std::vector<int> multi(grid.dim());
  grid.unravel(idx, multi);
  double lap = 0.0;
  for (int d = 0; d < grid.dim(); ++d) {
    const Eigen::Index st = grid.stride(d);
    const int i = multi[d];
    const int n = grid.nodes(d);
    // Mirror the missing neighbour across the face: u_{-1} = u_1, u_n = u_{n-2}.
    const double minus = i > 0 ? u[idx - st] : u[idx + st];
    const double plus = i < n - 1 ? u[idx + st] : u[idx - st];
    const double h = grid.spacing()[d];
    lap += (minus - 2.0 * u[idx] + plus) / (h * h);
  }
  return lap;
}

namespace {

void require_shape(const DiscreteField& u, const DiscreteProblem& problem) {
  if (u.size() != problem.grid().size()) {
    throw Error(Errc::ShapeMismatch, "field has " + std::to_string(u.size()) + " values, grid has " +
                                         std::to_string(problem.grid().size()) + " nodes");
  }
}

double quadratic_form(const DiscreteField& u, const DiscreteProblem& problem) {
  const Eigen::VectorXd Ku = problem.stiffness() * u;
  return u.dot(Ku) + problem.lambda() * problem.volumes().dot(u.cwiseAbs2());
}

}  // namespace

double energy(const DiscreteField& u, const DiscreteProblem& problem) {
  require_shape(u, problem);
  double e = 0.5 * quadratic_form(u, problem);
  const Eigen::VectorXd& vol = problem.volumes();
  for (std::size_t i = 0; i < problem.singularities().size(); ++i) {
    const double q = problem.exponent(i);
    const Eigen::VectorXd& w = problem.weight(i);
    double term = 0.0;
    for (Eigen::Index n = 0; n < u.size(); ++n) {
      if (u[n] > 0.0) term += vol[n] * w[n] * std::pow(u[n], q);
    }
    e -= term / q;
  }
  return e;
}

DiscreteField gradient(const DiscreteField& u, const DiscreteProblem& problem) {
  require_shape(u, problem);
  const Eigen::VectorXd& vol = problem.volumes();
  DiscreteField g = problem.stiffness() * u;
  g += problem.lambda() * vol.cwiseProduct(u);
  for (std::size_t i = 0; i < problem.singularities().size(); ++i) {
    const double q = problem.exponent(i);
    const Eigen::VectorXd& w = problem.weight(i);
    for (Eigen::Index n = 0; n < u.size(); ++n) {
      if (u[n] > 0.0) g[n] -= vol[n] * w[n] * std::pow(u[n], q - 1.0);
    }
  }
  return g;
}

DiscreteField residual(const DiscreteField& u, const DiscreteProblem& problem) {
  return gradient(u, problem).cwiseQuotient(problem.volumes());
}

double nehari_scale(const DiscreteField& u, const DiscreteProblem& problem) {
  require_shape(u, problem);
  const double a = quadratic_form(u, problem);
  std::map<double, double> b;
  const Eigen::VectorXd& vol = problem.volumes();
  for (std::size_t i = 0; i < problem.singularities().size(); ++i) {
    const double q = problem.exponent(i);
    const Eigen::VectorXd& w = problem.weight(i);
    double term = 0.0;
    for (Eigen::Index n = 0; n < u.size(); ++n) {
      if (u[n] > 0.0) term += vol[n] * w[n] * std::pow(u[n], q);
    }
    b[q] += term;
  }
  double total_b = 0.0;
  for (const auto& [q, v] : b) total_b += v;
  if (!(total_b > 0.0)) throw Error(Errc::NonpositivePart, "field has no positive part");
  if (!(a > 0.0)) throw Error(Errc::InvalidArgument, "quadratic part is not positive; the ray has no interior maximum");
  if (b.size() == 1) return std::pow(a / total_b, 1.0 / (b.begin()->first - 2.0));

  // sum_q b_q t^{q-2} = a; the left side increases strictly in t. Newton in
  // log t, safeguarded by a bisection bracket.
  auto excess = [&](double logt) {
    double f = -a, df = 0.0;
    for (const auto& [q, v] : b) {
      const double term = v * std::exp((q - 2.0) * logt);
      f += term;
      df += (q - 2.0) * term;
    }
    return std::pair{f, df};
  };
  double lo = -1.0, hi = 1.0;
  while (excess(lo).first > 0.0) lo *= 2.0;
  while (excess(hi).first < 0.0) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [f, df] = excess(x);
    if (f > 0.0) hi = x;
    else lo = x;
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return std::exp(x);
}

PositivityCheck positivity_check(const DiscreteField& u) {
  if (u.size() == 0) return {0.0, false};
  const double m = u.minCoeff();
  return {m, m > 0.0};
}

bool negative_lambda_sanity(const DiscreteProblem& problem, std::span<const double> c_samples) {
  if (problem.lambda() > 0.0) throw Error(Errc::PositiveLambda, "sanity check applies only to lambda <= 0");
  for (double c : c_samples) {
    if (!(c > 0.0)) throw Error(Errc::InvalidArgument, "constant samples must be positive");
    const DiscreteField u = DiscreteField::Constant(problem.grid().size(), c);
    if (!(energy(u, problem) < 0.0)) return false;
  }
  return true;
}

SolverInit default_init(const DiscreteProblem& problem, const QuadratureSettings& cfg) {
  const auto sites = problem.sites();
  const int N = problem.grid().dim();
  std::size_t best = 0;
  double best_level = site_threshold(N, sites[0], cfg);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const double level = site_threshold(N, sites[i], cfg);
    if (level < best_level) {
      best = i;
      best_level = level;
    }
  }
  // Bubble radius eps^{1/(2-s)} of four cells.
  const double radius = 4.0 * problem.grid().spacing().minCoeff();
  return InitBubble{best, std::pow(radius, 2.0 - sites[best].s)};
}

DiscreteField init_field(const DiscreteProblem& problem, const SolverInit& init) {
  const DomainGrid& grid = problem.grid();
  return std::visit(
      [&](const auto& v) -> DiscreteField {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, InitBubble>) {
          if (v.site >= problem.singularities().size()) throw Error(Errc::InvalidArgument, "bubble site out of range");
          const Singularity& sing = problem.singularities()[v.site];
          const HSParams p(grid.dim(), sing.s);
          DiscreteField u(grid.size());
          for (Eigen::Index i = 0; i < grid.size(); ++i) {
            u[i] = bubble_radial((grid.position(i) - sing.location).norm(), v.eps, p);
          }
          return u;
        } else if constexpr (std::is_same_v<T, InitConstant>) {
          if (!(v.value > 0.0)) throw Error(Errc::InvalidArgument, "constant initial field must be positive");
          return DiscreteField::Constant(grid.size(), v.value);
        } else {
          require_shape(v.field, problem);
          return v.field;
        }
      },
      init);
}

SolveReport mountain_pass_solve(const DiscreteProblem& problem, const SolverInit& init, const SolverOptions& opts,
                                const QuadratureSettings& cfg) {
  if (!(problem.lambda() > 0.0)) throw Error(Errc::NonpositiveLambda, "solver requires lambda > 0");
  const Eigen::VectorXd& vol = problem.volumes();
  const auto sites = problem.sites();

  SolveReport report;
  report.threshold = ps_threshold(problem.grid().dim(), sites, cfg).overall;

  // H^1(Omega) metric with the lambda-weighted mass term.
  Eigen::SparseMatrix<double> metric = problem.stiffness();
  for (Eigen::Index i = 0; i < vol.size(); ++i) metric.coeffRef(i, i) += problem.lambda() * vol[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(metric);
  if (solver.info() != Eigen::Success) throw Error(Errc::InvalidArgument, "H^1 metric factorization failed");

  DiscreteField u = init_field(problem, init);
  u *= nehari_scale(u, problem);
  double E = energy(u, problem);
  DiscreteField G = gradient(u, problem);
  auto sup_residual = [&](const DiscreteField& g) { return g.cwiseQuotient(vol).cwiseAbs().maxCoeff(); };
  double res = sup_residual(G);
  report.energy_history.push_back(E);

  double step = 1.0;
  int it = 0;
  for (; it < opts.max_iters && !(res < opts.grad_tol); ++it) {
    const DiscreteField d = solver.solve(G);
    const double slope = G.dot(d);
    bool accepted = false;
    DiscreteField v;
    double Ev = 0.0;
    for (double trial = step; trial >= opts.min_step; trial *= 0.5) {
      v = u - trial * d;
      if (!(v.maxCoeff() > 0.0)) continue;
      v *= nehari_scale(v, problem);
      Ev = energy(v, problem);
      if (Ev <= E - opts.armijo * trial * slope || (Ev <= E && trial * slope <= 1e-13 * std::abs(E))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const DiscreteField Gv = gradient(v, problem);
    const DiscreteField sdiff = v - u;
    const double sy = sdiff.dot(Gv - G);
    const double sMs = sdiff.dot(metric * sdiff);
    step = sy > 0.0 ? std::clamp(sMs / sy, opts.min_step, opts.max_step) : std::min(2.0 * step, opts.max_step);
    u = std::move(v);
    E = Ev;
    G = Gv;
    res = sup_residual(G);
    report.energy_history.push_back(E);
  }

  const PositivityCheck pos = positivity_check(u);
  report.energy = E;
  report.residual_sup = res;
  report.min_value = pos.min_value;
  report.iterations = it;
  report.converged = res < opts.grad_tol;
  report.below_threshold = E < report.threshold;
  report.solution = std::move(u);
  return report;
}

}  // namespace hslab
