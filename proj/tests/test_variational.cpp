#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hslab/boundary_energy.hpp"
#include "hslab/extremals.hpp"
#include "hslab/variational.hpp"

using namespace hslab;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXd vec3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

DiscreteProblem unit_cube_problem(int n, double lambda, std::vector<Singularity> sings) {
  return DiscreteProblem({DomainGrid::cube(3, 0.0, 1.0, n), lambda, std::move(sings)});
}

DiscreteField random_field(Eigen::Index n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  DiscreteField u(n);
  for (auto& v : u) v = dist(rng);
  return u;
}

// \int_{[0,1]^3} |x - x0|^{-1} dx for x0 = (0.3, 0.5, 0.5), frozen from an
// extended-precision evaluation of the eight corner boxes.
constexpr double kShiftedInverseDistance = 2.2946566153402037;
// \int_{[0,1]^3} |x|^{-1} dx.
constexpr double kCornerInverseDistance = 1.1900386819897768;

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("grid geometry") {
    const DomainGrid g(vec3(0.0, -1.0, 2.0), vec3(1.0, 1.0, 2.5), {8, 9, 10});
    CHECK(g.size() == 8 * 9 * 10);
    CHECK(g.volume() == doctest::Approx(1.0));
    CHECK(g.dual_volumes().sum() == doctest::Approx(g.volume()).epsilon(1e-14));
    CHECK(g.stride(2) == 1);
    CHECK(g.stride(0) == 90);
    CHECK(g.position(g.size() - 1).isApprox(vec3(1.0, 1.0, 2.5)));
    std::vector<int> multi(3);
    g.unravel(123, multi);
    CHECK(multi[0] * 90 + multi[1] * 10 + multi[2] == 123);
    CHECK_THROWS_AS(DomainGrid::cube(3, 0.0, 1.0, 7), Error);
    CHECK_THROWS_AS(DomainGrid(vec3(0, 0, 0), vec3(1, 0, 1), {8, 8, 8}), Error);
  }

  TEST_CASE("placement classification") {
    const DomainGrid g = DomainGrid::cube(3, 0.0, 1.0, 11);
    CHECK(classify_placement(g, {vec3(0.5, 0.5, 0.5), 1.0}) == Placement::Interior);
    CHECK(classify_placement(g, {vec3(0.5, 0.5, 0.0), 1.0}) == Placement::Boundary);
    CHECK(classify_placement(g, {vec3(0.5, 0.96, 0.5), 1.0}) == Placement::Boundary);
    CHECK(classify_placement(g, {vec3(0.5, 0.94, 0.5), 1.0}) == Placement::Interior);
  }

  TEST_CASE("problem validation") {
    CHECK_THROWS_AS(unit_cube_problem(8, 1.0, {}), Error);
    CHECK_THROWS_AS(unit_cube_problem(8, 1.0, {{vec3(0.5, 0.5, 0.5), 1.0}, {vec3(0.5, 0.5, 0.5), 0.5}}), Error);
    CHECK_THROWS_AS(unit_cube_problem(8, 1.0, {{vec3(1.5, 0.5, 0.5), 1.0}}), Error);
    CHECK_THROWS_AS(unit_cube_problem(8, 1.0, {{vec3(0.5, 0.5, 0.5), 2.0}}), Error);
    const DiscreteProblem p = unit_cube_problem(8, 1.0, {{vec3(0.5, 0.5, 0.5), 1.0}});
    try {
      (void)energy(DiscreteField::Zero(10), p);
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ShapeMismatch);
    }
  }

  TEST_CASE("singular weight away from the singularity") {
    const DomainGrid g = DomainGrid::cube(3, 0.0, 1.0, 17);
    const Singularity sing{vec3(0.5, 0.5, 0.5), 1.0};
    const Eigen::VectorXd w = singular_weight(g, sing);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double r = (g.position(i) - sing.location).norm();
      if (r > 0.3) CHECK(w[i] == doctest::Approx(1.0 / r).epsilon(1e-3));
    }
  }

  TEST_CASE("singular weight at the singularity converges to the cell average") {
    // Interior node on x_i: the dual cell is [-h/2, h/2]^3, and by scaling
    // its average of 1/|x| is 8 (h/2)^2 C / h^3 = 2 C / h with C the corner integral.
    const DomainGrid g = DomainGrid::cube(3, 0.0, 1.0, 9);
    const Singularity sing{vec3(0.5, 0.5, 0.5), 1.0};
    const Eigen::Index centre = 4 * 81 + 4 * 9 + 4;
    REQUIRE(g.position(centre).isApprox(sing.location));
    const double exact = 2.0 * kCornerInverseDistance / g.spacing()[0];
    double prev = std::abs(singular_weight(g, sing, 2)[centre] - exact);
    for (int refinement : {4, 8, 16}) {
      const double w = singular_weight(g, sing, refinement)[centre];
      CHECK(std::isfinite(w));
      CHECK(w > 0.0);
      const double err = std::abs(w - exact);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev / exact < 0.02);
  }

  TEST_CASE("weighted volume matches the integral of the weight") {
    const DiscreteProblem p = unit_cube_problem(33, 1.0, {{vec3(0.3, 0.5, 0.5), 1.0}});
    CHECK(p.weighted_volume(0) == doctest::Approx(kShiftedInverseDistance).epsilon(0.01));
    // Against the brute-force box rule as well.
    const double box = integrate_box([](const Eigen::VectorXd& x) { return 1.0 / (x - vec3(0.3, 0.5, 0.5)).norm(); },
                                     {vec3(0, 0, 0), vec3(1, 1, 1)}, 64);
    CHECK(p.weighted_volume(0) == doctest::Approx(box).epsilon(0.01));
  }

  TEST_CASE("energy of simple fields") {
    const std::vector<Singularity> sings{{vec3(0.3, 0.5, 0.5), 1.0}, {vec3(0.7, 0.5, 0.5), 1.0}};
    const DiscreteProblem p = unit_cube_problem(12, 0.7, sings);
    CHECK(energy(DiscreteField::Zero(p.grid().size()), p) == 0.0);
    CHECK(gradient(DiscreteField::Zero(p.grid().size()), p).cwiseAbs().maxCoeff() == 0.0);
    // Constant fields reduce to the constant path with C1 = sum of weighted volumes.
    const double C1 = p.weighted_volume(0) + p.weighted_volume(1);
    for (double c : {0.1, 1.0, 2.5}) {
      const double want = 0.5 * p.grid().volume() * 0.7 * c * c - C1 * std::pow(c, 4.0) / 4.0;
      CHECK(energy(DiscreteField::Constant(p.grid().size(), c), p) == doctest::Approx(want).epsilon(1e-12));
      CHECK(energy(DiscreteField::Constant(p.grid().size(), c), p) == doctest::Approx(p.constant_path().value(c)).epsilon(1e-12));
    }
  }

  TEST_CASE("residual of a constant is the pointwise reaction term") {
    const Singularity sing{vec3(0.3, 0.5, 0.5), 1.0};
    const DiscreteProblem p = unit_cube_problem(10, 0.5, {sing});
    const double c = 0.8;
    const DiscreteField r = residual(DiscreteField::Constant(p.grid().size(), c), p);
    for (Eigen::Index i = 0; i < p.grid().size(); ++i) {
      CHECK(r[i] == doctest::Approx(0.5 * c - p.weight(0)[i] * std::pow(c, 3.0)).epsilon(1e-12));
    }
  }

  TEST_CASE("stiffness matches the reflected-ghost Laplacian") {
    const DiscreteProblem p(ProblemConfig{DomainGrid(vec3(0, 0, 0), vec3(1.0, 2.0, 0.5), {8, 10, 9}), 1.0,
                                          {{vec3(0.2, 0.3, 0.1), 1.0}}});
    std::mt19937_64 rng(3);
    const DiscreteField u = random_field(p.grid().size(), rng, -1.0, 1.0);
    const Eigen::VectorXd Ku = p.stiffness() * u;
    for (Eigen::Index i = 0; i < p.grid().size(); ++i) {
      CHECK(Ku[i] == doctest::Approx(-ghost_laplacian(u, p.grid(), i) * p.volumes()[i]).epsilon(1e-10));
    }
    CHECK((p.stiffness() * DiscreteField::Ones(p.grid().size())).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("gradient agrees with central differences of the energy") {
    const DiscreteProblem p =
        unit_cube_problem(8, 0.9, {{vec3(0.0, 0.5, 0.5), 1.0}, {vec3(0.4, 0.6, 0.3), 0.6}, {vec3(0.8, 0.1, 0.9), 1.4}});
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 50; ++trial) {
      const DiscreteField u = random_field(p.grid().size(), rng, -0.5, 1.5);
      const DiscreteField phi = random_field(p.grid().size(), rng, -1.0, 1.0);
      const double h = 1e-6;
      const double fd = (energy(u + h * phi, p) - energy(u - h * phi, p)) / (2.0 * h);
      const double an = gradient(u, p).dot(phi);
      CHECK(std::abs(an - fd) / (1.0 + std::abs(fd)) < 1e-5);
    }
  }

  TEST_CASE("nehari scale with a common exponent") {
    const DiscreteProblem p = unit_cube_problem(9, 0.5, {{vec3(0.3, 0.5, 0.5), 1.0}, {vec3(0.7, 0.5, 0.5), 1.0}});
    std::mt19937_64 rng(7);
    const DiscreteField u = random_field(p.grid().size(), rng, 0.1, 1.0);
    const double t = nehari_scale(u, p);
    const int n = 200000;
    const double t_hi = 5.0 * t;
    double best_t = 0.0, best = -1e300;
    for (int i = 1; i <= n; ++i) {
      const double ti = t_hi * i / n;
      const double e = energy(ti * u, p);
      if (e > best) {
        best = e;
        best_t = ti;
      }
    }
    CHECK(std::abs(best_t - t) <= t_hi / n);
    // Stationarity along the ray at t*, and t* = 1 once projected.
    const DiscreteField v = t * u;
    CHECK(std::abs(gradient(v, p).dot(u)) / gradient(v, p).cwiseAbs().dot(u.cwiseAbs()) < 1e-8);
    CHECK(nehari_scale(v, p) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("nehari scale with mixed exponents") {
    const DiscreteProblem p = unit_cube_problem(9, 0.5, {{vec3(0.3, 0.5, 0.5), 0.5}, {vec3(0.7, 0.5, 0.5), 1.5}});
    std::mt19937_64 rng(8);
    const DiscreteField u = random_field(p.grid().size(), rng, 0.1, 1.0);
    const double t = nehari_scale(u, p);
    const int n = 200000;
    const double t_hi = 5.0 * t;
    double best_t = 0.0, best = -1e300;
    for (int i = 1; i <= n; ++i) {
      const double ti = t_hi * i / n;
      const double e = energy(ti * u, p);
      if (e > best) {
        best = e;
        best_t = ti;
      }
    }
    CHECK(std::abs(best_t - t) <= t_hi / n);
    CHECK(nehari_scale(t * u, p) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("nehari scale needs a positive part") {
    const DiscreteProblem p = unit_cube_problem(8, 0.5, {{vec3(0.3, 0.5, 0.5), 1.0}});
    try {
      (void)nehari_scale(DiscreteField::Constant(p.grid().size(), -1.0), p);
      FAIL("expected NonpositivePart");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NonpositivePart);
    }
  }

  TEST_CASE("positivity check") {
    const PositivityCheck ones = positivity_check(DiscreteField::Ones(5));
    CHECK(ones.min_value == 1.0);
    CHECK(ones.positive);
    DiscreteField u = DiscreteField::Ones(5);
    u[3] = 0.0;
    const PositivityCheck zero = positivity_check(u);
    CHECK(zero.min_value == 0.0);
    CHECK_FALSE(zero.positive);
  }

  TEST_CASE("constants have negative energy when lambda is not positive") {
    const std::vector<Singularity> sings{{vec3(0.3, 0.5, 0.5), 1.0}, {vec3(0.7, 0.5, 0.5), 0.5}};
    const double samples[] = {0.1, 1.0, 10.0};
    CHECK(negative_lambda_sanity(unit_cube_problem(8, 0.0, sings), samples));
    CHECK(negative_lambda_sanity(unit_cube_problem(8, -1.0, sings), samples));
    try {
      (void)negative_lambda_sanity(unit_cube_problem(8, 0.01, sings), samples);
      FAIL("expected PositiveLambda");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::PositiveLambda);
    }
  }

  TEST_CASE("solver rejects non-positive lambda") {
    const DiscreteProblem p = unit_cube_problem(8, 0.0, {{vec3(0.3, 0.5, 0.5), 1.0}});
    try {
      (void)mountain_pass_solve(p, InitConstant{1.0});
      FAIL("expected NonpositiveLambda");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NonpositiveLambda);
    }
  }

  TEST_CASE("default initialization picks the lowest-threshold site") {
    const DiscreteProblem p = unit_cube_problem(11, 1.0, {{vec3(0.5, 0.5, 0.5), 1.0}, {vec3(0.5, 0.5, 0.0), 1.0}});
    const SolverInit init = default_init(p);
    REQUIRE(std::holds_alternative<InitBubble>(init));
    CHECK(std::get<InitBubble>(init).site == 1);
    CHECK(std::get<InitBubble>(init).eps == doctest::Approx(0.4));
    const DiscreteField u = init_field(p, init);
    CHECK(u.minCoeff() > 0.0);
  }

  TEST_CASE("solver energies never increase") {
    const DiscreteProblem p = unit_cube_problem(12, 2.0, {{vec3(0.3, 0.5, 0.5), 1.0}, {vec3(0.7, 0.5, 0.5), 1.0}});
    SolverOptions opts;
    opts.max_iters = 300;
    const SolveReport r = mountain_pass_solve(p, default_init(p), opts);
    REQUIRE(r.energy_history.size() >= 2);
    for (std::size_t i = 1; i < r.energy_history.size(); ++i) {
      CHECK(r.energy_history[i] <= r.energy_history[i - 1] + 1e-12 * std::abs(r.energy_history[i - 1]));
    }
    CHECK(r.below_threshold == (r.energy < r.threshold));
    CHECK(r.converged == (r.residual_sup < opts.grad_tol));
    CHECK(r.threshold == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-9));
  }

  TEST_CASE("boundary singularity uses the boundary level") {
    const DiscreteProblem p = unit_cube_problem(12, 0.05, {{vec3(0.5, 0.5, 0.0), 1.0}});
    REQUIRE(p.placements().front() == Placement::Boundary);
    const SolveReport r = mountain_pass_solve(p, default_init(p));
    CHECK(r.threshold == doctest::Approx(pi / 3.0).epsilon(1e-9));
    CHECK(r.below_threshold == (r.energy < r.threshold));
  }

  TEST_CASE("mixed exponents solve to a positive critical point") {
    const DiscreteProblem p = unit_cube_problem(12, 0.05, {{vec3(0.3, 0.5, 0.5), 0.5}, {vec3(0.7, 0.5, 0.5), 1.5}});
    const SolveReport r = mountain_pass_solve(p, InitConstant{1.0});
    CHECK(r.converged);
    CHECK(r.min_value > 0.0);
    CHECK(r.residual_sup < 1e-6);
    CHECK(residual(r.solution, p).cwiseAbs().maxCoeff() == doctest::Approx(r.residual_sup));
  }

  TEST_CASE("box and lambda scaling shifts the constant-path maximizer by the closed form") {
    // x -> L x and lambda -> lambda / L^2: |Omega| scales by L^3 and C1 by L^{3-s}.
    const double L = 2.0, s = 1.0, lambda = 0.3;
    const Singularity sing{vec3(0.3, 0.5, 0.5), s};
    const DiscreteProblem small = unit_cube_problem(17, lambda, {sing});
    const DiscreteProblem big(ProblemConfig{DomainGrid::cube(3, 0.0, L, 17), lambda / (L * L), {{L * sing.location, s}}});
    CHECK(big.weighted_volume(0) == doctest::Approx(std::pow(L, 3.0 - s) * small.weighted_volume(0)).epsilon(1e-10));
    const ConstantPath ps = small.constant_path(), pb = big.constant_path();
    const double q = ps.terms.front().exponent;
    const double predicted = ps.closed_form_argmax() * std::pow(std::pow(L, 3.0 - 2.0) / std::pow(L, 3.0 - s), 1.0 / (q - 2.0));
    const ScanMaximum scan = scan_constant_path(pb, 10.0 * predicted, 100000);
    CHECK(std::abs(scan.argmax - predicted) <= scan.step);
  }

  TEST_CASE("converged energy is Cauchy under grid refinement") {
    std::vector<double> energies;
    for (int n : {16, 24, 32}) {
      const DiscreteProblem p = unit_cube_problem(n, 0.5, {{vec3(0.3, 0.5, 0.5), 1.0}, {vec3(0.7, 0.5, 0.5), 1.0}});
      const SolveReport r = mountain_pass_solve(p, InitConstant{1.0});
      REQUIRE(r.converged);
      energies.push_back(r.energy);
    }
    CHECK(std::abs(energies[2] - energies[1]) < std::abs(energies[1] - energies[0]));
  }

  TEST_CASE("discrete bubble energy matches the patch quadrature on a fine grid") {
    // Singularity on the flat bottom face of a slab; eta U_eps is supported
    // inside the box, so the discrete energy sees exactly the half-space patch.
    const double delta = 0.18, eps = 0.12, lambda = 1.0;
    const HSParams hp(3, 1.0);
    const Singularity sing{vec3(0.0, 0.0, 0.0), 1.0};
    const DiscreteProblem p(ProblemConfig{DomainGrid(vec3(-0.4, -0.4, 0.0), vec3(0.4, 0.4, 0.4), {64, 64, 64}), lambda,
                                          {sing}});
    const CutoffSpec cut{delta};
    DiscreteField u(p.grid().size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double r = p.grid().position(i).norm();
      u[i] = cut.value(r) * bubble_radial(r, eps, hp);
    }
    const EnergyBreakdown b = patch_energies(eps, BoundaryGeometry::flat(3, delta), cut, {}, hp);
    const double q = hp.critical_exponent();
    const double continuum = 0.5 * (b.K0e + lambda * b.K3e) - b.K1e / q;
    CHECK(energy(u, p) == doctest::Approx(continuum).epsilon(0.02));
    const double gradient_part = u.dot(p.stiffness() * u);
    CHECK(gradient_part == doctest::Approx(b.K0e).epsilon(0.02));
  }
}
