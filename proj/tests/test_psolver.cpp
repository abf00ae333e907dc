#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "error.hpp"
#include "psolver.hpp"

using namespace splap;
using namespace splap::psolver;
using constitutive::GrowthParams;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

fem::BrokenFeFunction random_forcing(std::mt19937_64& rng, const fem::FemOperators& ops) {
  return {random_vector(rng, 3 * ops.num_simplices())};
}

// Interior solution of (P + tau A) u = P~^T f with u = R^T u_I.
Eigen::VectorXd linear_oracle(const fem::FemOperators& ops, double tau,
                              const fem::BrokenFeFunction& f) {
  const Eigen::MatrixXd P = ops.mass();
  const Eigen::MatrixXd A = fem::assemble_stiffness(ops.mesh());
  const Eigen::MatrixXd R = ops.restriction();
  const Eigen::MatrixXd Pt = ops.broken_mass();
  const Eigen::MatrixXd K = R * (P + tau * A) * R.transpose();
  const Eigen::VectorXd b = R * Pt.transpose() * f.coeffs;
  return K.ldlt().solve(b);
}

double fd_relative_error(const StepProblem& prob, const Eigen::VectorXd& u, double eps) {
  const Eigen::VectorXd g = gradient(prob, u, eps);
  Eigen::VectorXd fd(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[i]));
    Eigen::VectorXd up = u, um = u;
    up[i] += h;
    um[i] -= h;
    fd[i] = (objective(prob, up, eps) - objective(prob, um, eps)) / (2 * h);
  }
  return (g - fd).norm() / std::max(g.norm(), 1e-12);
}

}  // namespace

TEST_CASE("objective basics") {
  const auto ops = fem::assemble(mesh::generate_unit_square(4));
  const StepProblem prob(ops, GrowthParams{1.5, 0, 1e-6}, 0.1,
                         {Eigen::VectorXd::Zero(3 * ops.num_simplices())});
  CHECK(objective(prob, Eigen::VectorXd::Zero(ops.num_interior())) == 0.0);
  CHECK_THROWS_AS(objective(prob, Eigen::VectorXd::Zero(2)), Error);
  CHECK_THROWS_AS(StepProblem(ops, GrowthParams{1.5, 0, 1e-6}, 0.1, {Eigen::VectorXd::Zero(5)}),
                  Error);
  CHECK_THROWS_AS(StepProblem(ops, GrowthParams{1.5, 0, 1e-6}, -1.0,
                              {Eigen::VectorXd::Zero(3 * ops.num_simplices())}),
                  Error);

  // f = 0 and u = 0 is stationary.
  const StepProblem p3(ops, GrowthParams{3.0, 0, 0}, 0.1,
                       {Eigen::VectorXd::Zero(3 * ops.num_simplices())});
  CHECK(gradient(p3, Eigen::VectorXd::Zero(ops.num_interior()), 0.0).norm() == 0.0);
  CHECK(gradient(prob, Eigen::VectorXd::Zero(ops.num_interior()), 1e-3).norm() == 0.0);
  CHECK_THROWS_AS(gradient(prob, Eigen::VectorXd::Zero(ops.num_interior()), 0.0), Error);
}

TEST_CASE("p = 2 objective equals the quadratic form with the stiffness matrix") {
  std::mt19937_64 rng(1);
  for (double kappa : {0.0, 0.7}) {
    const auto ops = fem::assemble(mesh::generate_unit_square(5));
    const auto f = random_forcing(rng, ops);
    const double tau = 0.3;
    const StepProblem prob(ops, GrowthParams{2.0, kappa, 0}, tau, f);
    const Eigen::MatrixXd P = ops.mass(), A = fem::assemble_stiffness(ops.mesh());
    const Eigen::MatrixXd Pt = ops.broken_mass();
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd uI = random_vector(rng, ops.num_interior());
      const Eigen::VectorXd u = ops.prolong(uI);
      const double expected = 0.5 * u.dot(P * u) + 0.5 * tau * u.dot(A * u) -
                              f.coeffs.dot(Pt * u);
      CHECK(std::abs(objective(prob, uI) - expected) <= 1e-12 * std::abs(expected));
    }
  }
}

TEST_CASE("objective on the one-unknown mesh matches hand quadrature") {
  // n = 2: the centre hat has |grad| = 2 on four triangles and 2 sqrt 2 on
  // two, each of area 1/8; its mass is 1/8 and its integral 1/4.
  const auto ops = fem::assemble(mesh::generate_unit_square(2));
  REQUIRE(ops.num_interior() == 1);
  const double tau = 0.25;
  for (double p : {1.5, 2.0, 3.0}) {
    const StepProblem prob(ops, GrowthParams{p, 0, 0}, tau,
                           {Eigen::VectorXd::Ones(3 * ops.num_simplices())});
    for (double c : {-0.8, 0.3, 1.7}) {
      const double grad_int =
          (4.0 * std::pow(2.0, p) + 2.0 * std::pow(2.0 * std::sqrt(2.0), p)) / 8.0;
      const double expected =
          0.5 * c * c / 8.0 + tau / p * std::pow(std::abs(c), p) * grad_int - c / 4.0;
      CHECK(objective(prob, Eigen::VectorXd::Constant(1, c)) ==
            doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(7);
  const auto ops = fem::assemble(mesh::generate_unit_square(3));
  for (auto form : {Formulation::Euclidean, Formulation::Componentwise}) {
    for (double p : {1.1, 1.5, 2.0, 2.5, 4.0}) {
      for (double kappa : {0.0, 0.5}) {
        const StepProblem prob(ops, GrowthParams{p, kappa, 1e-6}, 0.2,
                               random_forcing(rng, ops), form);
        const Eigen::VectorXd u = random_vector(rng, ops.num_interior());
        CHECK(fd_relative_error(prob, u, 1e-2) < 1e-5);
        if (p >= 2.0 || kappa > 0.0) CHECK(fd_relative_error(prob, u, 0.0) < 1e-5);
      }
    }
  }
}

TEST_CASE("p = 2 solve against the linear oracle") {
  std::mt19937_64 rng(3);
  const auto ops = fem::assemble(mesh::generate_unit_square(6));
  for (double tau : {0.5, 0.03}) {
    const auto f = random_forcing(rng, ops);
    const StepProblem prob(ops, GrowthParams{2.0, 0, 1e-6}, tau, f);
    const Eigen::VectorXd star = linear_oracle(ops, tau, f);
    CHECK(gradient(prob, star, 0.0).norm() < 1e-8);
    CHECK(kkt_residual(prob, star) < 1e-8);

    const StepSolution sol = solve_step(prob, Eigen::VectorXd::Zero(ops.num_interior()));
    CHECK((sol.u_interior - star).norm() <= 1e-8 * star.norm());
    CHECK(sol.report.continuation_levels == std::vector<double>{0.0});
  }
}

TEST_CASE("tau = 0 gives the L2 projection") {
  std::mt19937_64 rng(4);
  const auto ops = fem::assemble(mesh::generate_unit_square(5));
  const auto f = random_forcing(rng, ops);
  for (double p : {1.5, 3.0}) {
    const StepProblem prob(ops, GrowthParams{p, 0, 1e-6}, 0.0, f);
    const StepSolution sol = solve_step(prob, Eigen::VectorXd::Zero(ops.num_interior()));
    const Eigen::VectorXd star = linear_oracle(ops, 0.0, f);
    CHECK((sol.u_interior - star).norm() <= 1e-8 * star.norm());
  }
}

TEST_CASE("one unknown: brute force search") {
  std::mt19937_64 rng(11);
  const auto ops = fem::assemble(mesh::generate_unit_square(2));
  for (double p : {1.5, 1.1, 2.5}) {
    for (int trial = 0; trial < 5; ++trial) {
      const StepProblem prob(ops, GrowthParams{p, 0, 1e-6}, 0.1, random_forcing(rng, ops));
      auto J = [&](double c) { return objective(prob, Eigen::VectorXd::Constant(1, c)); };
      double lo = -10.0, hi = 10.0, best = 0.0;
      for (int round = 0; round < 12; ++round) {
        const int n = 200;
        double best_val = INFINITY;
        for (int i = 0; i <= n; ++i) {
          const double c = lo + (hi - lo) * i / n;
          const double v = J(c);
          if (v < best_val) best_val = v, best = c;
        }
        const double h = (hi - lo) / n;
        lo = best - h;
        hi = best + h;
        if (h < 1e-8) break;
      }
      const StepSolution sol = solve_step(prob, Eigen::VectorXd::Zero(1));
      CHECK(std::abs(sol.u_interior[0] - best) < 1e-6);
    }
  }
}

TEST_CASE("convexity along random segments") {
  std::mt19937_64 rng(5);
  const auto ops = fem::assemble(mesh::generate_unit_square(3));
  for (double p : {1.1, 1.5, 2.0, 2.5, 4.0}) {
    const StepProblem prob(ops, GrowthParams{p, 0, 1e-6}, 0.5, random_forcing(rng, ops));
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXd u = random_vector(rng, ops.num_interior(), 2.0);
      const Eigen::VectorXd v = random_vector(rng, ops.num_interior(), 2.0);
      const double mid = objective(prob, 0.5 * (u + v));
      const double avg = 0.5 * (objective(prob, u) + objective(prob, v));
      if (mid > avg + 1e-12 * std::max(1.0, std::abs(avg))) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("solver reports descent and satisfies the variational equation") {
  std::mt19937_64 rng(9);
  const auto ops = fem::assemble(mesh::generate_unit_square(6));
  SolverOptions opts;
  for (auto form : {Formulation::Euclidean, Formulation::Componentwise}) {
    for (double p : {1.1, 1.5, 2.5, 4.0}) {
      const StepProblem prob(ops, GrowthParams{p, 0, 1e-6}, 0.1, random_forcing(rng, ops), form);
      const StepSolution sol = solve_step(prob, Eigen::VectorXd::Zero(ops.num_interior()), opts);
      const auto& trace = sol.report.objective_trace;
      // Lowering eps lowers the objective, so the trace stays monotone
      // across continuation levels as well.
      for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
      CHECK(sol.report.final_grad_norm <= sol.report.target_grad_norm);
      if (form == Formulation::Euclidean) {
        CHECK(kkt_residual(prob, sol.u_interior) <= 10.0 * sol.report.target_grad_norm);
      }
      if (p < 2.0) {
        CHECK(sol.report.continuation_levels.back() == 1e-6);
      } else {
        CHECK(sol.report.continuation_levels == std::vector<double>{0.0});
      }
    }
  }
}

TEST_CASE("objective trace is non-increasing on a single level") {
  std::mt19937_64 rng(21);
  const auto ops = fem::assemble(mesh::generate_unit_square(5));
  for (double p : {2.5, 4.0, 1.5}) {
    const StepProblem prob(ops, GrowthParams{p, p < 2 ? 0.2 : 0.0, 1e-6}, 0.3,
                           random_forcing(rng, ops));
    const StepSolution sol =
        solve_step(prob, random_vector(rng, ops.num_interior()));
    const auto& t = sol.report.objective_trace;
    REQUIRE(t.size() >= 2);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] <= t[i - 1]);
  }
}

TEST_CASE("S pairing identity and residual positivity") {
  std::mt19937_64 rng(13);
  const auto ops = fem::assemble(mesh::generate_unit_square(4));
  for (double p : {1.5, 2.0, 3.0}) {
    const GrowthParams prm{p, 0.0, 1e-6};
    const StepProblem prob(ops, prm, 0.7, random_forcing(rng, ops));
    const fem::FeFunction u{random_vector(rng, ops.num_vertices())};
    const Eigen::VectorXd term = nonlinear_residual_term(prob, u.coeffs, 0.0);
    double direct = 0.0;
    const auto grads = fem::gradient_per_simplex(ops, u);
    for (std::size_t j = 0; j < grads.size(); ++j) {
      const auto s = constitutive::tensor_s(grads[j], prm);
      direct += ops.areas()[static_cast<Eigen::Index>(j)] * (s.array() * grads[j].array()).sum();
    }
    direct *= 0.7;
    CHECK(std::abs(u.coeffs.dot(term) - direct) <= 1e-12 * std::abs(direct));
    CHECK(kkt_residual(prob, random_vector(rng, ops.num_interior())) > 0.0);
  }
}

TEST_CASE("iteration cap raises a convergence error with the report") {
  std::mt19937_64 rng(17);
  const auto ops = fem::assemble(mesh::generate_unit_square(4));
  const StepProblem prob(ops, GrowthParams{1.5, 0, 1e-6}, 0.3, random_forcing(rng, ops));
  SolverOptions opts;
  opts.max_iterations_per_level = 1;
  opts.tol = 1e-14;
  try {
    solve_step(prob, Eigen::VectorXd::Zero(ops.num_interior()), opts);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(e.kind() == ErrorKind::Convergence);
    CHECK(e.report().iterations >= 1);
  }
}
