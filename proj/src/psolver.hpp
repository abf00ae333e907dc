#pragma once

// One implicit Euler step as a convex minimization over the interior
// coefficients u_I (u = R^T u_I):
//
//   J(u) = 1/2 u^T P u + tau sum_j |S_j| psi(|grad u|_j|) - (P~^T f)^T u
//
// with psi' (r) = (kappa + r)^(p-2) r, i.e. psi(r) = r^p / p for kappa = 0.
// For p < 2 and kappa = 0 the integrand is not twice differentiable at zero
// gradients; the solver then minimizes the regularization with
// |g| -> sqrt(eps^2 + |g|^2) and drives eps down a continuation schedule.

#include <Eigen/Core>
#include <vector>

#include "constitutive.hpp"
#include "error.hpp"
#include "fem.hpp"

namespace splap::psolver {

enum class Formulation {
  /// |grad u| is the Euclidean norm of (D_1 u, D_2 u) per simplex.
  Euclidean,
  /// Sum over i of psi(|(D_i u)_j|), the literal per-component variant.
  Componentwise,
};

class StepProblem {
 public:
  StepProblem(const fem::FemOperators& ops, constitutive::GrowthParams params,
              double tau, fem::BrokenFeFunction forcing,
              Formulation formulation = Formulation::Euclidean);

  const fem::FemOperators& ops() const { return *ops_; }
  const constitutive::GrowthParams& params() const { return params_; }
  double tau() const { return tau_; }
  const fem::BrokenFeFunction& forcing() const { return forcing_; }
  Formulation formulation() const { return formulation_; }
  /// R P~^T f.
  const Eigen::VectorXd& load() const { return load_; }

  /// True when psi is not C^2 at zero gradient (p < 2, kappa = 0).
  bool needs_regularization() const;
  /// Regularization at which the final residual is measured: params.eps_reg
  /// when regularization is needed, otherwise 0.
  double floor_eps() const;

 private:
  const fem::FemOperators* ops_;
  constitutive::GrowthParams params_;
  double tau_;
  fem::BrokenFeFunction forcing_;
  Formulation formulation_;
  Eigen::VectorXd load_;
};

struct SolveReport {
  int iterations = 0;
  /// Full Newton steps accepted without Armijo decrease because the
  /// objective change was below roundoff; not part of objective_trace.
  int polish_steps = 0;
  double final_grad_norm = 0.0;
  double target_grad_norm = 0.0;
  std::vector<double> continuation_levels;
  std::vector<double> objective_trace;
  int hessian_shifts = 0;
};

class SolveError : public Error {
 public:
  SolveError(const std::string& what, SolveReport report)
      : Error(ErrorKind::Convergence, what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct SolverOptions {
  double tol = 1e-9;
  int max_iterations_per_level = 200;
  /// Levels above the floor; the floor (params.eps_reg) is appended.
  std::vector<double> eps_schedule{1e-2, 1e-4, 1e-6};
  double armijo_c1 = 1e-4;
};

/// Unregularized objective.
double objective(const StepProblem& prob, const Eigen::VectorXd& u_interior);
/// Objective with gradient norm regularized by eps.
double objective(const StepProblem& prob, const Eigen::VectorXd& u_interior, double eps);

/// Gradient of the eps-regularized objective with respect to u_I. Throws
/// ErrorKind::Input when eps = 0 hits a zero gradient with p < 2, kappa = 0.
Eigen::VectorXd gradient(const StepProblem& prob, const Eigen::VectorXd& u_interior,
                         double eps);

struct StepSolution {
  Eigen::VectorXd u_interior;
  SolveReport report;
};

StepSolution solve_step(const StepProblem& prob, const Eigen::VectorXd& warm_start,
                        const SolverOptions& options = {});

/// Nonlinear part tau sum_j |S_j| G_j^T S_eps(grad u|_j) of the variational
/// residual, over all vertices (not restricted). Built from the constitutive
/// tensor, independent of the solver's gradient path.
Eigen::VectorXd nonlinear_residual_term(const StepProblem& prob,
                                        const Eigen::VectorXd& u_full, double eps);

/// || R (P u + nonlinear term - P~^T f) ||_2 at the floor regularization.
double kkt_residual(const StepProblem& prob, const Eigen::VectorXd& u_interior);

}  // namespace splap::psolver
