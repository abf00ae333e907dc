#include "psolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace splap::psolver {

namespace {

using constitutive::GrowthParams;
using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

Eigen::VectorXd to_full(const fem::FemOperators& ops, const Eigen::VectorXd& u_int) {
  require(u_int.size() == ops.num_interior(), ErrorKind::Input,
          "interior vector has length " + std::to_string(u_int.size()) + ", expected " +
              std::to_string(ops.num_interior()));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ops.num_vertices());
  const auto& iv = ops.interior_vertices();
  for (std::size_t i = 0; i < iv.size(); ++i) u[iv[i]] = u_int[static_cast<Eigen::Index>(i)];
  return u;
}

struct Grad2 {
  double g1 = 0.0, g2 = 0.0;
};

Grad2 simplex_gradient(const fem::FemOperators& ops, Eigen::Index j,
                       const Eigen::VectorXd& u) {
  const auto& t = ops.mesh().simplex(j);
  Grad2 g;
  for (int a = 0; a < 3; ++a) {
    const auto& d = ops.local_gradient(j, a);
    g.g1 += d[0] * u[t[a]];
    g.g2 += d[1] * u[t[a]];
  }
  return g;
}

// a(r) = (kappa + r)^(p-2), the scalar in S(xi) = a(|xi|) xi.
double coef(double r, const GrowthParams& prm) {
  const double base = prm.kappa + r;
  if (base == 0.0) return prm.p == 2.0 ? 1.0 : 0.0;  // callers rule out p < 2 here
  return std::pow(base, prm.p - 2.0);
}

// a'(r) / r, the rank-one coefficient of the Hessian of psi(|xi|).
double coef_prime_over_r(double r, const GrowthParams& prm) {
  if (prm.p == 2.0 || r == 0.0) return 0.0;
  return (prm.p - 2.0) * std::pow(prm.kappa + r, prm.p - 3.0) / r;
}

void check_singular(double r, const StepProblem& prob, double eps, Eigen::Index j) {
  if (r == 0.0 && prob.params().p < 2.0 && prob.params().kappa == 0.0) {
    fail(ErrorKind::Input,
         "gradient singular: zero gradient on simplex " + std::to_string(j) +
             " with p < 2, kappa = 0 and eps = " + std::to_string(eps));
  }
}

double energy(const StepProblem& prob, const Eigen::VectorXd& u, double eps) {
  const auto& ops = prob.ops();
  const auto& prm = prob.params();
  const double e2 = eps * eps;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    const Grad2 g = simplex_gradient(ops, j, u);
    double local = 0.0;
    if (prob.formulation() == Formulation::Euclidean) {
      local = constitutive::energy_density(std::sqrt(e2 + g.g1 * g.g1 + g.g2 * g.g2), prm);
    } else {
      local = constitutive::energy_density(std::sqrt(e2 + g.g1 * g.g1), prm) +
              constitutive::energy_density(std::sqrt(e2 + g.g2 * g.g2), prm);
    }
    sum += ops.areas()[j] * local;
  }
  return sum;
}

// Per-simplex 2x2 Hessian of the regularized density, and the stress s.
struct LocalTerms {
  double s1, s2;
  double h11, h12, h22;
};

LocalTerms local_terms(const StepProblem& prob, const Grad2& g, double eps,
                       Eigen::Index j, bool with_hessian) {
  const auto& prm = prob.params();
  const double e2 = eps * eps;
  LocalTerms lt{};
  if (prob.formulation() == Formulation::Euclidean) {
    const double r = std::sqrt(e2 + g.g1 * g.g1 + g.g2 * g.g2);
    check_singular(r, prob, eps, j);
    const double a = coef(r, prm);
    lt.s1 = a * g.g1;
    lt.s2 = a * g.g2;
    if (with_hessian) {
      const double c = coef_prime_over_r(r, prm);
      lt.h11 = a + c * g.g1 * g.g1;
      lt.h12 = c * g.g1 * g.g2;
      lt.h22 = a + c * g.g2 * g.g2;
    }
  } else {
    const double r1 = std::sqrt(e2 + g.g1 * g.g1);
    const double r2 = std::sqrt(e2 + g.g2 * g.g2);
    check_singular(r1, prob, eps, j);
    check_singular(r2, prob, eps, j);
    const double a1 = coef(r1, prm);
    const double a2 = coef(r2, prm);
    lt.s1 = a1 * g.g1;
    lt.s2 = a2 * g.g2;
    if (with_hessian) {
      lt.h11 = a1 + coef_prime_over_r(r1, prm) * g.g1 * g.g1;
      lt.h12 = 0.0;
      lt.h22 = a2 + coef_prime_over_r(r2, prm) * g.g2 * g.g2;
    }
  }
  return lt;
}

Eigen::VectorXd gradient_full(const StepProblem& prob, const Eigen::VectorXd& u,
                              double eps) {
  const auto& ops = prob.ops();
  Eigen::VectorXd grad = ops.mass() * u;
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    const Grad2 g = simplex_gradient(ops, j, u);
    const LocalTerms lt = local_terms(prob, g, eps, j, false);
    const double w = prob.tau() * ops.areas()[j];
    const auto& t = ops.mesh().simplex(j);
    for (int a = 0; a < 3; ++a) {
      const auto& d = ops.local_gradient(j, a);
      grad[t[a]] += w * (d[0] * lt.s1 + d[1] * lt.s2);
    }
  }
  return grad;
}

Eigen::VectorXd interior_gradient(const StepProblem& prob, const Eigen::VectorXd& u,
                                  double eps) {
  const Eigen::VectorXd full = gradient_full(prob, u, eps);
  const auto& iv = prob.ops().interior_vertices();
  Eigen::VectorXd out(static_cast<Eigen::Index>(iv.size()));
  for (std::size_t i = 0; i < iv.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = full[iv[i]];
  }
  return out - prob.load();
}

class HessianBuilder {
 public:
  explicit HessianBuilder(const StepProblem& prob) : prob_(prob) {
    const auto& ops = prob.ops();
    const auto& pm = ops.interior_mass();
    for (Eigen::Index r = 0; r < pm.outerSize(); ++r) {
      for (fem::SparseMatrix::InnerIterator it(pm, r); it; ++it) {
        mass_.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }

  ColSparse build(const Eigen::VectorXd& u, double eps, double shift) const {
    const auto& ops = prob_.ops();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mass_.size() + 9 * static_cast<std::size_t>(ops.num_simplices()));
    for (const auto& m : mass_) trips.emplace_back(m.row(), m.col(), (1.0 + shift) * m.value());
    for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
      const Grad2 g = simplex_gradient(ops, j, u);
      const LocalTerms lt = local_terms(prob_, g, eps, j, true);
      const double w = prob_.tau() * ops.areas()[j];
      const auto& t = ops.mesh().simplex(j);
      for (int a = 0; a < 3; ++a) {
        const int ia = ops.interior_index(t[a]);
        if (ia < 0) continue;
        const auto& da = ops.local_gradient(j, a);
        const double ha1 = lt.h11 * da[0] + lt.h12 * da[1];
        const double ha2 = lt.h12 * da[0] + lt.h22 * da[1];
        for (int b = 0; b < 3; ++b) {
          const int ib = ops.interior_index(t[b]);
          if (ib < 0) continue;
          const auto& db = ops.local_gradient(j, b);
          trips.emplace_back(ia, ib, w * (ha1 * db[0] + ha2 * db[1]));
        }
      }
    }
    const auto n = ops.num_interior();
    ColSparse h(n, n);
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
  }

 private:
  const StepProblem& prob_;
  std::vector<Eigen::Triplet<double>> mass_;
};

}  // namespace

StepProblem::StepProblem(const fem::FemOperators& ops, constitutive::GrowthParams params,
                         double tau, fem::BrokenFeFunction forcing, Formulation formulation)
    : ops_(&ops),
      params_(params),
      tau_(tau),
      forcing_(std::move(forcing)),
      formulation_(formulation) {
  params_.validate();
  require(std::isfinite(tau) && tau >= 0.0, ErrorKind::Input, "time step must be >= 0");
  require(forcing_.coeffs.size() == 3 * ops.num_simplices(), ErrorKind::Input,
          "forcing has length " + std::to_string(forcing_.coeffs.size()) +
              ", expected 3 x simplex count " + std::to_string(3 * ops.num_simplices()));
  require(forcing_.coeffs.allFinite(), ErrorKind::Input, "forcing is not finite");
  const Eigen::VectorXd full = ops.broken_mass().transpose() * forcing_.coeffs;
  load_ = ops.restriction() * full;
}

bool StepProblem::needs_regularization() const {
  return params_.p < 2.0 && params_.kappa == 0.0;
}

double StepProblem::floor_eps() const {
  return needs_regularization() ? params_.eps_reg : 0.0;
}

double objective(const StepProblem& prob, const Eigen::VectorXd& u_interior) {
  return objective(prob, u_interior, 0.0);
}

double objective(const StepProblem& prob, const Eigen::VectorXd& u_interior, double eps) {
  const Eigen::VectorXd u = to_full(prob.ops(), u_interior);
  return 0.5 * u.dot(prob.ops().mass() * u) + prob.tau() * energy(prob, u, eps) -
         prob.load().dot(u_interior);
}

Eigen::VectorXd gradient(const StepProblem& prob, const Eigen::VectorXd& u_interior,
                         double eps) {
  require(std::isfinite(eps) && eps >= 0.0, ErrorKind::Input, "eps must be >= 0");
  return interior_gradient(prob, to_full(prob.ops(), u_interior), eps);
}

StepSolution solve_step(const StepProblem& prob, const Eigen::VectorXd& warm_start,
                        const SolverOptions& options) {
  require(options.tol > 0.0, ErrorKind::Input, "solver tolerance must be > 0");
  const auto& ops = prob.ops();

  std::vector<double> levels;
  if (prob.needs_regularization()) {
    require(prob.params().eps_reg > 0.0, ErrorKind::Input,
            "p < 2 with kappa = 0 needs eps_reg > 0");
    for (double e : options.eps_schedule) {
      if (e > prob.params().eps_reg) levels.push_back(e);
    }
    levels.push_back(prob.params().eps_reg);
  } else {
    levels.push_back(0.0);
  }

  StepSolution sol;
  SolveReport& rep = sol.report;
  rep.continuation_levels = levels;
  Eigen::VectorXd u = to_full(ops, warm_start);
  Eigen::VectorXd u_int = warm_start;

  const double final_eps = levels.back();
  rep.target_grad_norm =
      options.tol * (1.0 + interior_gradient(prob, u, final_eps).norm());

  HessianBuilder hessian(prob);
  Eigen::SimplicialLDLT<ColSparse> ldlt;
  bool analyzed = false;

  for (std::size_t level = 0; level < levels.size(); ++level) {
    const double eps = levels[level];
    const bool last = level + 1 == levels.size();
    Eigen::VectorXd grad = interior_gradient(prob, u, eps);
    const double target =
        last ? rep.target_grad_norm : options.tol * (1.0 + grad.norm());
    double obj = objective(prob, u_int, eps);
    rep.objective_trace.push_back(obj);

    int it = 0;
    while (grad.norm() > target) {
      if (it == options.max_iterations_per_level) {
        rep.final_grad_norm = grad.norm();
        throw SolveError("Newton iteration cap (" + std::to_string(it) +
                             ") reached at eps = " + std::to_string(eps) +
                             ", gradient norm " + std::to_string(grad.norm()),
                         rep);
      }
      ++it;
      ++rep.iterations;

      Eigen::VectorXd dir;
      for (double shift = 0.0;; shift = shift == 0.0 ? 1e-12 : 10.0 * shift) {
        const ColSparse h = hessian.build(u, eps, shift);
        if (!analyzed) {
          ldlt.analyzePattern(h);
          analyzed = true;
        }
        ldlt.factorize(h);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
          dir = -ldlt.solve(grad);
          break;
        }
        ++rep.hessian_shifts;
        require(shift < 1e3, ErrorKind::Convergence, "Hessian could not be factorized");
      }

      const double slope = grad.dot(dir);
      // Below this the predicted decrease is lost in the objective's roundoff
      // and Armijo cannot tell progress from noise.
      const double resolvable = 64.0 * std::numeric_limits<double>::epsilon() *
                                std::max(std::abs(obj), 1e-300);
      bool accepted = false;
      double alpha = 1.0;
      Eigen::VectorXd trial;
      if (-slope > resolvable) {
        for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
          trial = u_int + alpha * dir;
          const double value = objective(prob, trial, eps);
          if (value < obj + options.armijo_c1 * alpha * slope) {
            obj = value;
            accepted = true;
            break;
          }
        }
        // For p < 2 the full step overshoots along the gradient direction of
        // each simplex by up to 1 / (p - 1); keep halving while that pays.
        while (accepted && alpha > 1e-3) {
          const Eigen::VectorXd shorter = u_int + 0.5 * alpha * dir;
          const double value = objective(prob, shorter, eps);
          if (!(value < obj)) break;
          obj = value;
          trial = shorter;
          alpha *= 0.5;
        }
      }
      if (accepted) {
        u_int = trial;
        u = to_full(ops, u_int);
        grad = interior_gradient(prob, u, eps);
        rep.objective_trace.push_back(obj);
        continue;
      }

      // No decrease detectable in floating point: accept the longest damped
      // step that still reduces the gradient norm.
      bool polished = false;
      alpha = 1.0;
      for (int halving = 0; halving < 30; ++halving, alpha *= 0.5) {
        trial = u_int + alpha * dir;
        const Eigen::VectorXd trial_full = to_full(ops, trial);
        const Eigen::VectorXd trial_grad = interior_gradient(prob, trial_full, eps);
        if (trial_grad.norm() < grad.norm()) {
          u_int = trial;
          u = trial_full;
          grad = trial_grad;
          obj = objective(prob, u_int, eps);
          ++rep.polish_steps;
          polished = true;
          break;
        }
      }
      if (polished) continue;
      rep.final_grad_norm = grad.norm();
      throw SolveError("line search failed at eps = " + std::to_string(eps) +
                           ", gradient norm " + std::to_string(grad.norm()) +
                           " above target " + std::to_string(target),
                       rep);
    }
    rep.final_grad_norm = grad.norm();
  }
  sol.u_interior = std::move(u_int);
  return sol;
}

Eigen::VectorXd nonlinear_residual_term(const StepProblem& prob,
                                        const Eigen::VectorXd& u_full, double eps) {
  const auto& ops = prob.ops();
  require(u_full.size() == ops.num_vertices(), ErrorKind::Input,
          "coefficient vector length mismatch");
  const auto grads = fem::gradient_per_simplex(ops, fem::FeFunction{u_full});
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ops.num_vertices());
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    const auto& xi = grads[static_cast<std::size_t>(j)];
    constitutive::SmallMatrix s(1, 2);
    if (prob.formulation() == Formulation::Euclidean) {
      s = constitutive::tensor_s_regularized(xi, prob.params(), eps);
    } else {
      for (int i = 0; i < 2; ++i) {
        constitutive::SmallMatrix c(1, 1);
        c(0, 0) = xi(0, i);
        s(0, i) = constitutive::tensor_s_regularized(c, prob.params(), eps)(0, 0);
      }
    }
    const double w = prob.tau() * ops.areas()[j];
    for (int i = 0; i < 2; ++i) {
      for (fem::SparseMatrix::InnerIterator it(ops.dgrad(i), j); it; ++it) {
        out[it.col()] += w * it.value() * s(0, i);
      }
    }
  }
  return out;
}

double kkt_residual(const StepProblem& prob, const Eigen::VectorXd& u_interior) {
  const auto& ops = prob.ops();
  const Eigen::VectorXd u = to_full(ops, u_interior);
  const Eigen::VectorXd full = ops.mass() * u +
                               nonlinear_residual_term(prob, u, prob.floor_eps()) -
                               ops.broken_mass().transpose() * prob.forcing().coeffs;
  return (ops.restriction() * full).norm();
}

}  // namespace splap::psolver
