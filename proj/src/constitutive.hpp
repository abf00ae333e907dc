#pragma once

// Nonlinear stress tensor of p-Laplace type and the associated quasi-norm
// quantities. The tensor is S(xi) = (kappa + |xi|)^(p-2) xi with |.| the
// Frobenius norm; F(xi) = (kappa + |xi|)^((p-2)/2) xi linearizes it in the
// sense that |F(xi) - F(eta)|^2 ~ (S(xi) - S(eta)) : (xi - eta).

#include <Eigen/Core>

namespace splap::constitutive {

/// D x d matrix with D, d <= 3. Scalar 2D problems use 1 x 2.
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

struct GrowthParams {
  double p = 2.0;
  double kappa = 0.0;
  /// Gradient regularization floor; only the step solver reads it.
  double eps_reg = 1e-6;

  /// Throws ErrorKind::Input unless 1 < p < inf, kappa >= 0, eps_reg >= 0.
  void validate() const;
};

/// Row vector (g1, g2) as a 1 x 2 SmallMatrix.
SmallMatrix row2(double g1, double g2);

SmallMatrix tensor_s(const SmallMatrix& xi, const GrowthParams& params);
SmallMatrix tensor_f(const SmallMatrix& xi, const GrowthParams& params);

/// |F(xi) - F(eta)|^2.
double quasi_distance_sq(const SmallMatrix& xi, const SmallMatrix& eta,
                         const GrowthParams& params);

/// (S(xi) - S(eta)) : (xi - eta). Nonnegative by monotonicity of S.
double monotonicity_pairing(const SmallMatrix& xi, const SmallMatrix& eta,
                            const GrowthParams& params);

/// Scalar factor (kappa + r)^(p-2) with the continuous extension used at
/// r = 0, kappa = 0: for p < 2 this is +inf, callers multiply by r-proportional
/// quantities and must special-case r = 0 themselves.
double s_factor(double r, const GrowthParams& params);

/// Energy density psi(r) = int_0^r (kappa + s)^(p-2) s ds, so that
/// d/dxi psi(|xi|) = S(xi). Equals r^p / p for kappa = 0.
double energy_density(double r, const GrowthParams& params);

}  // namespace splap::constitutive

namespace splap::constitutive {

/// (kappa + sqrt(eps^2 + |xi|^2))^(p-2) xi; equals tensor_s for eps = 0.
SmallMatrix tensor_s_regularized(const SmallMatrix& xi, const GrowthParams& params,
                                 double eps);

}  // namespace splap::constitutive
