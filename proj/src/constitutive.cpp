#include "constitutive.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace splap::constitutive {

namespace {

void require_finite(const SmallMatrix& m, const char* name) {
  require(m.allFinite(), ErrorKind::Input,
          std::string(name) + " has non-finite entries");
}

void require_same_shape(const SmallMatrix& a, const SmallMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::Input,
          "shape mismatch: " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
              "x" + std::to_string(b.cols()));
}

// (kappa + r)^e * xi with the zero extension at the degenerate origin.
SmallMatrix scaled(const SmallMatrix& xi, double exponent,
                   const GrowthParams& params) {
  require_finite(xi, "xi");
  const double r = xi.norm();
  const double base = params.kappa + r;
  if (base == 0.0) return SmallMatrix::Zero(xi.rows(), xi.cols());
  return std::pow(base, exponent) * xi;
}

}  // namespace

void GrowthParams::validate() const {
  require(std::isfinite(p) && p > 1.0, ErrorKind::Input,
          "p must be finite and > 1, got " + std::to_string(p));
  require(std::isfinite(kappa) && kappa >= 0.0, ErrorKind::Input,
          "kappa must be >= 0");
  require(std::isfinite(eps_reg) && eps_reg >= 0.0, ErrorKind::Input,
          "eps_reg must be >= 0");
}

SmallMatrix row2(double g1, double g2) {
  SmallMatrix m(1, 2);
  m << g1, g2;
  return m;
}

SmallMatrix tensor_s(const SmallMatrix& xi, const GrowthParams& params) {
  return scaled(xi, params.p - 2.0, params);
}

SmallMatrix tensor_f(const SmallMatrix& xi, const GrowthParams& params) {
  return scaled(xi, 0.5 * (params.p - 2.0), params);
}

double quasi_distance_sq(const SmallMatrix& xi, const SmallMatrix& eta,
                         const GrowthParams& params) {
  require_same_shape(xi, eta);
  return (tensor_f(xi, params) - tensor_f(eta, params)).squaredNorm();
}

double monotonicity_pairing(const SmallMatrix& xi, const SmallMatrix& eta,
                            const GrowthParams& params) {
  require_same_shape(xi, eta);
  const SmallMatrix ds = tensor_s(xi, params) - tensor_s(eta, params);
  return (ds.array() * (xi - eta).array()).sum();
}

double s_factor(double r, const GrowthParams& params) {
  const double base = params.kappa + r;
  if (base == 0.0) {
    return params.p >= 2.0 ? (params.p == 2.0 ? 1.0 : 0.0)
                           : std::numeric_limits<double>::infinity();
  }
  return std::pow(base, params.p - 2.0);
}

double energy_density(double r, const GrowthParams& params) {
  const double p = params.p;
  const double kappa = params.kappa;
  if (r == 0.0) return 0.0;
  if (kappa == 0.0) return std::pow(r, p) / p;

  const double x = r / kappa;
  const double kp = std::pow(kappa, p);
  if (x <= 0.1) {
    // kappa^p * sum_n binom(p-2, n) x^(n+2) / (n+2); the closed form below
    // cancels catastrophically for small x.
    double coeff = 1.0;
    double xpow = x * x;
    double sum = 0.0;
    for (int n = 0; n < 64; ++n) {
      const double term = coeff * xpow / (n + 2);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coeff *= (p - 2.0 - n) / (n + 1);
      xpow *= x;
    }
    return kp * sum;
  }
  const double kr = kappa + r;
  return (std::pow(kr, p) - kp) / p -
         kappa * (std::pow(kr, p - 1.0) - std::pow(kappa, p - 1.0)) / (p - 1.0);
}

}  // namespace splap::constitutive

namespace splap::constitutive {

SmallMatrix tensor_s_regularized(const SmallMatrix& xi, const GrowthParams& params,
                                 double eps) {
  if (eps == 0.0) return tensor_s(xi, params);
  require(xi.allFinite(), ErrorKind::Input, "xi has non-finite entries");
  const double r = std::sqrt(eps * eps + xi.squaredNorm());
  return std::pow(params.kappa + r, params.p - 2.0) * xi;
}

}  // namespace splap::constitutive
