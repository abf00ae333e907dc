#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fem.hpp"

namespace splap::stochastics {

// ---------------------------------------------------------------------------
// Reproducible random numbers. All randomness is a pure function of
// (seed, counter), so any entry of any stream can be regenerated without
// replaying the others and results do not depend on thread scheduling.

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Seed of substream `stream` of `master`; distinct streams give distinct seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
/// Uniform in the open interval (0, 1) from counter `ctr` of stream `seed`.
double uniform_open(std::uint64_t seed, std::uint64_t ctr);
/// Standard normal from counters 2*ctr and 2*ctr+1 (Box-Muller, cosine branch).
double standard_normal(std::uint64_t seed, std::uint64_t ctr);

// ---------------------------------------------------------------------------

enum class GridKind { Deterministic, Random };

/// Time points 0 = t_0 < t_1 < ... < t_M with mean step tau = T / M.
struct TimeGrid {
  std::vector<double> points;
  double horizon = 1.0;
  double mean_step = 1.0;
  GridKind kind = GridKind::Deterministic;

  int steps() const { return static_cast<int>(points.size()) - 1; }
  double step(int m) const { return points[m] - points[m - 1]; }

  /// Throws ErrorKind::Validation if an invariant is broken.
  void validate() const;
};

TimeGrid uniform_time_grid(int M, double T);

/// t_m ~ U[m tau - tau/4, m tau + tau/4] independently, deterministic in seed.
TimeGrid random_time_grid(std::uint64_t seed, int M, double T);

/// Moves every point of a random grid to the nearest multiple of fine_step
/// that stays inside its admissible window. Requires fine_step <= tau / 4.
TimeGrid snap_to_fine_grid(const TimeGrid& grid, double fine_step);

/// Index k with t == k * fine_step, or throws ErrorKind::Input when t is not
/// (up to 1e-9 relative rounding) a point of the fine grid.
long fine_index(double t, double fine_step);

// ---------------------------------------------------------------------------

/// K independent Brownian motions sampled on the uniform grid of N_fine
/// steps over [0, T]. increments(m, k) ~ N(0, T / N_fine).
class NoisePath {
 public:
  NoisePath() = default;
  NoisePath(std::uint64_t seed, double horizon, long n_fine,
            Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inc);

  std::uint64_t seed() const { return seed_; }
  double horizon() const { return horizon_; }
  long n_fine() const { return static_cast<long>(increments_.rows()); }
  int components() const { return static_cast<int>(increments_.cols()); }
  double finest_step() const { return horizon_ / static_cast<double>(n_fine()); }
  const auto& increments() const { return increments_; }

  /// W(b tau_fine) - W(a tau_fine): left-to-right sum of fine increments
  /// a+1..b. Coarse increments therefore equal the ordered fine sums exactly.
  Eigen::VectorXd increment(long a, long b) const;

  /// Path restricted to [0, n tau_fine].
  NoisePath truncated(long n) const;

 private:
  std::uint64_t seed_ = 0;
  double horizon_ = 1.0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> increments_;
};

NoisePath sample_path(std::uint64_t seed, double T, long n_fine, int K);

/// Binary sidecar: "SPLAPW1\0", uint64 N_fine, uint64 K, then N_fine*K
/// little-endian doubles, row-major.
void write_path(const NoisePath& path, std::ostream& out);

// ---------------------------------------------------------------------------

enum class NoiseMode { Additive, Multiplicative };

/// Spatial profile of the noise, constant per simplex and Brownian component.
struct NoiseCoefficient {
  /// ns x K.
  Eigen::MatrixXd values;
  NoiseMode mode = NoiseMode::Additive;
  /// Applied nodally to the state in multiplicative mode.
  std::function<double(double)> sigma;

  int components() const { return static_cast<int>(values.cols()); }
};

/// values(j, k) = scale * profile(barycenter_j) / (k + 1).
NoiseCoefficient noise_from_profile(
    const mesh::Mesh& mesh, const std::function<double(const mesh::Point&)>& profile,
    double scale, int K);

/// |x|^(-1/2) evaluated at simplex barycenters.
NoiseCoefficient inverse_sqrt_radius_noise(const mesh::Mesh& mesh, double scale, int K);

/// Multiplicative coefficient: state-independent profile times sigma(u).
NoiseCoefficient with_sigma(NoiseCoefficient phi, std::function<double(double)> sigma);

/// Sampled check of |sigma(x)| <= c (1 + |x|); throws ErrorKind::Input when
/// the ratio keeps growing on large arguments.
void check_linear_growth(const std::function<double(double)>& sigma);

/// f = state + Phi(state) dW as a broken function: on simplex j, local node a,
/// additive:       state_a + sum_k Phi_jk dW_k
/// multiplicative: state_a + sum_k Phi_jk sigma(state_a) dW_k
fem::BrokenFeFunction noise_load(const fem::FemOperators& ops,
                                 const NoiseCoefficient& phi,
                                 const fem::FeFunction& state,
                                 const Eigen::VectorXd& dW);

}  // namespace splap::stochastics
