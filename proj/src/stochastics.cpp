#include "stochastics.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <ostream>
#include <string>

#include "error.hpp"

namespace splap::stochastics {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
// Substream tags so that paths and grids drawn from one seed never overlap.
constexpr std::uint64_t kPathStream = 0x50415448ULL;  // "PATH"
constexpr std::uint64_t kGridStream = 0x47524944ULL;  // "GRID"

std::uint64_t raw(std::uint64_t seed, std::uint64_t ctr) {
  return mix64(seed + (ctr + 1) * kGolden);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + kGolden));
}

double uniform_open(std::uint64_t seed, std::uint64_t ctr) {
  return (static_cast<double>(raw(seed, ctr) >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t ctr) {
  const double u1 = uniform_open(seed, 2 * ctr);
  const double u2 = uniform_open(seed, 2 * ctr + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------

void TimeGrid::validate() const {
  require(points.size() >= 2, ErrorKind::Validation, "time grid needs M >= 1");
  require(points.front() == 0.0, ErrorKind::Validation, "time grid must start at 0");
  const int M = steps();
  for (int m = 1; m <= M; ++m) {
    const double tm = step(m);
    require(tm > 0.0, ErrorKind::Validation,
            "time grid not strictly increasing at m=" + std::to_string(m));
    const double slack = 1e-12 * mean_step;
    require(tm >= 0.5 * mean_step - slack && tm <= 1.5 * mean_step + slack,
            ErrorKind::Validation,
            "time step " + std::to_string(m) + " outside [tau/2, 3 tau/2]");
    if (kind == GridKind::Random) {
      const double centre = m * mean_step;
      require(std::abs(points[m] - centre) <= 0.25 * mean_step + slack,
              ErrorKind::Validation,
              "random grid point " + std::to_string(m) + " outside its window");
    }
  }
}

TimeGrid uniform_time_grid(int M, double T) {
  require(M >= 1, ErrorKind::Input, "time grid needs M >= 1");
  require(std::isfinite(T) && T > 0.0, ErrorKind::Input, "horizon must be > 0");
  TimeGrid g;
  g.horizon = T;
  g.mean_step = T / M;
  g.kind = GridKind::Deterministic;
  g.points.resize(static_cast<std::size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) g.points[m] = m * T / M;
  return g;
}

TimeGrid random_time_grid(std::uint64_t seed, int M, double T) {
  require(M >= 1, ErrorKind::Input, "time grid needs M >= 1");
  require(std::isfinite(T) && T > 0.0, ErrorKind::Input, "horizon must be > 0");
  const std::uint64_t stream = derive_seed(seed, kGridStream);
  TimeGrid g;
  g.horizon = T;
  g.mean_step = T / M;
  g.kind = GridKind::Random;
  g.points.resize(static_cast<std::size_t>(M) + 1);
  g.points[0] = 0.0;
  const double tau = g.mean_step;
  for (int m = 1; m <= M; ++m) {
    const double u = uniform_open(stream, static_cast<std::uint64_t>(m));
    g.points[m] = m * tau + (u - 0.5) * 0.5 * tau;
  }
  return g;
}

TimeGrid snap_to_fine_grid(const TimeGrid& grid, double fine_step) {
  require(fine_step > 0.0 && fine_step <= 0.25 * grid.mean_step * (1.0 + 1e-12),
          ErrorKind::Input, "fine step must lie in (0, tau/4]");
  TimeGrid out = grid;
  const double tau = grid.mean_step;
  for (int m = 1; m <= grid.steps(); ++m) {
    const double lo = m * tau - 0.25 * tau;
    const double hi = m * tau + 0.25 * tau;
    double k = std::round(grid.points[m] / fine_step);
    if (k * fine_step < lo) k = std::ceil(lo / fine_step);
    if (k * fine_step > hi) k = std::floor(hi / fine_step);
    out.points[m] = k * fine_step;
  }
  return out;
}

long fine_index(double t, double fine_step) {
  const double q = t / fine_step;
  const double k = std::round(q);
  require(std::abs(q - k) <= 1e-9 * std::max(1.0, k), ErrorKind::Input,
          "time " + std::to_string(t) + " is not on the fine grid of step " +
              std::to_string(fine_step));
  return static_cast<long>(k);
}

// ---------------------------------------------------------------------------

NoisePath::NoisePath(std::uint64_t seed, double horizon, long n_fine,
                     Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inc)
    : seed_(seed), horizon_(horizon), increments_(std::move(inc)) {
  require(increments_.rows() == n_fine, ErrorKind::Input, "path row count mismatch");
}

Eigen::VectorXd NoisePath::increment(long a, long b) const {
  require(0 <= a && a <= b && b <= n_fine(), ErrorKind::Input,
          "increment indices (" + std::to_string(a) + ", " + std::to_string(b) +
              ") outside [0, " + std::to_string(n_fine()) + "]");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(components());
  for (long m = a; m < b; ++m) {
    for (int k = 0; k < components(); ++k) sum[k] += increments_(m, k);
  }
  return sum;
}

NoisePath NoisePath::truncated(long n) const {
  require(0 < n && n <= n_fine(), ErrorKind::Input, "truncation length out of range");
  return NoisePath(seed_, finest_step() * static_cast<double>(n), n,
                   increments_.topRows(n));
}

NoisePath sample_path(std::uint64_t seed, double T, long n_fine, int K) {
  require(n_fine >= 1, ErrorKind::Input, "path needs N_fine >= 1");
  require(K >= 1, ErrorKind::Input, "path needs K >= 1");
  require(std::isfinite(T) && T > 0.0, ErrorKind::Input, "horizon must be > 0");
  const std::uint64_t stream = derive_seed(seed, kPathStream);
  const double sd = std::sqrt(T / static_cast<double>(n_fine));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inc(n_fine, K);
  for (long m = 0; m < n_fine; ++m) {
    for (int k = 0; k < K; ++k) {
      const auto ctr = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(K) +
                       static_cast<std::uint64_t>(k);
      inc(m, k) = sd * standard_normal(stream, ctr);
    }
  }
  return NoisePath(seed, T, n_fine, std::move(inc));
}

void write_path(const NoisePath& path, std::ostream& out) {
  out.write("SPLAPW1\0", 8);
  write_u64(out, static_cast<std::uint64_t>(path.n_fine()));
  write_u64(out, static_cast<std::uint64_t>(path.components()));
  for (long m = 0; m < path.n_fine(); ++m) {
    for (int k = 0; k < path.components(); ++k) write_f64(out, path.increments()(m, k));
  }
}

// ---------------------------------------------------------------------------

NoiseCoefficient noise_from_profile(
    const mesh::Mesh& mesh, const std::function<double(const mesh::Point&)>& profile,
    double scale, int K) {
  require(K >= 1, ErrorKind::Input, "noise needs K >= 1");
  require(std::isfinite(scale), ErrorKind::Input, "noise scale must be finite");
  NoiseCoefficient phi;
  phi.values.resize(static_cast<Eigen::Index>(mesh.num_simplices()), K);
  for (std::size_t j = 0; j < mesh.num_simplices(); ++j) {
    const double v = scale * profile(mesh.barycenter(j));
    require(std::isfinite(v), ErrorKind::Input,
            "noise coefficient not finite on simplex " + std::to_string(j));
    for (int k = 0; k < K; ++k) phi.values(static_cast<Eigen::Index>(j), k) = v / (k + 1);
  }
  return phi;
}

NoiseCoefficient inverse_sqrt_radius_noise(const mesh::Mesh& mesh, double scale, int K) {
  return noise_from_profile(
      mesh, [](const mesh::Point& x) { return 1.0 / std::sqrt(std::hypot(x[0], x[1])); },
      scale, K);
}

NoiseCoefficient with_sigma(NoiseCoefficient phi, std::function<double(double)> sigma) {
  require(static_cast<bool>(sigma), ErrorKind::Input, "multiplicative noise needs sigma");
  check_linear_growth(sigma);
  phi.mode = NoiseMode::Multiplicative;
  phi.sigma = std::move(sigma);
  return phi;
}

void check_linear_growth(const std::function<double(double)>& sigma) {
  // Ratio |sigma(x)| / (1 + |x|) on moderate arguments bounds the one on
  // huge arguments for any sigma of at most linear growth.
  double moderate = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double x = i / 40.0;
    const double v = sigma(x);
    require(std::isfinite(v), ErrorKind::Input, "sigma is not finite on [-10, 10]");
    moderate = std::max(moderate, std::abs(v) / (1.0 + std::abs(x)));
  }
  for (double x : {1e3, 1e4, 1e6, 1e8}) {
    for (double s : {-1.0, 1.0}) {
      const double v = sigma(s * x);
      require(std::isfinite(v) && std::abs(v) / (1.0 + x) <= 2.0 * moderate + 1.0,
              ErrorKind::Input, "sigma violates the linear growth bound");
    }
  }
}

fem::BrokenFeFunction noise_load(const fem::FemOperators& ops,
                                 const NoiseCoefficient& phi,
                                 const fem::FeFunction& state,
                                 const Eigen::VectorXd& dW) {
  require(state.coeffs.size() == ops.num_vertices(), ErrorKind::Input,
          "noise_load: state length mismatch");
  require(phi.values.rows() == ops.num_simplices(), ErrorKind::Input,
          "noise_load: coefficient has wrong simplex count");
  require(dW.size() == phi.values.cols(), ErrorKind::Input,
          "noise_load: increment has " + std::to_string(dW.size()) +
              " components, coefficient has " + std::to_string(phi.values.cols()));
  const bool multiplicative = phi.mode == NoiseMode::Multiplicative;
  require(!multiplicative || static_cast<bool>(phi.sigma), ErrorKind::Input,
          "multiplicative noise without sigma");

  const auto& mesh = ops.mesh();
  fem::BrokenFeFunction f{Eigen::VectorXd(3 * ops.num_simplices())};
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    const double kick = phi.values.row(j).dot(dW);
    const auto& t = mesh.simplex(j);
    for (int a = 0; a < 3; ++a) {
      const double u = state.coeffs[t[a]];
      f.coeffs[3 * j + a] = u + (multiplicative ? phi.sigma(u) * kick : kick);
    }
  }
  return f;
}

}  // namespace splap::stochastics
