#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "stochastics.hpp"

using namespace splap;
using namespace splap::stochastics;

TEST_CASE("sample_path is a deterministic function of the seed") {
  const NoisePath a = sample_path(42, 1.0, 64, 3);
  const NoisePath b = sample_path(42, 1.0, 64, 3);
  const NoisePath c = sample_path(43, 1.0, 64, 3);
  CHECK(a.increments() == b.increments());
  CHECK(a.increments() != c.increments());
  CHECK(a.n_fine() == 64);
  CHECK(a.components() == 3);
  CHECK(a.finest_step() == 1.0 / 64);
  CHECK_THROWS_AS(sample_path(1, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(sample_path(1, 1.0, 4, 0), Error);
}

TEST_CASE("W(T) statistics over many seeds") {
  const int n = 100000;
  const double T = 2.0;
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const NoisePath w = sample_path(derive_seed(99, s), T, 8, 1);
    const double wt = w.increment(0, 8)[0];
    sum += wt;
    sum2 += wt * wt;
  }
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1);
  CHECK(std::abs(mean) < 4.0 * std::sqrt(T / n));
  CHECK(std::abs(var - T) < 0.05 * T);
}

TEST_CASE("Kolmogorov-Smirnov on normalized fine increments") {
  const long n = 100000;
  const double T = 0.5;
  const NoisePath w = sample_path(2024, T, n, 1);
  std::vector<double> z(n);
  const double scale = std::sqrt(T / n);
  for (long i = 0; i < n; ++i) z[i] = w.increments()(i, 0) / scale;
  std::sort(z.begin(), z.end());
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double cdf = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("increments are exact ordered partial sums") {
  const NoisePath w = sample_path(5, 1.0, 128, 2);
  CHECK(w.increment(17, 17).isZero());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(2);
  for (long i = 0; i < 128; ++i) total += w.increments().row(i).transpose();
  CHECK(w.increment(0, 128) == total);

  // Additivity is exact when the pieces are accumulated in the same order.
  for (long a = 0; a <= 128; a += 16)
    for (long b = a; b <= 128; b += 8) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(2);
      for (long i = a; i < b; ++i) acc += w.increments().row(i).transpose();
      CHECK(w.increment(a, b) == acc);
    }
  CHECK_THROWS_AS(w.increment(3, 2), Error);
  CHECK_THROWS_AS(w.increment(-1, 2), Error);
  CHECK_THROWS_AS(w.increment(0, 129), Error);

  const NoisePath head = w.truncated(32);
  CHECK(head.n_fine() == 32);
  CHECK(head.horizon() == doctest::Approx(0.25));
  CHECK(head.increment(0, 32) == w.increment(0, 32));
}

TEST_CASE("uniform grids") {
  const TimeGrid g = uniform_time_grid(4, 1.0);
  CHECK(g.points == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(g.kind == GridKind::Deterministic);
  for (int m = 1; m <= g.steps(); ++m) CHECK(g.step(m) == 0.25);

  const TimeGrid coarse = uniform_time_grid(8, 1.0), fine = uniform_time_grid(32, 1.0);
  for (int m = 0; m <= 8; ++m) CHECK(coarse.points[m] == fine.points[4 * m]);
  CHECK_THROWS_AS(uniform_time_grid(0, 1.0), Error);
}

TEST_CASE("random grid law") {
  const int M = 5;
  const double T = 1.0, tau = T / M;
  const int n = 100000;
  double sum1 = 0.0;
  for (int s = 0; s < n; ++s) {
    const TimeGrid g = random_time_grid(derive_seed(7, s), M, T);
    REQUIRE(g.steps() == M);
    CHECK(g.points[0] == 0.0);
    for (int m = 1; m <= M; ++m) {
      const double t = g.points[m];
      if (!(t >= m * tau - tau / 4 && t <= m * tau + tau / 4)) FAIL("point outside window");
      if (!(g.step(m) >= tau / 2 && g.step(m) <= 1.5 * tau)) FAIL("step outside bounds");
    }
    sum1 += g.points[1];
  }
  // U[3tau/4, 5tau/4] has standard deviation tau / (2 sqrt 12).
  const double se = tau / (2.0 * std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum1 / n - tau) < 4.0 * se);

  const TimeGrid one = random_time_grid(1, 1, 4.0);
  CHECK(one.points[1] >= 3.0);
  CHECK(one.points[1] <= 5.0);
  CHECK(random_time_grid(3, 4, 1.0).points == random_time_grid(3, 4, 1.0).points);
}

TEST_CASE("snapping random grids onto the fine grid") {
  const double fine = 1.0 / 64;
  for (int s = 0; s < 200; ++s) {
    const TimeGrid g = random_time_grid(s, 4, 1.0);
    const TimeGrid snapped = snap_to_fine_grid(g, fine);
    CHECK_NOTHROW(snapped.validate());
    for (int m = 1; m <= 4; ++m) {
      const double t = snapped.points[m];
      CHECK(std::abs(t / fine - std::round(t / fine)) < 1e-9);
      CHECK(t >= m * 0.25 - 0.0625 - 1e-12);
      CHECK(t <= m * 0.25 + 0.0625 + 1e-12);
      CHECK(std::abs(t - g.points[m]) <= fine);
    }
  }
  CHECK_THROWS_AS(snap_to_fine_grid(random_time_grid(1, 4, 1.0), 0.25), Error);
  CHECK(fine_index(0.375, 1.0 / 8) == 3);
  CHECK_THROWS_AS(fine_index(0.3, 1.0 / 8), Error);
}

TEST_CASE("seed derivation separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(derive_seed(1, r));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const double u = uniform_open(3, c);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("noise load") {
  const mesh::Mesh m = mesh::generate_unit_square(4);
  const auto ops = fem::assemble(m);
  fem::FeFunction state{Eigen::VectorXd::Random(m.num_vertices())};

  const NoiseCoefficient phi = inverse_sqrt_radius_noise(m, 1.0, 1);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CHECK(noise_load(ops, phi, state, zero).coeffs == fem::broken_embed(ops, state).coeffs);

  NoiseCoefficient unit = noise_from_profile(m, [](const mesh::Point&) { return 1.0; }, 1.0, 1);
  const fem::FeFunction z{Eigen::VectorXd::Zero(m.num_vertices())};
  Eigen::VectorXd half(1);
  half << 0.5;
  CHECK(noise_load(ops, unit, z, half).coeffs ==
        Eigen::VectorXd::Constant(3 * m.num_simplices(), 0.5));

  // Multiplicative: sigma(u) = u doubles the local node values for dW = 1.
  NoiseCoefficient mult = with_sigma(unit, [](double u) { return u; });
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const auto fb = noise_load(ops, mult, state, one);
  CHECK((fb.coeffs - 2.0 * fem::broken_embed(ops, state).coeffs).norm() < 1e-14);

  CHECK_THROWS_AS(noise_load(ops, phi, state, Eigen::VectorXd::Zero(2)), Error);
  CHECK_THROWS_AS(noise_load(ops, phi, fem::FeFunction{Eigen::VectorXd::Zero(3)}, zero), Error);
  CHECK_THROWS_AS(with_sigma(unit, [](double u) { return u * u; }), Error);
}

TEST_CASE("inverse square root profile on the paper mesh") {
  const mesh::Mesh m = mesh::generate_unit_square(32);
  const NoiseCoefficient phi = inverse_sqrt_radius_noise(m, 1.0, 1);
  REQUIRE(phi.values.rows() == static_cast<Eigen::Index>(m.num_simplices()));
  CHECK(phi.values.allFinite());
  CHECK(phi.values.minCoeff() > 0.0);
  const auto b = m.barycenter(0);
  CHECK(phi.values(0, 0) == doctest::Approx(std::pow(std::hypot(b[0], b[1]), -0.5)));
}

TEST_CASE("path sidecar layout") {
  const NoisePath w = sample_path(9, 1.0, 3, 2);
  std::ostringstream out;
  write_path(w, out);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 8 + 16 + 6 * 8);
  CHECK(bytes.substr(0, 7) == "SPLAPW1");
  CHECK(bytes[7] == '\0');
  std::uint64_t n = 0, k = 0;
  std::memcpy(&n, bytes.data() + 8, 8);
  std::memcpy(&k, bytes.data() + 16, 8);
  CHECK(n == 3);
  CHECK(k == 2);
  double v = 0.0;
  std::memcpy(&v, bytes.data() + 24 + 8 * 3, 8);
  CHECK(v == w.increments()(1, 1));
}
