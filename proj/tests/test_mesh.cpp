#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "error.hpp"
#include "mesh.hpp"

using namespace splap;
using namespace splap::mesh;

namespace {

std::string error_message(const std::string& text) {
  std::istringstream in(text);
  try {
    load_mesh(in);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

ErrorKind error_kind(const std::string& text) {
  std::istringstream in(text);
  try {
    load_mesh(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Input;
}

}  // namespace

TEST_CASE("unit square counts") {
  CHECK(generate_unit_square(1).num_vertices() == 4);
  CHECK(generate_unit_square(1).num_simplices() == 2);
  const Mesh m32 = generate_unit_square(32);
  CHECK(m32.num_vertices() == 1089);
  CHECK(m32.num_simplices() == 2048);

  const Mesh m2 = generate_unit_square(2);
  const auto& flags = m2.boundary_flags();
  CHECK(std::count(flags.begin(), flags.end(), true) == 8);
  CHECK_FALSE(m2.on_boundary(4));
  CHECK_THROWS_AS(generate_unit_square(0), Error);
}

TEST_CASE("unit square geometry") {
  for (int n : {1, 2, 3, 7, 16, 33}) {
    const Mesh m = generate_unit_square(n);
    double area = 0.0;
    for (std::size_t j = 0; j < m.num_simplices(); ++j) {
      CHECK(m.signed_area(j) > 0.0);
      area += m.signed_area(j);
    }
    CHECK(std::abs(area - 1.0) < 1e-12);
    CHECK(m.mesh_size() == doctest::Approx(std::sqrt(2.0) / n));
    CHECK(nondegeneracy(m) == doctest::Approx(2.0 * std::sqrt(2.0) + 2.0).epsilon(1e-13));

    // Boundary flags match the geometric boundary of the square.
    for (std::size_t k = 0; k < m.num_vertices(); ++k) {
      const auto& x = m.vertex(k);
      const bool geometric = x[0] == 0.0 || x[0] == 1.0 || x[1] == 0.0 || x[1] == 1.0;
      CHECK(m.on_boundary(k) == geometric);
    }
  }
}

TEST_CASE("nondegeneracy of an equilateral triangle and scaling") {
  const Mesh tri({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}});
  CHECK(nondegeneracy(tri) == doctest::Approx(2.0 * std::sqrt(3.0)));
  CHECK(tri.inradius(0) == doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))));

  const Mesh base = generate_unit_square(3);
  for (double t : {1e-3, 0.5, 7.0}) {
    std::vector<Point> scaled = base.vertices();
    for (auto& x : scaled) x = {t * x[0], t * x[1]};
    const Mesh m(scaled, base.simplices());
    CHECK(nondegeneracy(m) == doctest::Approx(nondegeneracy(base)).epsilon(1e-12));
  }
}

TEST_CASE("text round trip is bit exact") {
  const Mesh m = generate_unit_square(4);
  const std::string text = to_text(m);
  std::istringstream in(text);
  const Mesh back = load_mesh(in);
  CHECK(back.vertices() == m.vertices());
  CHECK(back.simplices() == m.simplices());
  CHECK(back.boundary_flags() == m.boundary_flags());
  CHECK(to_text(back) == text);

  // Irrational coordinates survive as well.
  const Mesh tri({{0, 0}, {1.0 / 3.0, 0}, {0.1, std::sqrt(2.0)}}, {{0, 1, 2}});
  std::istringstream in2(to_text(tri));
  CHECK(load_mesh(in2).vertices() == tri.vertices());
}

TEST_CASE("load errors") {
  const std::string cw = "mesh v=3 s=1\n0 0\n1 0\n0 1\n0 2 1\n";
  CHECK(error_message(cw).find("inverted simplex") != std::string::npos);
  CHECK(error_kind(cw) == ErrorKind::Validation);

  const std::string oob = "mesh v=3 s=1\n0 0\n1 0\n0 1\n0 1 3\n";
  CHECK(error_kind(oob) == ErrorKind::Parse);
  CHECK(error_message(oob).find("3") != std::string::npos);

  CHECK(error_kind("mesh v=3 s=1\n0 0\n1 0\n") == ErrorKind::Parse);
  CHECK(error_kind("msh v=3 s=1\n") == ErrorKind::Parse);
  CHECK(error_kind("mesh v=3 s=1\n0 0\n1 zero\n0 1\n0 1 2\n") == ErrorKind::Parse);
  CHECK(error_kind("mesh v=3 s=1\n0 0\n1 0\n0 1\n0 1 1\n") == ErrorKind::Validation);

  // Degenerate sliver next to a regular triangle.
  CHECK(error_kind("mesh v=4 s=2\n0 0\n1 0\n0 1\n2 -1e-17\n0 1 2\n0 3 1\n") ==
        ErrorKind::Validation);
}

TEST_CASE("conformity violations are rejected") {
  // Hanging node: vertex 3 sits in the middle of the long edge 1-2.
  const std::vector<Point> v = {{0, 0}, {2, 0}, {0, 2}, {1, 1}, {2, 2}, {2, 1}};
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {1, 5, 3}, {3, 5, 4}}), Error);

  // Three triangles sharing one edge.
  const std::vector<Point> w = {{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}};
  CHECK_THROWS_AS(Mesh(w, {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}}), Error);

  // The conforming pair passes.
  CHECK_NOTHROW(Mesh(w, {{0, 1, 2}, {0, 3, 1}}));
}
