#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace splap::mesh {

using Point = std::array<double, 2>;
using Triangle = std::array<int, 3>;

/// Conforming triangulation of a polygonal 2D domain. Immutable once built;
/// the constructor validates every invariant (distinct valid indices,
/// counterclockwise orientation, non-degeneracy, conformity) and derives
/// the boundary vertex flags.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<Triangle> simplices);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_simplices() const { return simplices_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& simplices() const { return simplices_; }
  const std::vector<bool>& boundary_flags() const { return boundary_; }

  const Point& vertex(std::size_t k) const { return vertices_[k]; }
  const Triangle& simplex(std::size_t j) const { return simplices_[j]; }
  bool on_boundary(std::size_t k) const { return boundary_[k]; }

  double signed_area(std::size_t j) const;
  Point barycenter(std::size_t j) const;
  /// Longest edge of simplex j.
  double diameter(std::size_t j) const;
  /// Radius of the inscribed circle of simplex j.
  double inradius(std::size_t j) const;
  /// Max simplex diameter.
  double mesh_size() const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> simplices_;
  std::vector<bool> boundary_;
};

/// (n+1)^2 grid on the unit square; every cell is cut by its
/// lower-left/upper-right diagonal. h = sqrt(2)/n.
Mesh generate_unit_square(int n);

/// max_j diameter_j / inradius_j.
double nondegeneracy(const Mesh& mesh);

/// Plain-text format:
///   mesh v=<nv> s=<ns>
///   x y        (nv lines)
///   i j k      (ns lines, 0-based)
/// Coordinates are written in shortest round-trip form.
Mesh load_mesh(std::istream& in);
Mesh load_mesh_file(const std::string& path);
void save_mesh(const Mesh& mesh, std::ostream& out);
std::string to_text(const Mesh& mesh);

}  // namespace splap::mesh
