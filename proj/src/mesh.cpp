#include "mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "error.hpp"

namespace splap::mesh {

namespace {

double dist(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::string simplex_name(std::size_t j) { return "simplex " + std::to_string(j); }

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> simplices)
    : vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  const auto nv = static_cast<long>(vertices_.size());
  require(!simplices_.empty(), ErrorKind::Validation, "mesh has no simplices");
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    require(std::isfinite(vertices_[k][0]) && std::isfinite(vertices_[k][1]),
            ErrorKind::Validation,
            "vertex " + std::to_string(k) + " has non-finite coordinates");
  }

  double total_area = 0.0;
  for (std::size_t j = 0; j < simplices_.size(); ++j) {
    const auto& t = simplices_[j];
    for (int a : t) {
      require(a >= 0 && a < nv, ErrorKind::Validation,
              simplex_name(j) + " references vertex " + std::to_string(a) +
                  " out of range");
    }
    require(t[0] != t[1] && t[1] != t[2] && t[0] != t[2], ErrorKind::Validation,
            simplex_name(j) + " repeats a vertex");
    const double area = signed_area(j);
    require(area > 0.0, ErrorKind::Validation,
            "inverted simplex: " + simplex_name(j) +
                " is clockwise or flat (signed area " + std::to_string(area) + ")");
    total_area += area;
  }
  const double mean_area = total_area / static_cast<double>(simplices_.size());
  for (std::size_t j = 0; j < simplices_.size(); ++j) {
    require(signed_area(j) >= 1e-14 * mean_area, ErrorKind::Validation,
            "degenerate simplex: " + simplex_name(j));
  }

  // Edge manifoldness: an interior edge is shared by exactly two simplices
  // traversing it in opposite directions.
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t j = 0; j < simplices_.size(); ++j) {
    const auto& t = simplices_[j];
    for (int e = 0; e < 3; ++e) {
      const std::pair<int, int> key{t[e], t[(e + 1) % 3]};
      require(directed.emplace(key, static_cast<int>(j)).second,
              ErrorKind::Validation,
              "non-conforming mesh: edge (" + std::to_string(key.first) + "," +
                  std::to_string(key.second) + ") of " + simplex_name(j) +
                  " is used twice in the same direction");
    }
  }
  boundary_.assign(vertices_.size(), false);
  std::vector<std::pair<int, int>> boundary_edges;
  for (const auto& [edge, owner] : directed) {
    if (!directed.count({edge.second, edge.first})) {
      boundary_[edge.first] = boundary_[edge.second] = true;
      boundary_edges.push_back(edge);
    }
  }

  // Hanging nodes: a vertex lying strictly inside a boundary edge means two
  // simplices meet along a partial edge.
  std::vector<int> by_x(vertices_.size());
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](int a, int b) {
    return vertices_[a][0] < vertices_[b][0];
  });
  for (const auto& [a, b] : boundary_edges) {
    const Point& pa = vertices_[a];
    const Point& pb = vertices_[b];
    const double len = dist(pa, pb);
    const double tol = 1e-12 * len;
    const double xlo = std::min(pa[0], pb[0]) - tol;
    const double xhi = std::max(pa[0], pb[0]) + tol;
    auto it = std::lower_bound(by_x.begin(), by_x.end(), xlo, [&](int k, double x) {
      return vertices_[k][0] < x;
    });
    for (; it != by_x.end() && vertices_[*it][0] <= xhi; ++it) {
      const int k = *it;
      if (k == a || k == b) continue;
      const Point& q = vertices_[k];
      if (std::abs(cross(pa, pb, q)) / len > tol) continue;
      const double s = ((q[0] - pa[0]) * (pb[0] - pa[0]) +
                        (q[1] - pa[1]) * (pb[1] - pa[1])) / (len * len);
      require(s <= 0.0 || s >= 1.0, ErrorKind::Validation,
              "non-conforming mesh: vertex " + std::to_string(k) +
                  " lies inside edge (" + std::to_string(a) + "," +
                  std::to_string(b) + ")");
    }
  }
}

double Mesh::signed_area(std::size_t j) const {
  const auto& t = simplices_[j];
  return 0.5 * cross(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Point Mesh::barycenter(std::size_t j) const {
  const auto& t = simplices_[j];
  return {(vertices_[t[0]][0] + vertices_[t[1]][0] + vertices_[t[2]][0]) / 3.0,
          (vertices_[t[0]][1] + vertices_[t[1]][1] + vertices_[t[2]][1]) / 3.0};
}

double Mesh::diameter(std::size_t j) const {
  const auto& t = simplices_[j];
  return std::max({dist(vertices_[t[0]], vertices_[t[1]]),
                   dist(vertices_[t[1]], vertices_[t[2]]),
                   dist(vertices_[t[2]], vertices_[t[0]])});
}

double Mesh::inradius(std::size_t j) const {
  const auto& t = simplices_[j];
  const double perimeter = dist(vertices_[t[0]], vertices_[t[1]]) +
                           dist(vertices_[t[1]], vertices_[t[2]]) +
                           dist(vertices_[t[2]], vertices_[t[0]]);
  return 2.0 * signed_area(j) / perimeter;
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (std::size_t j = 0; j < simplices_.size(); ++j) h = std::max(h, diameter(j));
  return h;
}

Mesh generate_unit_square(int n) {
  require(n >= 1, ErrorKind::Input, "unit square mesh needs n >= 1");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      vertices.push_back({static_cast<double>(ix) / n, static_cast<double>(iy) / n});
    }
  }
  std::vector<Triangle> simplices;
  simplices.reserve(2 * static_cast<std::size_t>(n) * n);
  const auto id = [n](int ix, int iy) { return iy * (n + 1) + ix; };
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int ll = id(ix, iy), lr = id(ix + 1, iy);
      const int ul = id(ix, iy + 1), ur = id(ix + 1, iy + 1);
      simplices.push_back({ll, lr, ur});
      simplices.push_back({ll, ur, ul});
    }
  }
  return Mesh(std::move(vertices), std::move(simplices));
}

double nondegeneracy(const Mesh& mesh) {
  double gamma = 0.0;
  for (std::size_t j = 0; j < mesh.num_simplices(); ++j) {
    gamma = std::max(gamma, mesh.diameter(j) / mesh.inradius(j));
  }
  return gamma;
}

namespace {

std::string next_token(std::istream& in, const std::string& what) {
  std::string tok;
  require(static_cast<bool>(in >> tok), ErrorKind::Parse,
          "unexpected end of mesh input while reading " + what);
  return tok;
}

double parse_double(const std::string& tok, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(ec == std::errc() && ptr == tok.data() + tok.size(), ErrorKind::Parse,
          "bad number '" + tok + "' in " + what);
  return v;
}

long parse_int(const std::string& tok, const std::string& what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(ec == std::errc() && ptr == tok.data() + tok.size(), ErrorKind::Parse,
          "bad integer '" + tok + "' in " + what);
  return v;
}

long parse_header_count(const std::string& tok, const std::string& prefix) {
  require(tok.rfind(prefix, 0) == 0, ErrorKind::Parse,
          "mesh header expects '" + prefix + "<count>', got '" + tok + "'");
  const long v = parse_int(tok.substr(prefix.size()), "mesh header");
  require(v >= 0, ErrorKind::Parse, "negative count in mesh header");
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

Mesh load_mesh(std::istream& in) {
  require(next_token(in, "header") == "mesh", ErrorKind::Parse,
          "mesh input must start with 'mesh'");
  const long nv = parse_header_count(next_token(in, "header"), "v=");
  const long ns = parse_header_count(next_token(in, "header"), "s=");

  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (long k = 0; k < nv; ++k) {
    const std::string what = "vertex " + std::to_string(k);
    vertices[k][0] = parse_double(next_token(in, what), what);
    vertices[k][1] = parse_double(next_token(in, what), what);
  }
  std::vector<Triangle> simplices(static_cast<std::size_t>(ns));
  for (long j = 0; j < ns; ++j) {
    const std::string what = "simplex " + std::to_string(j);
    for (int a = 0; a < 3; ++a) {
      const long idx = parse_int(next_token(in, what), what);
      require(idx >= 0 && idx < nv, ErrorKind::Parse,
              what + " references vertex " + std::to_string(idx) +
                  " out of range [0, " + std::to_string(nv) + ")");
      simplices[j][a] = static_cast<int>(idx);
    }
  }
  std::string extra;
  require(!(in >> extra), ErrorKind::Parse,
          "trailing data after mesh: '" + extra + "'");
  return Mesh(std::move(vertices), std::move(simplices));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open mesh file " + path);
  return load_mesh(in);
}

std::string to_text(const Mesh& mesh) {
  std::string out = "mesh v=" + std::to_string(mesh.num_vertices()) +
                    " s=" + std::to_string(mesh.num_simplices()) + "\n";
  for (const auto& v : mesh.vertices()) {
    append_double(out, v[0]);
    out += ' ';
    append_double(out, v[1]);
    out += '\n';
  }
  for (const auto& t : mesh.simplices()) {
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
           std::to_string(t[2]) + '\n';
  }
  return out;
}

void save_mesh(const Mesh& mesh, std::ostream& out) { out << to_text(mesh); }

}  // namespace splap::mesh
