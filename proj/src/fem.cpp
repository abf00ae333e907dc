#include "fem.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace splap::fem {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_length(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  require(v.size() == n, ErrorKind::Input,
          std::string(what) + " has length " + std::to_string(v.size()) +
              ", expected " + std::to_string(n));
}

}  // namespace

Eigen::VectorXd FemOperators::prolong(const Eigen::VectorXd& interior) const {
  require_length(interior, num_interior(), "interior vector");
  return restriction_.transpose() * interior;
}

Eigen::VectorXd FemOperators::restrict_interior(const Eigen::VectorXd& full) const {
  require_length(full, num_vertices(), "coefficient vector");
  return restriction_ * full;
}

FemOperators assemble(std::shared_ptr<const mesh::Mesh> mesh_ptr) {
  require(mesh_ptr != nullptr, ErrorKind::Input, "assemble: null mesh");
  const mesh::Mesh& mesh = *mesh_ptr;
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  const auto ns = static_cast<Eigen::Index>(mesh.num_simplices());

  FemOperators ops;
  ops.mesh_ = mesh_ptr;
  ops.areas_.resize(ns);
  ops.local_grads_.resize(3 * static_cast<std::size_t>(ns));

  std::vector<Triplet> mass, broken, d1, d2;
  mass.reserve(9 * ns);
  broken.reserve(9 * ns);
  d1.reserve(3 * ns);
  d2.reserve(3 * ns);

  for (Eigen::Index j = 0; j < ns; ++j) {
    const auto& t = mesh.simplex(j);
    const double area = mesh.signed_area(j);
    require(area > 0.0, ErrorKind::Validation,
            "assembly: degenerate simplex " + std::to_string(j));
    ops.areas_[j] = area;

    const auto& x0 = mesh.vertex(t[0]);
    const auto& x1 = mesh.vertex(t[1]);
    const auto& x2 = mesh.vertex(t[2]);
    const double inv2a = 1.0 / (2.0 * area);
    const std::array<std::array<double, 2>, 3> grads{{
        {(x1[1] - x2[1]) * inv2a, (x2[0] - x1[0]) * inv2a},
        {(x2[1] - x0[1]) * inv2a, (x0[0] - x2[0]) * inv2a},
        {(x0[1] - x1[1]) * inv2a, (x1[0] - x0[0]) * inv2a},
    }};

    for (int a = 0; a < 3; ++a) {
      ops.local_grads_[3 * j + a] = grads[a];
      d1.emplace_back(j, t[a], grads[a][0]);
      d2.emplace_back(j, t[a], grads[a][1]);
      for (int b = 0; b < 3; ++b) {
        const double m = area / 12.0 * (a == b ? 2.0 : 1.0);
        mass.emplace_back(t[a], t[b], m);
        broken.emplace_back(3 * j + a, t[b], m);
      }
    }
  }

  ops.mass_.resize(nv, nv);
  ops.mass_.setFromTriplets(mass.begin(), mass.end());
  ops.broken_mass_.resize(3 * ns, nv);
  ops.broken_mass_.setFromTriplets(broken.begin(), broken.end());
  ops.dgrad_[0].resize(ns, nv);
  ops.dgrad_[0].setFromTriplets(d1.begin(), d1.end());
  ops.dgrad_[1].resize(ns, nv);
  ops.dgrad_[1].setFromTriplets(d2.begin(), d2.end());

  ops.interior_index_.assign(static_cast<std::size_t>(nv), -1);
  std::vector<Triplet> r;
  for (Eigen::Index k = 0; k < nv; ++k) {
    if (mesh.on_boundary(k)) continue;
    const int row = static_cast<int>(ops.interior_vertices_.size());
    ops.interior_index_[k] = row;
    ops.interior_vertices_.push_back(static_cast<int>(k));
    r.emplace_back(row, k, 1.0);
  }
  const auto ni = static_cast<Eigen::Index>(ops.interior_vertices_.size());
  ops.restriction_.resize(ni, nv);
  ops.restriction_.setFromTriplets(r.begin(), r.end());
  ops.interior_mass_ = ops.restriction_ * ops.mass_ * ops.restriction_.transpose();
  return ops;
}

FemOperators assemble(const mesh::Mesh& mesh) {
  return assemble(std::make_shared<const mesh::Mesh>(mesh));
}

std::vector<constitutive::SmallMatrix> gradient_per_simplex(
    const FemOperators& ops, const FeFunction& u) {
  require_length(u.coeffs, ops.num_vertices(), "FE function");
  const Eigen::VectorXd g1 = ops.dgrad(0) * u.coeffs;
  const Eigen::VectorXd g2 = ops.dgrad(1) * u.coeffs;
  std::vector<constitutive::SmallMatrix> out;
  out.reserve(static_cast<std::size_t>(ops.num_simplices()));
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    out.push_back(constitutive::row2(g1[j], g2[j]));
  }
  return out;
}

double l2_error_sq(const FemOperators& ops, const FeFunction& u,
                   const FeFunction& v) {
  require_length(u.coeffs, ops.num_vertices(), "u");
  require_length(v.coeffs, ops.num_vertices(), "v");
  const Eigen::VectorXd e = u.coeffs - v.coeffs;
  return e.dot(ops.mass() * e);
}

double quasinorm_error_sq(const FemOperators& ops, const FeFunction& u,
                          const FeFunction& v,
                          const constitutive::GrowthParams& params) {
  require_length(v.coeffs, ops.num_vertices(), "v");
  const auto gu = gradient_per_simplex(ops, u);
  const auto gv = gradient_per_simplex(ops, v);
  double sum = 0.0;
  for (std::size_t j = 0; j < gu.size(); ++j) {
    sum += ops.areas()[static_cast<Eigen::Index>(j)] *
           constitutive::quasi_distance_sq(gu[j], gv[j], params);
  }
  return sum;
}

FeFunction nodal_interpolate(const mesh::Mesh& mesh,
                             const std::function<double(const mesh::Point&)>& g) {
  FeFunction u{Eigen::VectorXd(static_cast<Eigen::Index>(mesh.num_vertices()))};
  for (std::size_t k = 0; k < mesh.num_vertices(); ++k) {
    const double value = g(mesh.vertex(k));
    require(std::isfinite(value), ErrorKind::Input,
            "interpolated function is not finite at vertex " + std::to_string(k));
    u.coeffs[static_cast<Eigen::Index>(k)] = value;
  }
  return u;
}

BrokenFeFunction broken_embed(const FemOperators& ops, const FeFunction& u) {
  require_length(u.coeffs, ops.num_vertices(), "FE function");
  const auto& mesh = ops.mesh();
  BrokenFeFunction out{Eigen::VectorXd(3 * ops.num_simplices())};
  for (Eigen::Index j = 0; j < ops.num_simplices(); ++j) {
    const auto& t = mesh.simplex(j);
    for (int a = 0; a < 3; ++a) out.coeffs[3 * j + a] = u.coeffs[t[a]];
  }
  return out;
}

SparseMatrix assemble_stiffness(const mesh::Mesh& mesh) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_simplices());
  for (std::size_t j = 0; j < mesh.num_simplices(); ++j) {
    const auto& t = mesh.simplex(j);
    // Off-diagonal entry for edge (a,b) is -cot(angle at the opposite vertex)/2.
    for (int c = 0; c < 3; ++c) {
      const int a = t[(c + 1) % 3];
      const int b = t[(c + 2) % 3];
      const auto& pc = mesh.vertex(t[c]);
      const auto& pa = mesh.vertex(a);
      const auto& pb = mesh.vertex(b);
      const double ux = pa[0] - pc[0], uy = pa[1] - pc[1];
      const double vx = pb[0] - pc[0], vy = pb[1] - pc[1];
      const double cot = (ux * vx + uy * vy) / std::abs(ux * vy - uy * vx);
      trips.emplace_back(a, b, -0.5 * cot);
      trips.emplace_back(b, a, -0.5 * cot);
      trips.emplace_back(a, a, 0.5 * cot);
      trips.emplace_back(b, b, 0.5 * cot);
    }
  }
  SparseMatrix a(nv, nv);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

FeFunction transfer(const mesh::Mesh& from, const FeFunction& u,
                    const mesh::Mesh& to) {
  require_length(u.coeffs, static_cast<Eigen::Index>(from.num_vertices()),
                 "FE function");
  FeFunction out{Eigen::VectorXd(static_cast<Eigen::Index>(to.num_vertices()))};
  for (std::size_t k = 0; k < to.num_vertices(); ++k) {
    const auto& q = to.vertex(k);
    bool found = false;
    for (std::size_t j = 0; j < from.num_simplices() && !found; ++j) {
      const auto& t = from.simplex(j);
      const auto& a = from.vertex(t[0]);
      const auto& b = from.vertex(t[1]);
      const auto& c = from.vertex(t[2]);
      const double det = 2.0 * from.signed_area(j);
      const double l1 = ((b[0] - q[0]) * (c[1] - q[1]) - (b[1] - q[1]) * (c[0] - q[0])) / det;
      const double l2 = ((c[0] - q[0]) * (a[1] - q[1]) - (c[1] - q[1]) * (a[0] - q[0])) / det;
      const double l3 = 1.0 - l1 - l2;
      constexpr double tol = -1e-12;
      if (l1 >= tol && l2 >= tol && l3 >= tol) {
        out.coeffs[static_cast<Eigen::Index>(k)] =
            l1 * u.coeffs[t[0]] + l2 * u.coeffs[t[1]] + l3 * u.coeffs[t[2]];
        found = true;
      }
    }
    require(found, ErrorKind::Input,
            "transfer: vertex " + std::to_string(k) + " lies outside the source mesh");
  }
  return out;
}

}  // namespace splap::fem
