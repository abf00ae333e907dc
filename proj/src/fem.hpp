#pragma once

// P1 conforming space V_h and the broken space of discontinuous piecewise
// linears on a triangulation, with the assembled operators the time stepper
// needs:
//
//   mass          P   (nv x nv)      P_kl = int phi_k phi_l
//   broken_mass   P~  (3 ns x nv)    P~_(3j+a),l = int_Sj phi~_(3j+a) phi_l
//   dgrad[i]      D_i (ns x nv)      (D_i)_jk = d/dx_i phi_k restricted to S_j
//   restriction   R   (ni x nv)      selects interior vertices
//
// Broken coefficients are simplex-major: simplex j owns entries 3j..3j+2 in
// the local vertex order of mesh.simplex(j).

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "constitutive.hpp"
#include "mesh.hpp"

namespace splap::fem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FeFunction {
  Eigen::VectorXd coeffs;
};

struct BrokenFeFunction {
  Eigen::VectorXd coeffs;
};

class FemOperators {
 public:
  const mesh::Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const mesh::Mesh> mesh_ptr() const { return mesh_; }

  Eigen::Index num_vertices() const { return mass_.rows(); }
  Eigen::Index num_simplices() const { return areas_.size(); }
  Eigen::Index num_interior() const { return restriction_.rows(); }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& broken_mass() const { return broken_mass_; }
  const SparseMatrix& dgrad(int i) const { return dgrad_[i]; }
  const Eigen::VectorXd& areas() const { return areas_; }
  const SparseMatrix& restriction() const { return restriction_; }

  /// Gradient of the local basis function of local vertex a on simplex j.
  const std::array<double, 2>& local_gradient(Eigen::Index j, int a) const {
    return local_grads_[3 * j + a];
  }
  /// Interior unknown index of vertex k, or -1 on the boundary.
  int interior_index(Eigen::Index k) const { return interior_index_[k]; }
  const std::vector<int>& interior_vertices() const { return interior_vertices_; }

  /// Interior block R P R^T.
  const SparseMatrix& interior_mass() const { return interior_mass_; }

  /// u = R^T u_I.
  Eigen::VectorXd prolong(const Eigen::VectorXd& interior) const;
  /// u_I = R u.
  Eigen::VectorXd restrict_interior(const Eigen::VectorXd& full) const;

 private:
  friend FemOperators assemble(std::shared_ptr<const mesh::Mesh> mesh);

  std::shared_ptr<const mesh::Mesh> mesh_;
  SparseMatrix mass_;
  SparseMatrix broken_mass_;
  std::array<SparseMatrix, 2> dgrad_;
  Eigen::VectorXd areas_;
  SparseMatrix restriction_;
  SparseMatrix interior_mass_;
  std::vector<std::array<double, 2>> local_grads_;
  std::vector<int> interior_index_;
  std::vector<int> interior_vertices_;
};

FemOperators assemble(std::shared_ptr<const mesh::Mesh> mesh);
FemOperators assemble(const mesh::Mesh& mesh);

/// Per-simplex gradient ((D_1 u)_j, (D_2 u)_j) as 1 x 2 matrices.
std::vector<constitutive::SmallMatrix> gradient_per_simplex(
    const FemOperators& ops, const FeFunction& u);

/// (u - v)^T P (u - v).
double l2_error_sq(const FemOperators& ops, const FeFunction& u,
                   const FeFunction& v);

/// sum_j |S_j| |F(grad u|_j) - F(grad v|_j)|^2.
double quasinorm_error_sq(const FemOperators& ops, const FeFunction& u,
                          const FeFunction& v,
                          const constitutive::GrowthParams& params);

FeFunction nodal_interpolate(const mesh::Mesh& mesh,
                             const std::function<double(const mesh::Point&)>& g);

/// Restriction of a conforming function to the broken space.
BrokenFeFunction broken_embed(const FemOperators& ops, const FeFunction& u);

/// P1 stiffness matrix from the cotangent formula, assembled directly from
/// the mesh geometry (no use of the D_i operators).
SparseMatrix assemble_stiffness(const mesh::Mesh& mesh);

/// Nodal values on `to` of the P1 function u living on `from`. Every vertex
/// of `to` must lie in the closure of some simplex of `from`.
FeFunction transfer(const mesh::Mesh& from, const FeFunction& u,
                    const mesh::Mesh& to);

}  // namespace splap::fem
