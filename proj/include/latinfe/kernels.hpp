#pragma once

#include "latinfe/decomposition.hpp"
#include "latinfe/material.hpp"

namespace latinfe {

// E = 1/2 (H + H^T + H^T H), H the displacement gradient in the reference
// configuration. Total function, symmetric by construction.
Mat3 green_lagrange(const Mat3& grad0_u);

// Second Piola-Kirchhoff stress of the Saint-Venant-Kirchhoff law.
Mat3 pk2_stress(const Mat3& E, const MaterialLaw& mat);

double strain_energy_density(const Mat3& E, const MaterialLaw& mat);

Vec6 to_voigt_strain(const Mat3& E);
Mat3 from_voigt_stress(const Vec6& s);

// Element-level total-Lagrangian assembly for one substructure.
// 8-node hexahedra, full 2x2x2 quadrature; reference gradients are shared
// between elements with identical box geometry.
class SubstructureKernel {
 public:
  SubstructureKernel(const ReferenceMesh& mesh, const Substructure& sub,
                     MaterialLaw mat);

  int ndof() const { return ndof_; }
  const MaterialLaw& material() const { return mat_; }
  double volume() const { return volume_; }

  // Assembled internal nodal forces; throws SolverError if an element is
  // inverted (det F <= 0) unless `allow_inverted`.
  VecX internal_force(const VecX& u, bool allow_inverted = false) const;
  bool has_inverted_element(const VecX& u) const;

  // Consistent tangent (material + geometric part) as triplets.
  void tangent_triplets(const VecX& u, std::vector<Triplet>& out) const;

  double energy(const VecX& u) const;
  VecX body_force(const Vec3& f_d) const;

 private:
  struct GpData {
    Eigen::Matrix<double, 8, 3> dN;  // reference gradients
    double wdetJ;
  };
  struct Shape {
    std::array<GpData, 8> gp;
  };

  const Substructure* sub_;
  MaterialLaw mat_;
  int ndof_;
  double volume_ = 0.0;
  std::vector<Shape> shapes_;
  std::vector<int> elem_shape_;                    // element -> shape index
  std::vector<std::array<int, 8>> elem_lnodes_;    // substructure-local nodes
};

}  // namespace latinfe
