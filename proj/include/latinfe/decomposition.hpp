#pragma once

#include "latinfe/mesh.hpp"

#include <unordered_map>

namespace latinfe {

enum class BCKind { dirichlet, neumann };

// Boundary condition applied through a boundary interface. For Dirichlet,
// `mask` selects the constrained components; unmasked components behave as
// zero-traction Neumann. Values are scaled by a load schedule at run time.
struct BoundarySpec {
  std::string facet_set;
  BCKind kind = BCKind::dirichlet;
  std::array<bool, 3> mask = {true, true, true};
  Vec3 value = Vec3::Zero();
  int schedule = 0;
  std::string name;  // label for reactions/monitors
};

struct InterfaceGP {
  int facet = 0;
  double w = 0.0;  // reference area weight
  Vec3 X = Vec3::Zero();
  Eigen::Vector4d N = Eigen::Vector4d::Zero();
  Eigen::Vector4d dN1 = Eigen::Vector4d::Zero();  // d/d(xi1), physical
  Eigen::Vector4d dN2 = Eigen::Vector4d::Zero();
};

struct MacroBasis {
  // L2-orthonormal affine modes sampled at the interface Gauss points.
  std::vector<std::vector<Vec3>> modes;  // [mode][gp]
  int n_modes() const { return static_cast<int>(modes.size()); }
  VecX project(const std::vector<Vec3>& field,
               const std::vector<InterfaceGP>& gps) const;
};

struct InterfaceGeometry {
  int id = -1;
  int sub_a = -1, sub_b = -1;  // sub_b < 0: boundary interface
  InterfaceBehavior behavior = InterfaceBehavior::perfect;
  bool boundary = false;
  BCKind bc_kind = BCKind::dirichlet;
  std::array<bool, 3> bc_mask = {true, true, true};
  Vec3 bc_value = Vec3::Zero();
  int bc_schedule = 0;
  std::string bc_name;

  int axis = 0;       // reference plane normal axis
  Vec3 N3 = Vec3::Zero();  // unit normal, oriented sub_a -> sub_b (or outward)
  Vec3 A1 = Vec3::Zero(), A2 = Vec3::Zero();  // in-plane axes, A1 x A2 = N3
  double L_char = 0.0;
  double area = 0.0;

  std::vector<int> inodes;                    // global node ids
  std::vector<std::array<int, 4>> facets;     // indices into inodes
  std::vector<int> local_a, local_b;          // substructure-local node ids
  std::vector<InterfaceGP> gps;
  MacroBasis basis;

  int n_gps() const { return static_cast<int>(gps.size()); }
  bool interior() const { return !boundary; }
};

struct Substructure {
  int id = -1;
  int ply = 0;
  std::vector<int> elems;
  std::vector<int> nodes;  // global ids; local index is the position
  std::unordered_map<int, int> g2l;
  Vec3 bb_min = Vec3::Zero(), bb_max = Vec3::Zero();
  std::vector<int> interfaces;
  int ndof() const { return 3 * static_cast<int>(nodes.size()); }
};

MacroBasis build_macro_basis(const InterfaceGeometry& itf);

struct Decomposition {
  const ReferenceMesh* mesh = nullptr;
  std::vector<Substructure> subs;
  std::vector<InterfaceGeometry> interfaces;

  static Decomposition build(const ReferenceMesh& mesh, int cuts_x, int cuts_y,
                             const std::vector<BoundarySpec>& bcs);

  int n_interior() const;
  int n_boundary() const;
  void audit() const;
};

}  // namespace latinfe
