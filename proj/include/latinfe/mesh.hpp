#pragma once

#include "latinfe/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace latinfe {

enum class InterfaceBehavior { perfect, cohesive, contact };

// Through-the-width initial delamination on a ply-ply plane. The x-range
// [x0, x1] is tagged with `inside` (normally contact: already delaminated),
// the rest of the plane with `outside`.
struct CrackSpec {
  int plane = 1;  // 1-based index of the ply-ply plane, counted from below
  double x0 = 0.0;
  double x1 = 0.0;
  InterfaceBehavior inside = InterfaceBehavior::contact;
  InterfaceBehavior outside = InterfaceBehavior::cohesive;
};

struct HexElement {
  std::array<int, 8> nodes;  // VTK ordering
  int ply = 0;
};

// Reference to one face of a hex element, faces numbered 0..5:
// xmin, xmax, ymin, ymax, zmin, zmax of the structured brick.
struct FacetRef {
  int elem = -1;
  int face = -1;
};

struct ReferenceMesh {
  std::vector<Vec3> nodes;
  std::vector<HexElement> elements;

  // Structured layout bookkeeping.
  int nx = 0, ny = 0;
  std::vector<int> nz_per_ply;
  std::vector<double> ply_thickness;
  double length = 0.0, width = 0.0;

  // Behavior of each ply-ply plane facet column, indexed [plane-1][i + nx*j].
  std::vector<std::vector<InterfaceBehavior>> plane_behavior;

  // Named boundary facet sets (xmin, xmax, ..., per-ply variants).
  std::map<std::string, std::vector<FacetRef>> facet_sets;

  int n_plies() const { return static_cast<int>(nz_per_ply.size()); }
  int nz_total() const;
  double thickness() const;
  int node_id(int i, int j, int k) const {
    return i + (nx + 1) * (j + (ny + 1) * k);
  }
  int elem_id(int i, int j, int k) const { return i + nx * (j + ny * k); }
  std::array<int, 4> facet_nodes(const FacetRef& f) const;

  // Invariant audit: positive Jacobians, finite coordinates, ply layering.
  void audit() const;
};

ReferenceMesh generate_laminate_mesh(double length, double width,
                                     const std::vector<double>& ply_thicknesses,
                                     int nx, int ny, int nz_per_ply,
                                     const std::vector<CrackSpec>& cracks = {});

// Boundary facets of the whole mesh with the given outward direction
// (0..5 as in FacetRef::face) whose centers satisfy the predicate.
std::vector<FacetRef> select_boundary_facets(
    const ReferenceMesh& mesh, int face,
    const std::function<bool(const Vec3&)>& pred);

void write_vtk(const ReferenceMesh& mesh, const std::string& path,
               const std::vector<VecX>* nodal_fields = nullptr,
               const std::vector<std::string>* field_names = nullptr);

}  // namespace latinfe
