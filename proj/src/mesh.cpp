#include "latinfe/mesh.hpp"

#include <cmath>
#include <fstream>

namespace latinfe {

namespace {
// Local node indices of each hex face, ordered so the facet quad is a proper
// cycle. Face order: xmin, xmax, ymin, ymax, zmin, zmax.
constexpr int kFaceNodes[6][4] = {
    {0, 3, 7, 4}, {1, 2, 6, 5}, {0, 1, 5, 4},
    {2, 3, 7, 6}, {0, 1, 2, 3}, {4, 5, 6, 7},
};
}  // namespace

int ReferenceMesh::nz_total() const {
  int n = 0;
  for (int v : nz_per_ply) n += v;
  return n;
}

double ReferenceMesh::thickness() const {
  double t = 0.0;
  for (double v : ply_thickness) t += v;
  return t;
}

std::array<int, 4> ReferenceMesh::facet_nodes(const FacetRef& f) const {
  const auto& e = elements[f.elem];
  std::array<int, 4> out;
  for (int c = 0; c < 4; ++c) out[c] = e.nodes[kFaceNodes[f.face][c]];
  return out;
}

void ReferenceMesh::audit() const {
  for (const auto& p : nodes)
    if (!p.allFinite()) throw InputError("mesh audit: non-finite coordinates");
  for (const auto& e : elements) {
    if (e.ply < 0 || e.ply >= n_plies())
      throw InputError("mesh audit: element outside ply range");
    // Trilinear hexes on a structured grid: the Jacobian is constant and
    // equals one eighth of the edge-vector triple product.
    Vec3 dx = nodes[e.nodes[1]] - nodes[e.nodes[0]];
    Vec3 dy = nodes[e.nodes[3]] - nodes[e.nodes[0]];
    Vec3 dz = nodes[e.nodes[4]] - nodes[e.nodes[0]];
    if (dx.cross(dy).dot(dz) <= 0.0)
      throw InputError("mesh audit: non-positive element Jacobian");
  }
}

ReferenceMesh generate_laminate_mesh(double length, double width,
                                     const std::vector<double>& ply_thicknesses,
                                     int nx, int ny, int nz_per_ply,
                                     const std::vector<CrackSpec>& cracks) {
  if (!(length > 0.0) || !(width > 0.0))
    throw InputError("degenerate dimension: length and width must be > 0");
  if (ply_thicknesses.empty()) throw InputError("at least one ply required");
  for (double t : ply_thicknesses)
    if (!(t > 0.0)) throw InputError("degenerate dimension: ply thickness");
  if (nx < 1 || ny < 1 || nz_per_ply < 1)
    throw InputError("element counts must be >= 1");

  ReferenceMesh m;
  m.nx = nx;
  m.ny = ny;
  m.length = length;
  m.width = width;
  m.ply_thickness = ply_thicknesses;
  m.nz_per_ply.assign(ply_thicknesses.size(), nz_per_ply);

  int nzt = m.nz_total();
  std::vector<double> zlev;
  zlev.reserve(nzt + 1);
  zlev.push_back(0.0);
  for (std::size_t p = 0; p < ply_thicknesses.size(); ++p)
    for (int k = 0; k < nz_per_ply; ++k)
      zlev.push_back(zlev.back() + ply_thicknesses[p] / nz_per_ply);

  m.nodes.reserve((nx + 1) * (ny + 1) * (nzt + 1));
  for (int k = 0; k <= nzt; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.nodes.emplace_back(length * i / nx, width * j / ny, zlev[k]);

  m.elements.reserve(nx * ny * nzt);
  for (int k = 0; k < nzt; ++k) {
    int ply = k / nz_per_ply;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        HexElement e;
        e.ply = ply;
        e.nodes = {m.node_id(i, j, k),         m.node_id(i + 1, j, k),
                   m.node_id(i + 1, j + 1, k), m.node_id(i, j + 1, k),
                   m.node_id(i, j, k + 1),     m.node_id(i + 1, j, k + 1),
                   m.node_id(i + 1, j + 1, k + 1),
                   m.node_id(i, j + 1, k + 1)};
        m.elements.push_back(e);
      }
  }

  // Ply-ply plane tags, perfect by default (over-ridden by crack specs).
  int n_planes = m.n_plies() - 1;
  m.plane_behavior.assign(n_planes,
                          std::vector<InterfaceBehavior>(
                              nx * ny, InterfaceBehavior::perfect));
  for (const auto& c : cracks) {
    if (c.plane < 1 || c.plane > n_planes)
      throw InputError("crack plane not aligned with a ply interface");
    if (!(c.x1 > c.x0) || c.x0 < -1e-12 || c.x1 > length + 1e-12)
      throw InputError("crack range outside the plate");
    auto& tags = m.plane_behavior[c.plane - 1];
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double xc = length * (i + 0.5) / nx;
        tags[i + nx * j] = (xc > c.x0 && xc < c.x1) ? c.inside : c.outside;
      }
  }

  // Standard boundary sets.
  auto collect = [&](int face, auto pick) {
    std::vector<FacetRef> out;
    for (int k = 0; k < nzt; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          if (pick(i, j, k)) out.push_back({m.elem_id(i, j, k), face});
    return out;
  };
  m.facet_sets["xmin"] = collect(0, [&](int i, int, int) { return i == 0; });
  m.facet_sets["xmax"] =
      collect(1, [&](int i, int, int) { return i == nx - 1; });
  m.facet_sets["zmin"] = collect(4, [&](int, int, int k) { return k == 0; });
  m.facet_sets["zmax"] =
      collect(5, [&](int, int, int k) { return k == nzt - 1; });
  for (int p = 0; p < m.n_plies(); ++p) {
    int k0 = p * nz_per_ply, k1 = (p + 1) * nz_per_ply;
    auto in_ply = [&](int k) { return k >= k0 && k < k1; };
    m.facet_sets["xmin_ply" + std::to_string(p)] =
        collect(0, [&](int i, int, int k) { return i == 0 && in_ply(k); });
    m.facet_sets["xmax_ply" + std::to_string(p)] = collect(
        1, [&](int i, int, int k) { return i == nx - 1 && in_ply(k); });
  }

  m.audit();
  return m;
}

std::vector<FacetRef> select_boundary_facets(
    const ReferenceMesh& mesh, int face,
    const std::function<bool(const Vec3&)>& pred) {
  std::vector<FacetRef> out;
  int nzt = mesh.nz_total();
  for (int k = 0; k < nzt; ++k)
    for (int j = 0; j < mesh.ny; ++j)
      for (int i = 0; i < mesh.nx; ++i) {
        bool on_boundary = (face == 0 && i == 0) ||
                           (face == 1 && i == mesh.nx - 1) ||
                           (face == 2 && j == 0) ||
                           (face == 3 && j == mesh.ny - 1) ||
                           (face == 4 && k == 0) || (face == 5 && k == nzt - 1);
        if (!on_boundary) continue;
        FacetRef f{mesh.elem_id(i, j, k), face};
        auto nn = mesh.facet_nodes(f);
        Vec3 c = Vec3::Zero();
        for (int nid : nn) c += mesh.nodes[nid];
        c /= 4.0;
        if (pred(c)) out.push_back(f);
      }
  return out;
}

void write_vtk(const ReferenceMesh& mesh, const std::string& path,
               const std::vector<VecX>* nodal_fields,
               const std::vector<std::string>* field_names) {
  std::ofstream os(path);
  if (!os) throw SolverError("cannot open " + path);
  os << "# vtk DataFile Version 3.0\nlatinfe mesh\nASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.nodes.size() << " double\n";
  os.precision(12);
  for (const auto& p : mesh.nodes)
    os << p.x() << " " << p.y() << " " << p.z() << "\n";
  os << "CELLS " << mesh.elements.size() << " " << 9 * mesh.elements.size()
     << "\n";
  for (const auto& e : mesh.elements) {
    os << 8;
    for (int n : e.nodes) os << " " << n;
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.elements.size() << "\n";
  for (std::size_t i = 0; i < mesh.elements.size(); ++i) os << "12\n";
  if (nodal_fields && !nodal_fields->empty()) {
    os << "POINT_DATA " << mesh.nodes.size() << "\n";
    for (std::size_t f = 0; f < nodal_fields->size(); ++f) {
      const VecX& v = (*nodal_fields)[f];
      std::string name = field_names && f < field_names->size()
                             ? (*field_names)[f]
                             : "field" + std::to_string(f);
      if (v.size() == static_cast<long>(3 * mesh.nodes.size())) {
        os << "VECTORS " << name << " double\n";
        for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
          os << v[3 * n] << " " << v[3 * n + 1] << " " << v[3 * n + 2] << "\n";
      } else {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (long n = 0; n < v.size(); ++n) os << v[n] << "\n";
      }
    }
  }
}

}  // namespace latinfe
