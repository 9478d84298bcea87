#include "latinfe/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace latinfe {

namespace {

Vec3 face_outward(int face) {
  switch (face) {
    case 0: return {-1, 0, 0};
    case 1: return {1, 0, 0};
    case 2: return {0, -1, 0};
    case 3: return {0, 1, 0};
    case 4: return {0, 0, -1};
    default: return {0, 0, 1};
  }
}

// Fills in-plane axes, quadrature, node indexing and facet corner ordering
// from a list of global node quads lying on one reference plane.
void build_interface_geometry(InterfaceGeometry& itf, const ReferenceMesh& mesh,
                              const std::vector<std::array<int, 4>>& quads) {
  // Right-handed in-plane frame.
  Vec3 a1 = std::abs(itf.N3.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  a1 -= a1.dot(itf.N3) * itf.N3;
  itf.A1 = a1.normalized();
  itf.A2 = itf.N3.cross(itf.A1);

  std::map<int, int> g2i;
  for (const auto& q : quads)
    for (int g : q)
      if (!g2i.count(g)) {
        g2i[g] = static_cast<int>(itf.inodes.size());
        itf.inodes.push_back(g);
      }

  itf.area = 0.0;
  const double gp1 = 1.0 / std::sqrt(3.0);
  const double sa[4] = {-1, 1, 1, -1};
  const double ta[4] = {-1, -1, 1, 1};
  for (const auto& q : quads) {
    Vec3 c = Vec3::Zero();
    for (int g : q) c += mesh.nodes[g];
    c /= 4.0;
    // Canonical corner order (-,-),(+,-),(+,+),(-,+) in the (A1,A2) plane.
    std::array<int, 4> ordered{};
    double d1 = 0.0, d2 = 0.0;
    for (int g : q) {
      Vec3 r = mesh.nodes[g] - c;
      double x1 = r.dot(itf.A1), x2 = r.dot(itf.A2);
      d1 = std::max(d1, 2.0 * std::abs(x1));
      d2 = std::max(d2, 2.0 * std::abs(x2));
      int slot = (x1 < 0 ? (x2 < 0 ? 0 : 3) : (x2 < 0 ? 1 : 2));
      ordered[slot] = g;
    }
    std::array<int, 4> fi{};
    for (int cnr = 0; cnr < 4; ++cnr) fi[cnr] = g2i.at(ordered[cnr]);
    int fidx = static_cast<int>(itf.facets.size());
    itf.facets.push_back(fi);
    double af = d1 * d2;
    itf.area += af;
    for (int g2 = 0; g2 < 4; ++g2) {
      double s = (g2 % 2 == 0 ? -gp1 : gp1);
      double t = (g2 / 2 == 0 ? -gp1 : gp1);
      InterfaceGP gp;
      gp.facet = fidx;
      gp.w = af / 4.0;
      for (int a = 0; a < 4; ++a) {
        double n = 0.25 * (1 + s * sa[a]) * (1 + t * ta[a]);
        gp.N[a] = n;
        gp.dN1[a] = 0.25 * sa[a] * (1 + t * ta[a]) * 2.0 / d1;
        gp.dN2[a] = 0.25 * ta[a] * (1 + s * sa[a]) * 2.0 / d2;
        gp.X += n * mesh.nodes[ordered[a]];
      }
      itf.gps.push_back(gp);
    }
  }
  if (!(itf.area > 0.0)) throw InputError("interface with zero area");
}

}  // namespace

VecX MacroBasis::project(const std::vector<Vec3>& field,
                         const std::vector<InterfaceGP>& gps) const {
  VecX out = VecX::Zero(n_modes());
  for (int m = 0; m < n_modes(); ++m) {
    double s = 0.0;
    for (std::size_t g = 0; g < gps.size(); ++g)
      s += gps[g].w * modes[m][g].dot(field[g]);
    out[m] = s;
  }
  return out;
}

MacroBasis build_macro_basis(const InterfaceGeometry& itf) {
  if (!(itf.area > 0.0)) throw InputError("interface with zero area");
  const auto& gps = itf.gps;
  std::size_t ng = gps.size();

  Vec3 centroid = Vec3::Zero();
  for (const auto& g : gps) centroid += g.w * g.X;
  centroid /= itf.area;

  // Monomial fields e_c, xi1*e_c, xi2*e_c with centered in-plane coordinates.
  std::vector<std::vector<Vec3>> raw;
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 3; ++c) {
      std::vector<Vec3> f(ng, Vec3::Zero());
      for (std::size_t g = 0; g < ng; ++g) {
        Vec3 r = gps[g].X - centroid;
        double scal = k == 0 ? 1.0 : (k == 1 ? r.dot(itf.A1) : r.dot(itf.A2));
        f[g][c] = scal;
      }
      raw.push_back(std::move(f));
    }

  auto dot = [&](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (std::size_t g = 0; g < ng; ++g) s += gps[g].w * a[g].dot(b[g]);
    return s;
  };

  MacroBasis basis;
  for (auto& cand : raw) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& m : basis.modes) {
        double c = dot(cand, m);
        for (std::size_t g = 0; g < ng; ++g) cand[g] -= c * m[g];
      }
    double nrm = std::sqrt(dot(cand, cand));
    if (nrm < 1e-10 * std::sqrt(itf.area))
      throw InputError("degenerate interface: macro basis rank loss");
    for (auto& v : cand) v /= nrm;
    basis.modes.push_back(std::move(cand));
  }
  return basis;
}

int Decomposition::n_interior() const {
  int n = 0;
  for (const auto& i : interfaces) n += i.interior() ? 1 : 0;
  return n;
}

int Decomposition::n_boundary() const {
  return static_cast<int>(interfaces.size()) - n_interior();
}

Decomposition Decomposition::build(const ReferenceMesh& mesh, int cuts_x,
                                   int cuts_y,
                                   const std::vector<BoundarySpec>& bcs) {
  if (cuts_x < 1 || cuts_y < 1) throw InputError("cuts must be >= 1");
  if (mesh.nx % cuts_x != 0 || mesh.ny % cuts_y != 0)
    throw InputError("cut plane intersecting elements");
  int bx = mesh.nx / cuts_x, by = mesh.ny / cuts_y;
  int n_plies = mesh.n_plies();

  Decomposition d;
  d.mesh = &mesh;

  auto sub_index = [&](int sx, int sy, int p) {
    return sx + cuts_x * (sy + cuts_y * p);
  };
  d.subs.resize(cuts_x * cuts_y * n_plies);

  std::vector<int> kofs(n_plies + 1, 0);
  for (int p = 0; p < n_plies; ++p) kofs[p + 1] = kofs[p] + mesh.nz_per_ply[p];

  int nzt = mesh.nz_total();
  for (int k = 0; k < nzt; ++k) {
    int ply = int(std::upper_bound(kofs.begin(), kofs.end(), k) -
                  kofs.begin()) - 1;
    for (int j = 0; j < mesh.ny; ++j)
      for (int i = 0; i < mesh.nx; ++i) {
        int sid = sub_index(i / bx, j / by, ply);
        d.subs[sid].elems.push_back(mesh.elem_id(i, j, k));
      }
  }
  for (std::size_t s = 0; s < d.subs.size(); ++s) {
    auto& sub = d.subs[s];
    sub.id = static_cast<int>(s);
    sub.ply = static_cast<int>(s) / (cuts_x * cuts_y);
    std::set<int> ns;
    for (int e : sub.elems)
      for (int g : mesh.elements[e].nodes) ns.insert(g);
    sub.nodes.assign(ns.begin(), ns.end());
    sub.g2l.reserve(sub.nodes.size());
    for (std::size_t l = 0; l < sub.nodes.size(); ++l)
      sub.g2l[sub.nodes[l]] = static_cast<int>(l);
    sub.bb_min = Vec3::Constant(1e300);
    sub.bb_max = Vec3::Constant(-1e300);
    for (int g : sub.nodes) {
      sub.bb_min = sub.bb_min.cwiseMin(mesh.nodes[g]);
      sub.bb_max = sub.bb_max.cwiseMax(mesh.nodes[g]);
    }
  }

  auto extent = [&](int sid, int axis) {
    return d.subs[sid].bb_max[axis] - d.subs[sid].bb_min[axis];
  };

  auto add_interface = [&](int sa, int sb, int axis, InterfaceBehavior beh,
                           const std::vector<std::array<int, 4>>& quads) {
    InterfaceGeometry itf;
    itf.id = static_cast<int>(d.interfaces.size());
    itf.sub_a = sa;
    itf.sub_b = sb;
    itf.behavior = beh;
    itf.axis = axis;
    itf.N3 = Vec3::Zero();
    itf.N3[axis] = 1.0;
    itf.L_char = 0.5 * (extent(sa, axis) + extent(sb, axis));
    build_interface_geometry(itf, mesh, quads);
    itf.local_a.resize(itf.inodes.size());
    itf.local_b.resize(itf.inodes.size());
    for (std::size_t n = 0; n < itf.inodes.size(); ++n) {
      itf.local_a[n] = d.subs[sa].g2l.at(itf.inodes[n]);
      itf.local_b[n] = d.subs[sb].g2l.at(itf.inodes[n]);
    }
    itf.basis = build_macro_basis(itf);
    d.subs[sa].interfaces.push_back(itf.id);
    d.subs[sb].interfaces.push_back(itf.id);
    d.interfaces.push_back(std::move(itf));
  };

  // x-normal interfaces.
  for (int p = 0; p < n_plies; ++p)
    for (int sy = 0; sy < cuts_y; ++sy)
      for (int sx = 0; sx + 1 < cuts_x; ++sx) {
        std::vector<std::array<int, 4>> quads;
        int i = (sx + 1) * bx - 1;
        for (int k = kofs[p]; k < kofs[p + 1]; ++k)
          for (int j = sy * by; j < (sy + 1) * by; ++j)
            quads.push_back(
                mesh.facet_nodes(FacetRef{mesh.elem_id(i, j, k), 1}));
        add_interface(sub_index(sx, sy, p), sub_index(sx + 1, sy, p), 0,
                      InterfaceBehavior::perfect, quads);
      }
  // y-normal interfaces.
  for (int p = 0; p < n_plies; ++p)
    for (int sy = 0; sy + 1 < cuts_y; ++sy)
      for (int sx = 0; sx < cuts_x; ++sx) {
        std::vector<std::array<int, 4>> quads;
        int j = (sy + 1) * by - 1;
        for (int k = kofs[p]; k < kofs[p + 1]; ++k)
          for (int i = sx * bx; i < (sx + 1) * bx; ++i)
            quads.push_back(
                mesh.facet_nodes(FacetRef{mesh.elem_id(i, j, k), 3}));
        add_interface(sub_index(sx, sy, p), sub_index(sx, sy + 1, p), 1,
                      InterfaceBehavior::perfect, quads);
      }
  // Ply-plane interfaces, split by tagged behavior.
  for (int p = 0; p + 1 < n_plies; ++p) {
    int k = kofs[p + 1] - 1;  // top element layer of ply p
    for (int sy = 0; sy < cuts_y; ++sy)
      for (int sx = 0; sx < cuts_x; ++sx) {
        std::map<InterfaceBehavior, std::vector<std::array<int, 4>>> groups;
        for (int j = sy * by; j < (sy + 1) * by; ++j)
          for (int i = sx * bx; i < (sx + 1) * bx; ++i) {
            InterfaceBehavior beh = mesh.plane_behavior[p][i + mesh.nx * j];
            groups[beh].push_back(
                mesh.facet_nodes(FacetRef{mesh.elem_id(i, j, k), 5}));
          }
        for (auto& [beh, quads] : groups)
          add_interface(sub_index(sx, sy, p), sub_index(sx, sy, p + 1), 2, beh,
                        quads);
      }
  }

  // Boundary interfaces, one per (facet set, owning substructure).
  for (const auto& bc : bcs) {
    auto it = mesh.facet_sets.find(bc.facet_set);
    if (it == mesh.facet_sets.end())
      throw InputError("unknown facet set: " + bc.facet_set);
    std::map<int, std::vector<FacetRef>> per_sub;
    std::vector<int> elem_sub(mesh.elements.size(), -1);
    for (const auto& s : d.subs)
      for (int e : s.elems) elem_sub[e] = s.id;
    for (const auto& f : it->second) per_sub[elem_sub[f.elem]].push_back(f);
    for (auto& [sid, refs] : per_sub) {
      InterfaceGeometry itf;
      itf.id = static_cast<int>(d.interfaces.size());
      itf.sub_a = sid;
      itf.boundary = true;
      itf.bc_kind = bc.kind;
      itf.bc_mask = bc.mask;
      itf.bc_value = bc.value;
      itf.bc_schedule = bc.schedule;
      itf.bc_name = bc.name.empty() ? bc.facet_set : bc.name;
      itf.N3 = face_outward(refs[0].face);
      itf.axis = refs[0].face / 2;
      itf.L_char = extent(sid, itf.axis);
      std::vector<std::array<int, 4>> quads;
      for (const auto& f : refs) quads.push_back(mesh.facet_nodes(f));
      build_interface_geometry(itf, mesh, quads);
      itf.local_a.resize(itf.inodes.size());
      for (std::size_t n = 0; n < itf.inodes.size(); ++n)
        itf.local_a[n] = d.subs[sid].g2l.at(itf.inodes[n]);
      itf.basis = build_macro_basis(itf);
      d.subs[sid].interfaces.push_back(itf.id);
      d.interfaces.push_back(std::move(itf));
    }
  }

  d.audit();
  return d;
}

void Decomposition::audit() const {
  std::size_t total = 0;
  std::vector<int> owner(mesh->elements.size(), -1);
  for (const auto& s : subs) {
    total += s.elems.size();
    for (int e : s.elems) {
      if (owner[e] != -1) throw InputError("partition audit: element reused");
      owner[e] = s.id;
    }
  }
  if (total != mesh->elements.size())
    throw InputError("partition audit: element counts do not add up");

  // Every facet between two substructures must appear in exactly one
  // interior interface.
  std::map<std::array<int, 4>, int> interior_facets;
  auto key_of = [&](std::array<int, 4> q) {
    std::sort(q.begin(), q.end());
    return q;
  };
  for (const auto& itf : interfaces) {
    if (!itf.interior()) continue;
    for (const auto& f : itf.facets) {
      std::array<int, 4> q;
      for (int c = 0; c < 4; ++c) q[c] = itf.inodes[f[c]];
      if (++interior_facets[key_of(q)] > 1)
        throw InputError("partition audit: facet in two interfaces");
    }
  }
  std::size_t expected = 0;
  const auto& m = *mesh;
  int nzt = m.nz_total();
  auto check_pair = [&](int e1, int e2, const FacetRef& f) {
    if (owner[e1] != owner[e2]) {
      ++expected;
      auto q = m.facet_nodes(f);
      if (!interior_facets.count(key_of(q)))
        throw InputError("partition audit: interior facet not covered");
    }
  };
  for (int k = 0; k < nzt; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        int e = m.elem_id(i, j, k);
        if (i + 1 < m.nx)
          check_pair(e, m.elem_id(i + 1, j, k), FacetRef{e, 1});
        if (j + 1 < m.ny)
          check_pair(e, m.elem_id(i, j + 1, k), FacetRef{e, 3});
        if (k + 1 < nzt) check_pair(e, m.elem_id(i, j, k + 1), FacetRef{e, 5});
      }
  if (expected != interior_facets.size())
    throw InputError("partition audit: facet coverage mismatch");
}

}  // namespace latinfe
