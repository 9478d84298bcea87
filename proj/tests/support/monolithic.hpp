#pragma once

// Test-only oracle: a direct Newton solve of the monolithic nonlinear FE
// problem on the same mesh, with hard Dirichlet elimination. Shares only the
// element kernel (itself verified against finite differences and closed
// forms); the solution path is entirely independent of the LATIN machinery.

#include "latinfe/kernels.hpp"
#include "latinfe/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <map>
#include <set>

namespace testsupport {

using namespace latinfe;

struct MonolithicBC {
  std::string facet_set;
  bool dirichlet = true;
  std::array<bool, 3> mask = {true, true, true};
  Vec3 value = Vec3::Zero();
};

class MonolithicModel {
 public:
  MonolithicModel(const ReferenceMesh& mesh, MaterialLaw mat,
                  std::vector<MonolithicBC> bcs)
      : mesh_(&mesh), bcs_(std::move(bcs)) {
    sub_.id = 0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
      sub_.elems.push_back(static_cast<int>(e));
    sub_.nodes.resize(mesh.nodes.size());
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
      sub_.nodes[n] = static_cast<int>(n);
      sub_.g2l[static_cast<int>(n)] = static_cast<int>(n);
    }
    kernel_ = std::make_unique<SubstructureKernel>(mesh, sub_, std::move(mat));
  }

  // Newton with Dirichlet elimination; returns the global displacement.
  VecX solve(double tol = 1e-12, int max_iter = 30) const {
    int n = kernel_->ndof();
    VecX u = VecX::Zero(n);
    VecX f_ext = VecX::Zero(n);
    std::map<int, double> fixed;  // dof -> value
    for (const auto& bc : bcs_) {
      const auto& facets = mesh_->facet_sets.at(bc.facet_set);
      for (const auto& fr : facets) {
        auto nn = mesh_->facet_nodes(fr);
        Vec3 p0 = mesh_->nodes[nn[0]], p1 = mesh_->nodes[nn[1]],
             p2 = mesh_->nodes[nn[2]];
        double area = (p1 - p0).cross(p2 - p0).norm();  // quad = 2 triangles
        for (int c = 0; c < 4; ++c) {
          for (int d = 0; d < 3; ++d) {
            if (!bc.mask[d]) continue;
            if (bc.dirichlet)
              fixed[3 * nn[c] + d] = bc.value[d];
            else
              f_ext[3 * nn[c] + d] += bc.value[d] * area / 4.0;
          }
        }
      }
    }
    std::vector<int> free_map(n, -1);
    int nf = 0;
    for (int i = 0; i < n; ++i)
      if (!fixed.count(i)) free_map[i] = nf++;
    for (auto [dof, val] : fixed) u[dof] = val;

    for (int it = 0; it < max_iter; ++it) {
      VecX r = f_ext - kernel_->internal_force(u);
      double rn = 0.0;
      for (int i = 0; i < n; ++i)
        if (free_map[i] >= 0) rn += r[i] * r[i];
      rn = std::sqrt(rn);
      if (rn < tol * (1.0 + f_ext.norm())) return u;
      std::vector<Triplet> trips;
      kernel_->tangent_triplets(u, trips);
      std::vector<Triplet> red;
      for (const auto& t : trips) {
        int i = free_map[t.row()], j = free_map[t.col()];
        if (i >= 0 && j >= 0) red.emplace_back(i, j, t.value());
      }
      SpMat K(nf, nf);
      K.setFromTriplets(red.begin(), red.end());
      VecX rf(nf);
      for (int i = 0; i < n; ++i)
        if (free_map[i] >= 0) rf[free_map[i]] = r[i];
      Eigen::SimplicialLDLT<SpMat> ldlt(K);
      VecX du = ldlt.solve(rf);
      for (int i = 0; i < n; ++i)
        if (free_map[i] >= 0) u[i] += du[free_map[i]];
    }
    throw std::runtime_error("monolithic Newton did not converge");
  }

 private:
  const ReferenceMesh* mesh_;
  Substructure sub_;
  std::unique_ptr<SubstructureKernel> kernel_;
  std::vector<MonolithicBC> bcs_;
};

}  // namespace testsupport
