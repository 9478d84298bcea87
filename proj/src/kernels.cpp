#include "latinfe/kernels.hpp"

#include <cmath>
#include <map>

namespace latinfe {

Mat3 green_lagrange(const Mat3& H) {
  return 0.5 * (H + H.transpose() + H.transpose() * H);
}

Vec6 to_voigt_strain(const Mat3& E) {
  Vec6 e;
  e << E(0, 0), E(1, 1), E(2, 2), 2 * E(1, 2), 2 * E(0, 2), 2 * E(0, 1);
  return e;
}

Mat3 from_voigt_stress(const Vec6& s) {
  Mat3 S;
  S << s[0], s[5], s[4],  //
      s[5], s[1], s[3],   //
      s[4], s[3], s[2];
  return S;
}

Mat3 pk2_stress(const Mat3& E, const MaterialLaw& mat) {
  return from_voigt_stress(mat.C * to_voigt_strain(E));
}

double strain_energy_density(const Mat3& E, const MaterialLaw& mat) {
  Vec6 e = to_voigt_strain(E);
  return 0.5 * e.dot(mat.C * e);
}

namespace {
// Local corner coordinates of the VTK hex, scaled to [-1,1].
constexpr double kXi[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1},
                              {-1, 1, -1},  {-1, -1, 1}, {1, -1, 1},
                              {1, 1, 1},    {-1, 1, 1}};
}  // namespace

SubstructureKernel::SubstructureKernel(const ReferenceMesh& mesh,
                                       const Substructure& sub,
                                       MaterialLaw mat)
    : sub_(&sub), mat_(std::move(mat)), ndof_(sub.ndof()) {
  const double g = 1.0 / std::sqrt(3.0);
  std::map<std::array<long, 3>, int> size_index;
  elem_shape_.reserve(sub.elems.size());
  elem_lnodes_.reserve(sub.elems.size());
  for (int eg : sub.elems) {
    const auto& e = mesh.elements[eg];
    Vec3 d(mesh.nodes[e.nodes[1]].x() - mesh.nodes[e.nodes[0]].x(),
           mesh.nodes[e.nodes[3]].y() - mesh.nodes[e.nodes[0]].y(),
           mesh.nodes[e.nodes[4]].z() - mesh.nodes[e.nodes[0]].z());
    std::array<long, 3> key{std::lround(d.x() * 1e12),
                            std::lround(d.y() * 1e12),
                            std::lround(d.z() * 1e12)};
    auto it = size_index.find(key);
    int si;
    if (it == size_index.end()) {
      Shape sh;
      double detJ = d.prod() / 8.0;
      for (int q = 0; q < 8; ++q) {
        double xi = g * kXi[q][0], eta = g * kXi[q][1], zeta = g * kXi[q][2];
        GpData gp;
        gp.wdetJ = detJ;  // unit weights
        for (int a = 0; a < 8; ++a) {
          double fx = 1 + xi * kXi[a][0];
          double fy = 1 + eta * kXi[a][1];
          double fz = 1 + zeta * kXi[a][2];
          gp.dN(a, 0) = 0.125 * kXi[a][0] * fy * fz * 2.0 / d.x();
          gp.dN(a, 1) = 0.125 * kXi[a][1] * fx * fz * 2.0 / d.y();
          gp.dN(a, 2) = 0.125 * kXi[a][2] * fx * fy * 2.0 / d.z();
        }
        sh.gp[q] = gp;
      }
      si = static_cast<int>(shapes_.size());
      shapes_.push_back(sh);
      size_index[key] = si;
    } else {
      si = it->second;
    }
    elem_shape_.push_back(si);
    volume_ += d.prod();
    std::array<int, 8> ln{};
    for (int a = 0; a < 8; ++a) ln[a] = sub.g2l.at(e.nodes[a]);
    elem_lnodes_.push_back(ln);
  }
}

VecX SubstructureKernel::internal_force(const VecX& u,
                                        bool allow_inverted) const {
  VecX f = VecX::Zero(ndof_);
  for (std::size_t el = 0; el < elem_lnodes_.size(); ++el) {
    const auto& ln = elem_lnodes_[el];
    const Shape& sh = shapes_[elem_shape_[el]];
    Eigen::Matrix<double, 3, 8> ue;
    for (int a = 0; a < 8; ++a) ue.col(a) = u.segment<3>(3 * ln[a]);
    Eigen::Matrix<double, 3, 8> fe = Eigen::Matrix<double, 3, 8>::Zero();
    for (const auto& gp : sh.gp) {
      Mat3 H = ue * gp.dN;
      Mat3 F = Mat3::Identity() + H;
      if (!allow_inverted && F.determinant() <= 0.0)
        throw SolverError("inverted element (det F <= 0)");
      Mat3 S = pk2_stress(green_lagrange(H), mat_);
      Mat3 P = F * S;
      fe.noalias() += gp.wdetJ * (P * gp.dN.transpose());
    }
    for (int a = 0; a < 8; ++a) f.segment<3>(3 * ln[a]) += fe.col(a);
  }
  return f;
}

bool SubstructureKernel::has_inverted_element(const VecX& u) const {
  for (std::size_t el = 0; el < elem_lnodes_.size(); ++el) {
    const auto& ln = elem_lnodes_[el];
    const Shape& sh = shapes_[elem_shape_[el]];
    Eigen::Matrix<double, 3, 8> ue;
    for (int a = 0; a < 8; ++a) ue.col(a) = u.segment<3>(3 * ln[a]);
    for (const auto& gp : sh.gp) {
      Mat3 F = Mat3::Identity() + ue * gp.dN;
      if (F.determinant() <= 0.0) return true;
    }
  }
  return false;
}

void SubstructureKernel::tangent_triplets(const VecX& u,
                                          std::vector<Triplet>& out) const {
  using M624 = Eigen::Matrix<double, 6, 24>;
  using M24 = Eigen::Matrix<double, 24, 24>;
  for (std::size_t el = 0; el < elem_lnodes_.size(); ++el) {
    const auto& ln = elem_lnodes_[el];
    const Shape& sh = shapes_[elem_shape_[el]];
    Eigen::Matrix<double, 3, 8> ue;
    for (int a = 0; a < 8; ++a) ue.col(a) = u.segment<3>(3 * ln[a]);
    M24 ke = M24::Zero();
    for (const auto& gp : sh.gp) {
      Mat3 H = ue * gp.dN;
      Mat3 F = Mat3::Identity() + H;
      Mat3 S = pk2_stress(green_lagrange(H), mat_);
      M624 B;
      for (int a = 0; a < 8; ++a) {
        Vec3 dn = gp.dN.row(a).transpose();
        for (int i = 0; i < 3; ++i) {
          B(0, 3 * a + i) = F(i, 0) * dn[0];
          B(1, 3 * a + i) = F(i, 1) * dn[1];
          B(2, 3 * a + i) = F(i, 2) * dn[2];
          B(3, 3 * a + i) = F(i, 1) * dn[2] + F(i, 2) * dn[1];
          B(4, 3 * a + i) = F(i, 0) * dn[2] + F(i, 2) * dn[0];
          B(5, 3 * a + i) = F(i, 0) * dn[1] + F(i, 1) * dn[0];
        }
      }
      ke.noalias() += gp.wdetJ * (B.transpose() * (mat_.C * B));
      Eigen::Matrix<double, 8, 8> geo =
          gp.wdetJ * (gp.dN * S * gp.dN.transpose());
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          double v = geo(a, b);
          ke(3 * a, 3 * b) += v;
          ke(3 * a + 1, 3 * b + 1) += v;
          ke(3 * a + 2, 3 * b + 2) += v;
        }
    }
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.emplace_back(3 * ln[a] + i, 3 * ln[b] + j,
                             ke(3 * a + i, 3 * b + j));
  }
}

double SubstructureKernel::energy(const VecX& u) const {
  double w = 0.0;
  for (std::size_t el = 0; el < elem_lnodes_.size(); ++el) {
    const auto& ln = elem_lnodes_[el];
    const Shape& sh = shapes_[elem_shape_[el]];
    Eigen::Matrix<double, 3, 8> ue;
    for (int a = 0; a < 8; ++a) ue.col(a) = u.segment<3>(3 * ln[a]);
    for (const auto& gp : sh.gp)
      w += gp.wdetJ * strain_energy_density(green_lagrange(ue * gp.dN), mat_);
  }
  return w;
}

VecX SubstructureKernel::body_force(const Vec3& f_d) const {
  VecX f = VecX::Zero(ndof_);
  if (f_d.isZero() || mat_.rho0 == 0.0) return f;
  const double g = 1.0 / std::sqrt(3.0);
  for (std::size_t el = 0; el < elem_lnodes_.size(); ++el) {
    const auto& ln = elem_lnodes_[el];
    const Shape& sh = shapes_[elem_shape_[el]];
    for (int q = 0; q < 8; ++q) {
      double wq = sh.gp[q].wdetJ * mat_.rho0;
      for (int a = 0; a < 8; ++a) {
        double n = 0.125 * (1 + g * kXi[q][0] * kXi[a][0]) *
                   (1 + g * kXi[q][1] * kXi[a][1]) *
                   (1 + g * kXi[q][2] * kXi[a][2]);
        f.segment<3>(3 * ln[a]) += wq * n * f_d;
      }
    }
  }
  return f;
}

}  // namespace latinfe
