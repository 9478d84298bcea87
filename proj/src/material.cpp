#include "latinfe/material.hpp"

#include <cmath>

namespace latinfe {

namespace {
Mat6 compliance_from_engineering(double Ex, double Ey, double Ez, double nuxy,
                                 double nuxz, double nuyz, double Gxy,
                                 double Gxz, double Gyz) {
  Mat6 S = Mat6::Zero();
  S(0, 0) = 1.0 / Ex;
  S(1, 1) = 1.0 / Ey;
  S(2, 2) = 1.0 / Ez;
  S(0, 1) = S(1, 0) = -nuxy / Ex;
  S(0, 2) = S(2, 0) = -nuxz / Ex;
  S(1, 2) = S(2, 1) = -nuyz / Ey;
  S(3, 3) = 1.0 / Gyz;
  S(4, 4) = 1.0 / Gxz;
  S(5, 5) = 1.0 / Gxy;
  return S;
}
}  // namespace

MaterialLaw MaterialLaw::isotropic(double E, double nu, double rho) {
  if (!(E > 0.0)) throw InputError("E must be > 0");
  if (!(nu > -1.0 && nu < 0.5)) throw InputError("nu out of range");
  MaterialLaw m;
  m.rho0 = rho;
  double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
  double mu = E / (2 * (1 + nu));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.C(i, j) = lam;
    m.C(i, i) = lam + 2 * mu;
    m.C(3 + i, 3 + i) = mu;
  }
  return m;
}

MaterialLaw MaterialLaw::orthotropic(double E1, double E2, double E3,
                                     double nu12, double nu13, double nu23,
                                     double G12, double G13, double G23,
                                     double rho, double angle_deg) {
  for (double v : {E1, E2, E3, G12, G13, G23})
    if (!(v > 0.0)) throw InputError("moduli must be > 0");
  MaterialLaw m;
  m.rho0 = rho;
  Mat6 S;
  if (std::abs(angle_deg) < 1e-12) {
    S = compliance_from_engineering(E1, E2, E3, nu12, nu13, nu23, G12, G13,
                                    G23);
  } else if (std::abs(angle_deg - 90.0) < 1e-12) {
    // Fiber along the global y axis; exact axis swap of the orthotropic law.
    double nu21 = nu12 * E2 / E1;
    S = compliance_from_engineering(E2, E1, E3, nu21, nu23, nu13, G12, G23,
                                    G13);
  } else {
    throw InputError("only 0 and 90 degree plies are supported");
  }
  m.C = S.inverse();
  if (!m.is_spd()) throw InputError("elasticity tensor is not SPD");
  return m;
}

bool MaterialLaw::is_spd(double tol) const {
  if ((C - C.transpose()).norm() > 1e-8 * C.norm()) return false;
  Eigen::SelfAdjointEigenSolver<Mat6> es(C);
  return es.eigenvalues().minCoeff() > tol;
}

double MaterialLaw::stiffness_scale() const {
  // Young modulus along each axis from the compliance diagonal.
  Mat6 S = C.inverse();
  double e = 0.0;
  for (int i = 0; i < 3; ++i) e = std::max(e, 1.0 / S(i, i));
  return e;
}

}  // namespace latinfe
