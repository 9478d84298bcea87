#pragma once

#include "latinfe/types.hpp"

namespace latinfe {

// Saint-Venant-Kirchhoff elasticity: second Piola-Kirchhoff stress is a fixed
// linear map of the Green-Lagrange strain. Voigt order 11,22,33,23,13,12 with
// engineering shear strains.
struct MaterialLaw {
  Mat6 C = Mat6::Zero();  // MPa
  double rho0 = 0.0;      // reference density, t/mm^3 scale (body forces only)

  static MaterialLaw isotropic(double E, double nu, double rho = 0.0);

  // Engineering constants in the ply frame (1 = fiber). angle_deg rotates the
  // ply frame about the thickness axis; only 0 and 90 are supported.
  static MaterialLaw orthotropic(double E1, double E2, double E3, double nu12,
                                 double nu13, double nu23, double G12,
                                 double G13, double G23, double rho = 0.0,
                                 double angle_deg = 0.0);

  bool is_spd(double tol = 0.0) const;
  // Largest Young-type modulus, used for E/L search-direction scaling.
  double stiffness_scale() const;
};

}  // namespace latinfe
