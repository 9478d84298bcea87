#pragma once

#include <utility>

namespace latinfe::oracles {

// Critical load of an axially compressed plate clamped at both ends,
// 4*pi^2*E*I/L^2 with I = b*h^3/12. Units: MPa, mm -> N.
double euler_load(double E, double b, double h, double L);

// Local and global buckling loads of a clamped plate with a central
// through-the-width delamination of length a0 at the mid-plane.
// h_ply is the thickness of one of the two sublaminates.
std::pair<double, double> local_global_buckling(double E, double b,
                                                double h_ply, double a0,
                                                double L0);

// Transverse displacement at which a locally buckled sublaminate starts to
// propagate: (3/16) xi^4 + 2 xi^2 = 4 Gc b0 / (pi^2 P_local), w = xi * a0.
double bruno_propagation(double Gc, double b0, double P_local, double a0);

// Double cantilever beam on an elastic foundation (stiffness from the
// interface modulus k_n0), opening displacement applied per arm.
// Returns the force per arm: linear up to crack-growth onset, then the
// LEFM propagation branch obtained from compliance differentiation.
double dcb_force(double E, double b, double h_arm, double a0, double k_n0,
                 double Yc, double displacement);

// Per-arm compliance of the foundation-supported arm at crack length a.
double dcb_compliance(double E, double b, double h_arm, double a, double k_n0);

// Load at which G = Yc for crack length a.
double dcb_propagation_load(double E, double b, double h_arm, double a,
                            double k_n0, double Yc);

}  // namespace latinfe::oracles
