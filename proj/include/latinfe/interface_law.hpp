#pragma once

#include "latinfe/types.hpp"

namespace latinfe {

struct CohesiveParams {
  double k_n0 = 0.0, k_t0 = 0.0;  // N/mm^3
  double Yc = 0.0;                // N/mm
  double alpha = 1.0, n = 0.5;
  double gamma1 = 1.0, gamma2 = 1.0;
  void validate() const;
};

struct DamageState {
  double d = 0.0;
  double Y_max = 0.0;       // N/mm
  double dissipated = 0.0;  // N/mm (per unit reference area)
};

struct InterfaceFrame {
  Mat3 Q = Mat3::Identity();  // columns n1, n2, n3; local -> global
  Vec3 n3 = Vec3::UnitZ();
  double J_gamma = 1.0;  // dGamma / dGamma0
};

// Nanson transport of the reference unit normal.
std::pair<Vec3, double> deformed_normal(const Mat3& F_interface,
                                        const Vec3& N3);

// n3 from Nanson; tangents by projecting the reference in-plane axes onto
// the plane orthogonal to n3.
InterfaceFrame interface_frame(const Mat3& F_interface, const Vec3& N3,
                               const Vec3& A1, const Vec3& A2);

// History update from the local-frame gap (t1, t2, n). Irreversible;
// dissipation accumulated exactly for the power-law evolution.
DamageState damage_update(const Vec3& gap_local, const DamageState& state,
                          const CohesiveParams& p);

// Traction per unit reference area on the side the normal points away from,
// plus the updated damage. gap is expressed in the global frame.
std::pair<Vec3, DamageState> cohesive_traction(const Vec3& gap,
                                               const InterfaceFrame& frame,
                                               const DamageState& state,
                                               const CohesiveParams& p);

// Anisotropic direction operator: kn on the normal, kt on the plane.
Mat3 direction_matrix(const Vec3& N3, double kn, double kt);

struct SidePair {
  Vec3 W_a, W_b, F_a, F_b;
};
struct SidePairHat {
  Vec3 What_a = Vec3::Zero(), What_b = Vec3::Zero();
  Vec3 Fhat_a = Vec3::Zero(), Fhat_b = Vec3::Zero();
};

// Perfect interface: zero jump, action-reaction, both k+ equations.
SidePairHat perfect_local_solve(const SidePair& s, const Mat3& kpa,
                                const Mat3& kpb);

// Frictionless unilateral contact along the deformed normal; the branch is
// chosen by the open trial, switching to the closed branch on interpenetration.
SidePairHat contact_local_solve(const SidePair& s, const Mat3& kpa,
                                const Mat3& kpb, const Vec3& n3);

struct CohesiveLocalResult {
  SidePairHat hat;
  DamageState damage;
  bool converged = true;
  int iterations = 0;
};

// k+ infinite: interface quantities evaluated directly (What = W).
CohesiveLocalResult cohesive_local_solve_infinite(const SidePair& s,
                                                  const InterfaceFrame& frame,
                                                  const DamageState& state,
                                                  const CohesiveParams& p);

// Finite k+: per-point modified Newton with a fixed secant operator.
CohesiveLocalResult cohesive_local_solve_finite(const SidePair& s,
                                                const Mat3& kpa,
                                                const Mat3& kpb,
                                                const InterfaceFrame& frame,
                                                const DamageState& state,
                                                const CohesiveParams& p,
                                                double tol = 1e-10,
                                                int max_iter = 50);

struct BoundaryCondition {
  bool dirichlet = true;
  std::array<bool, 3> mask = {true, true, true};  // components carrying the BC
  Vec3 value = Vec3::Zero();
};

// Dirichlet: What = U_d, Fhat = F + k+(What - W); Neumann the dual. Mixed
// component masks solve the coupled 3x3 search-direction system.
std::pair<Vec3, Vec3> boundary_local_solve(const Vec3& W, const Vec3& F,
                                           const Mat3& kp,
                                           const BoundaryCondition& bc);

}  // namespace latinfe
