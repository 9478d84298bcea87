#include "latinfe/interface_law.hpp"

#include <cmath>

namespace latinfe {

void CohesiveParams::validate() const {
  if (!(k_n0 > 0.0) || !(k_t0 > 0.0)) throw InputError("k0 must be > 0");
  if (!(Yc > 0.0)) throw InputError("Y_c must be > 0");
  if (!(n > 0.0)) throw InputError("n must be > 0");
  if (!(alpha >= 1.0)) throw InputError("alpha must be >= 1");
  if (gamma1 < 0.0 || gamma2 < 0.0) throw InputError("gamma must be >= 0");
}

std::pair<Vec3, double> deformed_normal(const Mat3& F, const Vec3& N3) {
  double detF = F.determinant();
  if (!(detF > 0.0)) throw SolverError("inverted interface element");
  Vec3 fmtn = F.inverse().transpose() * N3;
  double nrm = fmtn.norm();
  return {fmtn / nrm, detF * nrm};
}

InterfaceFrame interface_frame(const Mat3& F, const Vec3& N3, const Vec3& A1,
                               const Vec3& A2) {
  InterfaceFrame fr;
  auto [n3, J] = deformed_normal(F, N3);
  fr.n3 = n3;
  fr.J_gamma = J;
  Vec3 n1 = A1 - A1.dot(n3) * n3;
  double nrm = n1.norm();
  if (nrm < 1e-8) {
    n1 = A2 - A2.dot(n3) * n3;
    nrm = n1.norm();
  }
  n1 /= nrm;
  Vec3 n2 = n3.cross(n1);
  fr.Q.col(0) = n1;
  fr.Q.col(1) = n2;
  fr.Q.col(2) = n3;
  return fr;
}

DamageState damage_update(const Vec3& g, const DamageState& in,
                          const CohesiveParams& p) {
  DamageState out = in;
  double gn_pos = std::max(g[2], 0.0);
  double Yn = 0.5 * p.k_n0 * gn_pos * gn_pos;
  double Yt1 = 0.5 * p.k_t0 * g[0] * g[0];
  double Yt2 = 0.5 * p.k_t0 * g[1] * g[1];
  double Yeq = std::pow(std::pow(Yn, p.alpha) +
                            std::pow(p.gamma1 * Yt1, p.alpha) +
                            std::pow(p.gamma2 * Yt2, p.alpha),
                        1.0 / p.alpha);
  out.Y_max = std::max(in.Y_max, Yeq);
  double w = std::pow(p.n / (p.n + 1.0) * out.Y_max / p.Yc, p.n);
  double d_new = std::min(1.0, w);
  if (d_new > in.d) {
    // Exact integral of Y dd for the power-law evolution; sums to Yc over a
    // complete failure regardless of mode mix.
    double ex = (p.n + 1.0) / p.n;
    out.dissipated =
        in.dissipated + p.Yc * (std::pow(d_new, ex) - std::pow(in.d, ex));
    out.d = d_new;
  }
  return out;
}

std::pair<Vec3, DamageState> cohesive_traction(const Vec3& gap,
                                               const InterfaceFrame& frame,
                                               const DamageState& state,
                                               const CohesiveParams& p) {
  Vec3 g_loc = frame.Q.transpose() * gap;
  DamageState ds = damage_update(g_loc, state, p);
  double hplus = g_loc[2] > 0.0 ? 1.0 : 0.0;
  Vec3 t_loc((1.0 - ds.d) * p.k_t0 * g_loc[0],
             (1.0 - ds.d) * p.k_t0 * g_loc[1],
             (1.0 - hplus * ds.d) * p.k_n0 * g_loc[2]);
  return {frame.J_gamma * (frame.Q * t_loc), ds};
}

Mat3 direction_matrix(const Vec3& N3, double kn, double kt) {
  return kn * N3 * N3.transpose() +
         kt * (Mat3::Identity() - N3 * N3.transpose());
}

SidePairHat perfect_local_solve(const SidePair& s, const Mat3& kpa,
                                const Mat3& kpb) {
  SidePairHat out;
  Vec3 rhs = kpa * s.W_a + kpb * s.W_b - s.F_a - s.F_b;
  Vec3 w = (kpa + kpb).ldlt().solve(rhs);
  out.What_a = out.What_b = w;
  out.Fhat_a = s.F_a + kpa * (w - s.W_a);
  out.Fhat_b = -out.Fhat_a;
  return out;
}

SidePairHat contact_local_solve(const SidePair& s, const Mat3& kpa,
                                const Mat3& kpb, const Vec3& n3) {
  SidePairHat out;
  Mat3 ia = kpa.inverse(), ib = kpb.inverse();
  Vec3 wa_open = s.W_a - ia * s.F_a;
  Vec3 wb_open = s.W_b - ib * s.F_b;
  double gap_open = n3.dot(wb_open - wa_open);
  if (gap_open >= 0.0) {
    out.What_a = wa_open;
    out.What_b = wb_open;
    return out;  // open: traction-free
  }
  double denom = n3.dot((ia + ib) * n3);
  double fn = gap_open / denom;  // < 0: compression transmitted to side a
  out.Fhat_a = fn * n3;
  out.Fhat_b = -out.Fhat_a;
  out.What_a = s.W_a + ia * (out.Fhat_a - s.F_a);
  out.What_b = s.W_b + ib * (out.Fhat_b - s.F_b);
  return out;
}

CohesiveLocalResult cohesive_local_solve_infinite(const SidePair& s,
                                                  const InterfaceFrame& frame,
                                                  const DamageState& state,
                                                  const CohesiveParams& p) {
  CohesiveLocalResult r;
  r.hat.What_a = s.W_a;
  r.hat.What_b = s.W_b;
  auto [t, ds] = cohesive_traction(s.W_b - s.W_a, frame, state, p);
  r.hat.Fhat_a = t;
  r.hat.Fhat_b = -t;
  r.damage = ds;
  return r;
}

CohesiveLocalResult cohesive_local_solve_finite(
    const SidePair& s, const Mat3& kpa, const Mat3& kpb,
    const InterfaceFrame& frame, const DamageState& state,
    const CohesiveParams& p, double tol, int max_iter) {
  CohesiveLocalResult r;
  Mat3 C = kpa.inverse() + kpb.inverse();
  Mat3 Cinv = C.inverse();
  Vec3 g0 = (s.W_b - s.W_a) + kpa.inverse() * s.F_a - kpb.inverse() * s.F_b;

  // Fixed secant operator of the interface law at the input damage.
  Mat3 Ksec = frame.J_gamma * frame.Q *
              Eigen::DiagonalMatrix<double, 3>(
                  (1 - state.d) * p.k_t0, (1 - state.d) * p.k_t0,
                  (1 - state.d) * p.k_n0) *
              frame.Q.transpose();
  Mat3 Jac = -(Cinv + Ksec);
  Mat3 Jinv = Jac.inverse();

  Vec3 g = s.W_b - s.W_a;
  double ref = (Cinv * g0).norm() + p.k_n0 * g.norm() + p.Yc / 1e-3;
  DamageState ds = state;
  bool ok = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    auto [t, ds_trial] = cohesive_traction(g, frame, state, p);
    ds = ds_trial;
    Vec3 res = Cinv * (g0 - g) - t;
    if (res.norm() <= tol * ref) {
      ok = true;
      break;
    }
    g -= Jinv * res;
  }
  auto [t, ds_final] = cohesive_traction(g, frame, state, p);
  r.damage = ds_final;
  r.hat.Fhat_a = t;
  r.hat.Fhat_b = -t;
  r.hat.What_a = s.W_a + kpa.inverse() * (t - s.F_a);
  r.hat.What_b = s.W_b + kpb.inverse() * (-t - s.F_b);
  r.converged = ok;
  r.iterations = it;
  return r;
}

std::pair<Vec3, Vec3> boundary_local_solve(const Vec3& W, const Vec3& F,
                                           const Mat3& kp,
                                           const BoundaryCondition& bc) {
  bool all = bc.mask[0] && bc.mask[1] && bc.mask[2];
  if (bc.dirichlet && all) {
    Vec3 what = bc.value;
    return {what, F + kp * (what - W)};
  }
  if (!bc.dirichlet) {
    // Traction prescribed on every component (unmasked ones carry zero).
    Vec3 fhat = Vec3::Zero();
    for (int c = 0; c < 3; ++c) fhat[c] = bc.mask[c] ? bc.value[c] : 0.0;
    return {W + kp.inverse() * (fhat - F), fhat};
  }
  // Mixed: Dirichlet on masked components, zero traction on the rest.
  Vec3 what = W, fhat = Vec3::Zero();
  std::vector<int> dset, nset;
  for (int c = 0; c < 3; ++c) (bc.mask[c] ? dset : nset).push_back(c);
  for (int c : dset) what[c] = bc.value[c];
  if (!nset.empty()) {
    // Solve [k (what-W)]_N = (0 - F)_N for the free components.
    int m = static_cast<int>(nset.size());
    MatX knn(m, m);
    VecX rhs(m);
    for (int a = 0; a < m; ++a) {
      rhs[a] = -F[nset[a]];
      for (int b = 0; b < m; ++b) knn(a, b) = kp(nset[a], nset[b]);
      for (int c : dset) rhs[a] -= kp(nset[a], c) * (what[c] - W[c]);
    }
    VecX dw = knn.ldlt().solve(rhs);
    for (int a = 0; a < m; ++a) what[nset[a]] = W[nset[a]] + dw[a];
  }
  Vec3 f_full = F + kp * (what - W);
  for (int c : dset) fhat[c] = f_full[c];
  return {what, fhat};
}

}  // namespace latinfe
